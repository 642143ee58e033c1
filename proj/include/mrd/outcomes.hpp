#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mrd/design.hpp"

namespace mrd {

// Four I x J real matrices, one per pair type, holding the potential
// outcomes under local interference.
struct PotentialOutcomeTable {
  int rows = 0;
  int cols = 0;
  std::array<std::vector<double>, kNumTypes> tables;

  double at(PairType t, int i, int j) const {
    return tables[static_cast<int>(t)][static_cast<std::size_t>(i) * cols + j];
  }
  double& at(PairType t, int i, int j) {
    return tables[static_cast<int>(t)][static_cast<std::size_t>(i) * cols + j];
  }

  // Max |y_ij(gamma)| over all cells and types (the boundedness cap).
  double outcome_bound() const;
};

PotentialOutcomeTable make_potential_table(int rows, int cols);

// Gaussian mixture components for the synthetic generator. Each component
// ell has law N(p_ell * mu_ell, sigma_ell^2); p_0 = p_1 = 1 and p_B, p_S
// come from the design.
struct OutcomeModelConfig {
  double mu_0 = 3.0;
  double mu_buyer = -1.0;
  double mu_seller = -1.0;
  double mu_1 = 6.0;
  double sigma_0 = 1.0;
  double sigma_buyer = 1.0;
  double sigma_seller = 1.0;
  double sigma_1 = 1.0;
  double p_buyer = 0.45;
  double p_seller = 0.55;

  void validate() const;

  // Component means p_ell * mu_ell.
  double mean_0() const { return mu_0; }
  double mean_buyer() const { return p_buyer * mu_buyer; }
  double mean_seller() const { return p_seller * mu_seller; }
  double mean_1() const { return mu_1; }
};

// Independent cells: y(cc) ~ F_0, y(ib) ~ F_0 + F_B, y(is) ~ F_0 + F_S,
// y(tr) ~ F_1 + F_B + F_S, sums of independent draws. Deterministic given
// seed.
PotentialOutcomeTable generate_potential_outcomes(
    const OutcomeModelConfig& config, int rows, int cols,
    std::uint64_t seed);

// observed[i][j] = y_ij(types[i][j]); pure lookup.
std::vector<double> realize_outcomes(const PotentialOutcomeTable& potentials,
                                     const TypeMatrix& types);

// Optional validation predicates for the stronger interference
// assumptions. Strong no-interference requires y(cc) = y(ib) = y(is)
// cell-wise; no-interference-for-buyers requires y(cc) = y(ib).
bool satisfies_strong_no_interference(const PotentialOutcomeTable& potentials,
                                      double tolerance = 0.0);
bool satisfies_no_buyer_interference(const PotentialOutcomeTable& potentials,
                                     double tolerance = 0.0);

}  // namespace mrd
