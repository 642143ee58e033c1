#pragma once

#include <array>
#include <vector>

#include "mrd/design.hpp"
#include "mrd/estimation.hpp"
#include "mrd/outcomes.hpp"

namespace mrd {

// Population-level moments of the potential-outcome tables: per-type row,
// column and interaction deviations, their variances, the pairwise
// squared-difference terms, and the design weights.
struct PopulationMoments {
  int rows = 0;
  int cols = 0;
  std::array<int, kNumTypes> row_counts;  // I_gamma
  std::array<int, kNumTypes> col_counts;  // J_gamma

  // Deviations per type: row (size I), column (size J), interaction
  // (row-major I*J).
  std::array<std::vector<double>, kNumTypes> row_dev;
  std::array<std::vector<double>, kNumTypes> col_dev;
  std::array<std::vector<double>, kNumTypes> inter_dev;

  // sigma[t][x] with x: 0 = buyer, 1 = seller, 2 = interaction.
  std::array<std::array<double, 3>, kNumTypes> sigma;
  // xi[t][t'][x], symmetric, zero diagonal.
  std::array<std::array<std::array<double, 3>, kNumTypes>, kNumTypes> xi;

  std::array<double, kNumTypes> alpha_buyer;   // (I - I_g)/(I_g (I - 1))
  std::array<double, kNumTypes> alpha_seller;  // (J - J_g)/(J_g (J - 1))
};

// Symmetric 4x4 covariance of the type estimators, type order cc,ib,is,tr.
struct CovarianceMatrix4 {
  std::array<std::array<double, kNumTypes>, kNumTypes> cov = {};

  double operator()(PairType a, PairType b) const {
    return cov[static_cast<int>(a)][static_cast<int>(b)];
  }
  double variance(PairType t) const { return (*this)(t, t); }
};

// Per-type variance-estimator output: the three plug-in components, the
// two small-sample corrections, and the combined estimate (raw and
// clamped at zero).
struct VarianceEstimate {
  std::array<double, kNumTypes> sigma_buyer = {};   // Psi-hat^B
  std::array<double, kNumTypes> sigma_seller = {};  // Psi-hat^S
  std::array<double, kNumTypes> sigma_inter = {};   // Psi-hat^BS
  std::array<double, kNumTypes> eta_buyer = {};
  std::array<double, kNumTypes> eta_seller = {};
  std::array<double, kNumTypes> combined_raw = {};
  std::array<double, kNumTypes> combined = {};  // max(raw, 0)

  double clamped(PairType t) const { return combined[static_cast<int>(t)]; }
  double raw(PairType t) const { return combined_raw[static_cast<int>(t)]; }
};

// All deviations, variances and pairwise terms, with the (I-1), (J-1),
// (I-1)(J-1) denominators. Requires I, J >= 2.
PopulationMoments population_moments(const PotentialOutcomeTable& potentials,
                                     const SmrdConfig& config);

// Exact finite-sample covariance of the four type estimators under the
// conjunctive design. Derived from the demeaned-indicator decomposition;
// validated against exhaustive enumeration.
CovarianceMatrix4 exact_covariance(const PopulationMoments& moments,
                                   const SmrdConfig& config);

// beta' * cov * beta.
double exact_estimand_variance(const CovarianceMatrix4& cov,
                               const EstimandSpec& spec);

// Unbiased per-type variance estimator from one realized assignment.
// Requires I_gamma, J_gamma >= 2 for every type.
VarianceEstimate variance_estimate(const std::vector<double>& observed,
                                   const TypeMatrix& types);

// Cauchy-Schwarz upper bound for Var(tau-hat(beta)), using clamped
// per-type estimates and absolute cross coefficients.
double conservative_variance(const VarianceEstimate& estimates,
                             const EstimandSpec& spec);

}  // namespace mrd
