#pragma once

#include <array>
#include <string>
#include <vector>

#include "mrd/design.hpp"
#include "mrd/outcomes.hpp"

namespace mrd {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear estimand tau(beta) = sum_gamma beta_gamma * mean_gamma, with the
// four standard presets.
struct EstimandSpec {
  std::array<double, kNumTypes> beta = {0, 0, 0, 0};  // cc, ib, is, tr
  std::string name;

  static EstimandSpec ate() { return {{-1, 0, 0, 1}, "ate"}; }
  static EstimandSpec spill_buyer() { return {{-1, 1, 0, 0}, "spill_b"}; }
  static EstimandSpec spill_seller() { return {{-1, 0, 1, 0}, "spill_s"}; }
  static EstimandSpec direct() { return {{1, -1, -1, 1}, "direct"}; }
  static std::vector<EstimandSpec> presets() {
    return {ate(), spill_buyer(), spill_seller(), direct()};
  }
  // Resolves a preset name, or throws.
  static EstimandSpec by_name(const std::string& name);

  double norm() const;
};

// Four per-type means plus the row/column counts they were computed over.
struct TypeMeans {
  std::array<double, kNumTypes> means = {0, 0, 0, 0};
  std::array<int, kNumTypes> row_counts = {0, 0, 0, 0};
  std::array<int, kNumTypes> col_counts = {0, 0, 0, 0};

  double mean(PairType t) const { return means[static_cast<int>(t)]; }
};

// Population averages: full I*J average of each potential-outcome table.
TypeMeans population_type_means(const PotentialOutcomeTable& potentials);

// Realized averages over the cells labeled with each type. Throws if a
// type has no cells.
TypeMeans type_mean_estimates(const std::vector<double>& observed,
                              const TypeMatrix& types);

// Dot product beta . means; identical for population and sample means.
double estimand_value(const EstimandSpec& spec, const TypeMeans& means);

}  // namespace mrd
