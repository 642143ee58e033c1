#include "mrd/estimation.hpp"

#include <cmath>

#include "mrd/kahan.hpp"

namespace mrd {

EstimandSpec EstimandSpec::by_name(const std::string& name) {
  for (const auto& preset : presets()) {
    if (preset.name == name) return preset;
  }
  throw EstimationError("unknown estimand preset: " + name);
}

double EstimandSpec::norm() const {
  double s = 0.0;
  for (double b : beta) s += b * b;
  return std::sqrt(s);
}

TypeMeans population_type_means(const PotentialOutcomeTable& potentials) {
  TypeMeans result;
  const double cells =
      static_cast<double>(potentials.rows) * potentials.cols;
  for (int t = 0; t < kNumTypes; ++t) {
    KahanSum sum;
    for (double y : potentials.tables[t]) sum += y;
    result.means[t] = sum.value() / cells;
    result.row_counts[t] = potentials.rows;
    result.col_counts[t] = potentials.cols;
  }
  return result;
}

TypeMeans type_mean_estimates(const std::vector<double>& observed,
                              const TypeMatrix& types) {
  if (observed.size() !=
      static_cast<std::size_t>(types.rows) * types.cols) {
    throw StructureError("observed matrix and type matrix dimensions differ");
  }
  TypeMeans result;
  result.row_counts = types.row_counts();
  result.col_counts = types.col_counts();
  for (int t = 0; t < kNumTypes; ++t) {
    if (result.row_counts[t] == 0 || result.col_counts[t] == 0) {
      throw EstimationError(std::string("type ") +
                            type_name(static_cast<PairType>(t)) +
                            " has no observed cells");
    }
  }
  std::array<KahanSum, kNumTypes> sums;
  for (int i = 0; i < types.rows; ++i) {
    for (int j = 0; j < types.cols; ++j) {
      sums[static_cast<int>(types.type_of(i, j))] +=
          observed[static_cast<std::size_t>(i) * types.cols + j];
    }
  }
  for (int t = 0; t < kNumTypes; ++t) {
    result.means[t] =
        sums[t].value() /
        (static_cast<double>(result.row_counts[t]) * result.col_counts[t]);
  }
  return result;
}

double estimand_value(const EstimandSpec& spec, const TypeMeans& means) {
  double v = 0.0;
  for (int t = 0; t < kNumTypes; ++t) v += spec.beta[t] * means.means[t];
  return v;
}

}  // namespace mrd
