#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mrd/design.hpp"
#include "mrd/estimation.hpp"
#include "mrd/outcomes.hpp"
#include "mrd/variance.hpp"

namespace mrd {

// Fixed-width histogram; the last bin's upper edge is inclusive.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<long long> counts;

  int bins() const { return static_cast<int>(counts.size()); }
  double edge(int b) const {
    return lo + (hi - lo) * b / static_cast<double>(counts.size());
  }
};

Histogram make_histogram(const std::vector<double>& values, int bins = 50);

// Two-sided Kolmogorov distance between the sample and N(mean, variance).
double ks_statistic(std::vector<double> values, double mean, double variance);

struct EnumerateOptions {
  // Hard cap on C(I,I_T) * C(J,J_T); exceeding it throws instead of
  // running for hours.
  unsigned long long limit = 1'000'000;
  bool parallel = true;
  // Assignments processed per reduction block. Blocks are reduced in
  // order, so results do not depend on `parallel` or the thread count.
  int block = 4096;
};

// Exact design-distribution moments from a full sweep of the support.
// Per-preset entries follow EstimandSpec::presets() order: ate, spill_b,
// spill_s, direct.
struct EnumerationReport {
  unsigned long long num_assignments = 0;
  std::array<double, kNumTypes> mean_estimates = {};  // E[Yhat_g]
  // Cov(Yhat_g, Yhat_g') over the assignment distribution.
  std::array<std::array<double, kNumTypes>, kNumTypes> covariance = {};
  std::array<double, kNumTypes> mean_variance_estimate_raw = {};
  std::array<double, kNumTypes> mean_variance_estimate_clamped = {};
  std::array<double, kNumTypes> mean_estimand = {};      // E[tau-hat]
  std::array<double, kNumTypes> mean_conservative = {};  // E[bound]
};

EnumerationReport enumerate_smrd(const SmrdConfig& config,
                                 const PotentialOutcomeTable& potentials,
                                 const EnumerateOptions& options = {});

// One closed-form quantity checked against enumeration.
struct OracleCheck {
  std::string quantity;
  double expected = 0.0;
  double actual = 0.0;
  double abs_error = 0.0;
  bool pass = false;
};

struct OracleComparison {
  double tolerance = 0.0;
  bool all_pass = false;
  std::vector<OracleCheck> checks;
};

// Closed-form means, covariances and estimator expectations vs the
// enumeration sweep, one verdict per quantity.
OracleComparison oracle_compare(const EnumerationReport& report,
                                const PotentialOutcomeTable& potentials,
                                const SmrdConfig& config,
                                double tolerance = 1e-10);

struct McOptions {
  int replications = 10'000;
  std::uint64_t seed = 0;
  double level = 0.95;
  bool parallel = true;
  int histogram_bins = 50;
};

struct McTypeStats {
  double population_mean = 0.0;
  double exact_variance = 0.0;
  double mean_estimate = 0.0;
  double sample_variance = 0.0;
  double mean_variance_estimate = 0.0;  // E over reps of the clamped estimator
  double ks = 0.0;
  Histogram estimate_hist;
  Histogram variance_hist;
};

struct McEstimandStats {
  std::string name;
  double true_value = 0.0;
  double exact_variance = 0.0;
  double mean_estimate = 0.0;
  double sample_variance = 0.0;
  double mean_conservative_variance = 0.0;
  double coverage = 0.0;  // conservative z-interval at `level`
  double ks = 0.0;
  Histogram estimate_hist;
  Histogram variance_hist;
};

struct McReport {
  int replications = 0;
  std::uint64_t seed = 0;
  double level = 0.0;
  std::array<McTypeStats, kNumTypes> types;
  std::vector<McEstimandStats> estimands;
};

// Re-randomization study: fixed potential outcomes, `replications` fresh
// assignments with seeds derived per replication, so results are
// independent of threading. KS is taken against the exact normal
// reference N(truth, exact variance).
McReport rerandomization_study(const SmrdConfig& config,
                               const PotentialOutcomeTable& potentials,
                               const std::vector<EstimandSpec>& estimands,
                               const McOptions& options = {});

}  // namespace mrd
