#include "mrd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrd/inference.hpp"
#include "mrd/kahan.hpp"
#include "mrd/prng.hpp"

#ifdef MRD_HAVE_OPENMP
#include <omp.h>
#endif

namespace mrd {

namespace {

constexpr unsigned long long kSaturated =
    std::numeric_limits<unsigned long long>::max();

unsigned long long sat_add(unsigned long long a, unsigned long long b) {
  return (a > kSaturated - b) ? kSaturated : a + b;
}

// Pascal's triangle with saturating addition; row n, entries 0..k_max.
std::vector<std::vector<unsigned long long>> binomial_table(int n, int k_max) {
  std::vector<std::vector<unsigned long long>> binom(
      n + 1, std::vector<unsigned long long>(k_max + 1, 0));
  for (int i = 0; i <= n; ++i) {
    binom[i][0] = 1;
    for (int k = 1; k <= std::min(i, k_max); ++k) {
      binom[i][k] = (k == i) ? 1ULL
                             : sat_add(binom[i - 1][k - 1], binom[i - 1][k]);
    }
  }
  return binom;
}

// Lexicographic unranking of a k-subset of {0..n-1} into an indicator.
std::vector<std::uint8_t> unrank_subset(
    int n, int k, unsigned long long rank,
    const std::vector<std::vector<unsigned long long>>& binom) {
  std::vector<std::uint8_t> indicator(n, 0);
  int next = 0;
  for (int pos = 0; pos < k; ++pos) {
    for (int c = next; c < n; ++c) {
      const unsigned long long below = binom[n - c - 1][k - pos - 1];
      if (rank < below) {
        indicator[c] = 1;
        next = c + 1;
        break;
      }
      rank -= below;
    }
  }
  return indicator;
}

struct PerAssignment {
  std::array<double, kNumTypes> estimate = {};
  std::array<double, kNumTypes> var_raw = {};
  std::array<double, kNumTypes> var_clamped = {};
  // Conservative bounds for the four presets, EstimandSpec::presets() order.
  std::array<double, kNumTypes> conservative = {};
};

PerAssignment assignment_stats(const std::vector<std::uint8_t>& buyer_factors,
                               const std::vector<std::uint8_t>& seller_factors,
                               const PotentialOutcomeTable& potentials,
                               const std::vector<EstimandSpec>& presets) {
  TypeMatrix types;
  types.rows = potentials.rows;
  types.cols = potentials.cols;
  types.buyer_factors = buyer_factors;
  types.seller_factors = seller_factors;
  const auto observed = realize_outcomes(potentials, types);
  const auto means = type_mean_estimates(observed, types);
  const auto var = variance_estimate(observed, types);
  PerAssignment out;
  out.estimate = means.means;
  out.var_raw = var.combined_raw;
  out.var_clamped = var.combined;
  for (std::size_t e = 0; e < presets.size() && e < out.conservative.size();
       ++e) {
    out.conservative[e] = conservative_variance(var, presets[e]);
  }
  return out;
}

double sample_variance(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  KahanSum s;
  for (double v : values) {
    const double d = v - mean;
    s += d * d;
  }
  return s.value() / (values.size() - 1.0);
}

double kahan_mean(const std::vector<double>& values) {
  KahanSum s;
  for (double v : values) s += v;
  return s.value() / static_cast<double>(values.size());
}

}  // namespace

Histogram make_histogram(const std::vector<double>& values, int bins) {
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(std::max(bins, 1)), 0);
  if (values.empty()) return h;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  h.lo = *lo_it;
  h.hi = *hi_it;
  if (h.hi == h.lo) {
    h.lo -= 0.5;
    h.hi += 0.5;
  }
  const double width = (h.hi - h.lo) / h.counts.size();
  for (double v : values) {
    int b = static_cast<int>((v - h.lo) / width);
    b = std::clamp(b, 0, h.bins() - 1);
    ++h.counts[b];
  }
  return h;
}

double ks_statistic(std::vector<double> values, double mean, double variance) {
  if (values.empty()) return 0.0;
  if (variance <= 0.0) {
    for (double v : values) {
      if (v != mean) return 1.0;
    }
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const double sd = std::sqrt(variance);
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = normal_cdf((values[i] - mean) / sd);
    d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
  }
  return d;
}

EnumerationReport enumerate_smrd(const SmrdConfig& config,
                                 const PotentialOutcomeTable& potentials,
                                 const EnumerateOptions& options) {
  config.validate();
  if (potentials.rows != config.buyers || potentials.cols != config.sellers) {
    throw ConfigError("design dimensions do not match the outcome table");
  }
  const int rows = config.buyers;
  const int cols = config.sellers;
  const auto binom = binomial_table(std::max(rows, cols),
                                    std::max(rows, cols));
  const unsigned long long nb = binom[rows][config.treated_buyers];
  const unsigned long long ns = binom[cols][config.treated_sellers];
  if (nb == kSaturated || ns == kSaturated || nb > options.limit / ns) {
    throw ConfigError("enumeration support exceeds the configured limit");
  }
  const unsigned long long total = nb * ns;

  // Accumulate centered estimates so second moments do not cancel.
  const auto pop = population_type_means(potentials);
  const auto presets = EstimandSpec::presets();

  const int block = std::max(options.block, 1);
  std::vector<PerAssignment> buffer(static_cast<std::size_t>(block));

  std::array<KahanSum, kNumTypes> sum_c;
  std::array<std::array<KahanSum, kNumTypes>, kNumTypes> sum_cc;
  std::array<KahanSum, kNumTypes> sum_vr, sum_vc, sum_cons;

  for (unsigned long long start = 0; start < total;
       start += static_cast<unsigned long long>(block)) {
    const long long count = static_cast<long long>(
        std::min<unsigned long long>(block, total - start));
#ifdef MRD_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (options.parallel)
#endif
    for (long long k = 0; k < count; ++k) {
      const unsigned long long idx = start + static_cast<unsigned long long>(k);
      const auto buyer =
          unrank_subset(rows, config.treated_buyers, idx / ns, binom);
      const auto seller =
          unrank_subset(cols, config.treated_sellers, idx % ns, binom);
      buffer[static_cast<std::size_t>(k)] =
          assignment_stats(buyer, seller, potentials, presets);
    }
    // Fixed-order reduction keeps the result thread-count independent.
    for (long long k = 0; k < count; ++k) {
      const auto& rec = buffer[static_cast<std::size_t>(k)];
      std::array<double, kNumTypes> centered;
      for (int t = 0; t < kNumTypes; ++t) {
        centered[t] = rec.estimate[t] - pop.means[t];
        sum_c[t] += centered[t];
        sum_vr[t] += rec.var_raw[t];
        sum_vc[t] += rec.var_clamped[t];
        sum_cons[t] += rec.conservative[t];
      }
      for (int a = 0; a < kNumTypes; ++a) {
        for (int b = a; b < kNumTypes; ++b) {
          sum_cc[a][b] += centered[a] * centered[b];
        }
      }
    }
  }

  EnumerationReport report;
  report.num_assignments = total;
  const double n = static_cast<double>(total);
  std::array<double, kNumTypes> mean_c;
  for (int t = 0; t < kNumTypes; ++t) {
    mean_c[t] = sum_c[t].value() / n;
    report.mean_estimates[t] = pop.means[t] + mean_c[t];
    report.mean_variance_estimate_raw[t] = sum_vr[t].value() / n;
    report.mean_variance_estimate_clamped[t] = sum_vc[t].value() / n;
    report.mean_conservative[t] = sum_cons[t].value() / n;
  }
  for (std::size_t e = 0; e < presets.size(); ++e) {
    double v = 0.0;
    for (int t = 0; t < kNumTypes; ++t) {
      v += presets[e].beta[t] * report.mean_estimates[t];
    }
    report.mean_estimand[e] = v;
  }
  for (int a = 0; a < kNumTypes; ++a) {
    for (int b = a; b < kNumTypes; ++b) {
      const double cov = sum_cc[a][b].value() / n - mean_c[a] * mean_c[b];
      report.covariance[a][b] = cov;
      report.covariance[b][a] = cov;
    }
  }
  return report;
}

OracleComparison oracle_compare(const EnumerationReport& report,
                                const PotentialOutcomeTable& potentials,
                                const SmrdConfig& config, double tolerance) {
  OracleComparison cmp;
  cmp.tolerance = tolerance;
  cmp.all_pass = true;

  auto push = [&](std::string quantity, double expected, double actual) {
    OracleCheck check;
    check.quantity = std::move(quantity);
    check.expected = expected;
    check.actual = actual;
    check.abs_error = std::abs(expected - actual);
    check.pass = check.abs_error <= tolerance;
    cmp.all_pass = cmp.all_pass && check.pass;
    cmp.checks.push_back(std::move(check));
  };

  const auto pop = population_type_means(potentials);
  const auto moments = population_moments(potentials, config);
  const auto cov = exact_covariance(moments, config);

  for (int t = 0; t < kNumTypes; ++t) {
    push(std::string("mean_") + type_name(static_cast<PairType>(t)),
         pop.means[t], report.mean_estimates[t]);
  }
  for (int a = 0; a < kNumTypes; ++a) {
    for (int b = a; b < kNumTypes; ++b) {
      push(std::string("cov_") + type_name(static_cast<PairType>(a)) + "_" +
               type_name(static_cast<PairType>(b)),
           cov.cov[a][b], report.covariance[a][b]);
    }
  }
  for (int t = 0; t < kNumTypes; ++t) {
    push(std::string("mean_varest_") + type_name(static_cast<PairType>(t)),
         cov.cov[t][t], report.mean_variance_estimate_raw[t]);
  }
  const auto presets = EstimandSpec::presets();
  for (std::size_t e = 0; e < presets.size(); ++e) {
    // One-sided check: the mean conservative bound must dominate the exact
    // estimand variance.
    OracleCheck check;
    check.quantity = "conservative_" + presets[e].name;
    check.expected = exact_estimand_variance(cov, presets[e]);
    check.actual = report.mean_conservative[e];
    check.abs_error = std::max(0.0, check.expected - check.actual);
    check.pass = check.abs_error <= tolerance;
    cmp.all_pass = cmp.all_pass && check.pass;
    cmp.checks.push_back(std::move(check));
  }
  return cmp;
}

McReport rerandomization_study(const SmrdConfig& config,
                               const PotentialOutcomeTable& potentials,
                               const std::vector<EstimandSpec>& estimands,
                               const McOptions& options) {
  config.validate();
  if (potentials.rows != config.buyers || potentials.cols != config.sellers) {
    throw ConfigError("design dimensions do not match the outcome table");
  }
  if (options.replications < 2) {
    throw ConfigError("study requires at least two replications");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw ConfigError("confidence level must lie in (0,1)");
  }

  const int reps = options.replications;
  const int num_est = static_cast<int>(estimands.size());

  DesignSpec spec;
  spec.kind = DesignKind::smrd;
  spec.smrd = config;

  std::vector<std::array<double, kNumTypes>> type_draws(
      static_cast<std::size_t>(reps));
  std::vector<std::array<double, kNumTypes>> varest_draws(
      static_cast<std::size_t>(reps));
  std::vector<double> est_draws(static_cast<std::size_t>(reps) * num_est);
  std::vector<double> cons_draws(static_cast<std::size_t>(reps) * num_est);

#ifdef MRD_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 8) if (options.parallel)
#endif
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t rep_seed =
        derive_seed(options.seed, static_cast<std::uint64_t>(r));
    const auto assignment = sample_assignment(spec, rep_seed);
    const auto types = classify_types(assignment);
    const auto observed = realize_outcomes(potentials, types);
    const auto means = type_mean_estimates(observed, types);
    const auto var = variance_estimate(observed, types);
    type_draws[r] = means.means;
    varest_draws[r] = var.combined;
    for (int e = 0; e < num_est; ++e) {
      est_draws[static_cast<std::size_t>(r) * num_est + e] =
          estimand_value(estimands[e], means);
      cons_draws[static_cast<std::size_t>(r) * num_est + e] =
          conservative_variance(var, estimands[e]);
    }
  }

  const auto pop = population_type_means(potentials);
  const auto moments = population_moments(potentials, config);
  const auto cov = exact_covariance(moments, config);
  const double z = normal_quantile(0.5 * (1.0 + options.level));

  McReport report;
  report.replications = reps;
  report.seed = options.seed;
  report.level = options.level;

  std::vector<double> column(static_cast<std::size_t>(reps));
  for (int t = 0; t < kNumTypes; ++t) {
    auto& stats = report.types[t];
    stats.population_mean = pop.means[t];
    stats.exact_variance = cov.cov[t][t];
    for (int r = 0; r < reps; ++r) column[r] = type_draws[r][t];
    stats.mean_estimate = kahan_mean(column);
    stats.sample_variance = sample_variance(column, stats.mean_estimate);
    stats.ks = ks_statistic(column, stats.population_mean,
                            stats.exact_variance);
    stats.estimate_hist = make_histogram(column, options.histogram_bins);
    for (int r = 0; r < reps; ++r) column[r] = varest_draws[r][t];
    stats.mean_variance_estimate = kahan_mean(column);
    stats.variance_hist = make_histogram(column, options.histogram_bins);
  }

  for (int e = 0; e < num_est; ++e) {
    McEstimandStats stats;
    stats.name = estimands[e].name;
    stats.true_value = estimand_value(estimands[e], pop);
    stats.exact_variance = exact_estimand_variance(cov, estimands[e]);
    for (int r = 0; r < reps; ++r) {
      column[r] = est_draws[static_cast<std::size_t>(r) * num_est + e];
    }
    stats.mean_estimate = kahan_mean(column);
    stats.sample_variance = sample_variance(column, stats.mean_estimate);
    stats.ks = ks_statistic(column, stats.true_value, stats.exact_variance);
    stats.estimate_hist = make_histogram(column, options.histogram_bins);

    long long covered = 0;
    KahanSum cons_sum;
    for (int r = 0; r < reps; ++r) {
      const double value = est_draws[static_cast<std::size_t>(r) * num_est + e];
      const double cv = cons_draws[static_cast<std::size_t>(r) * num_est + e];
      cons_sum += cv;
      if (std::abs(value - stats.true_value) <= z * std::sqrt(cv)) ++covered;
      column[r] = cv;
    }
    stats.mean_conservative_variance = cons_sum.value() / reps;
    stats.coverage = static_cast<double>(covered) / reps;
    stats.variance_hist = make_histogram(column, options.histogram_bins);
    report.estimands.push_back(std::move(stats));
  }
  return report;
}

}  // namespace mrd
