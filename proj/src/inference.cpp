#include "mrd/inference.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mrd/design.hpp"

namespace mrd {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Acklam's rational approximation to the probit function.
double acklam_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  static constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
           c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("normal quantile requires p in (0,1)");
  }
  double x = acklam_quantile(p);
  // One Halley refinement against the exact erfc-based CDF.
  const double e = normal_cdf(x) - p;
  const double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

ConfidenceInterval confidence_interval(double estimate, double variance,
                                       double level, VarianceSource source) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ConfigError("confidence level must lie in (0,1)");
  }
  if (variance < 0.0) {
    throw ConfigError("confidence interval requires nonnegative variance");
  }
  ConfidenceInterval ci;
  ci.center = estimate;
  ci.level = level;
  ci.source = source;
  ci.half_width = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(variance);
  return ci;
}

CltDiagnostic clt_diagnostic(double balance_bound, double outcome_bound,
                             int buyers, int sellers, double variance,
                             double beta_norm) {
  if (balance_bound <= 0.0 || outcome_bound <= 0.0 || buyers <= 0 ||
      sellers <= 0 || beta_norm <= 0.0 || variance < 0.0) {
    throw ConfigError("invalid diagnostic inputs");
  }
  CltDiagnostic d;
  d.balance_bound = balance_bound;
  d.outcome_bound = outcome_bound;
  d.buyers = buyers;
  d.sellers = sellers;
  d.variance = variance;
  d.beta_norm = beta_norm;
  const double size_term =
      balance_bound * outcome_bound * (1.0 / buyers + 1.0 / sellers);
  if (variance == 0.0) {
    d.delta = std::numeric_limits<double>::infinity();
    d.degenerate = true;
  } else {
    d.delta = size_term / (std::sqrt(variance) / beta_norm);
  }
  return d;
}

}  // namespace mrd
