#pragma once

#include <string>

namespace mrd {

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF: Acklam's rational approximation refined by
// one Halley step, absolute error well below 1e-9 on (0,1).
double normal_quantile(double p);

enum class VarianceSource { exact, estimated_conservative };

struct ConfidenceInterval {
  double center = 0.0;
  double half_width = 0.0;
  double level = 0.0;
  VarianceSource source = VarianceSource::estimated_conservative;

  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
};

// z-interval: estimate +- z_{(1+level)/2} * sqrt(variance).
ConfidenceInterval confidence_interval(
    double estimate, double variance, double level,
    VarianceSource source = VarianceSource::estimated_conservative);

// Normal-approximation error diagnostic. The universal constant of the
// underlying bound is unknown, so the value supports relative comparisons
// between designs, not absolute guarantees.
struct CltDiagnostic {
  double balance_bound = 0.0;  // C_1
  double outcome_bound = 0.0;  // C_2
  int buyers = 0;
  int sellers = 0;
  double variance = 0.0;
  double beta_norm = 0.0;
  double delta = 0.0;
  bool degenerate = false;  // variance == 0
};

CltDiagnostic clt_diagnostic(double balance_bound, double outcome_bound,
                             int buyers, int sellers, double variance,
                             double beta_norm);

}  // namespace mrd
