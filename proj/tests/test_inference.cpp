#include <cmath>

#include "doctest.h"
#include "mrd/design.hpp"
#include "mrd/inference.hpp"

using namespace mrd;

TEST_CASE("normal quantile matches oracle values") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.75) == doctest::Approx(0.674490).epsilon(1e-6));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("quantile inverts the CDF to 1e-9 on a dense grid") {
  const double lo = 1e-6, hi = 1.0 - 1e-6;
  const int points = 10000;
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const double p = lo + (hi - lo) * k / (points - 1);
    worst = std::max(worst, std::abs(normal_cdf(normal_quantile(p)) - p));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("quantile rejects out-of-range probabilities") {
  CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
  CHECK_THROWS_AS(normal_quantile(1.0), ConfigError);
}

TEST_CASE("confidence interval examples") {
  const auto ci = confidence_interval(0.0, 1.0, 0.95);
  CHECK(ci.lower() == doctest::Approx(-1.959964).epsilon(1e-6));
  CHECK(ci.upper() == doctest::Approx(1.959964).epsilon(1e-6));

  const auto degenerate = confidence_interval(5.0, 0.0, 0.95);
  CHECK(degenerate.lower() == 5.0);
  CHECK(degenerate.upper() == 5.0);

  const auto median = confidence_interval(0.0, 4.0, 0.5);
  CHECK(median.lower() == doctest::Approx(-2 * 0.674490).epsilon(1e-6));
  CHECK(median.upper() == doctest::Approx(2 * 0.674490).epsilon(1e-6));

  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(confidence_interval(0.0, -1.0, 0.9), ConfigError);
}

TEST_CASE("delta diagnostic arithmetic") {
  // 2 * 1 * (1/100 + 1/100) / 0.1 = 0.4.
  const auto d = clt_diagnostic(2.0, 1.0, 100, 100, 0.01, 1.0);
  CHECK(d.delta == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_FALSE(d.degenerate);
}

TEST_CASE("delta halves when both sides double") {
  const auto d1 = clt_diagnostic(2.0, 1.0, 100, 100, 0.01, 1.0);
  const auto d2 = clt_diagnostic(2.0, 1.0, 200, 200, 0.01, 1.0);
  CHECK(d2.delta == doctest::Approx(0.5 * d1.delta).epsilon(1e-12));
}

TEST_CASE("delta is invariant under beta rescaling") {
  // Scaling beta by c scales variance by c^2 and the norm by c.
  const auto d1 = clt_diagnostic(2.0, 1.5, 80, 60, 0.04, 1.0);
  const auto d2 = clt_diagnostic(2.0, 1.5, 80, 60, 9.0 * 0.04, 3.0);
  CHECK(d1.delta == doctest::Approx(d2.delta).epsilon(1e-12));
}

TEST_CASE("zero variance flags a degenerate diagnostic") {
  const auto d = clt_diagnostic(2.0, 1.0, 10, 10, 0.0, 1.0);
  CHECK(d.degenerate);
  CHECK(std::isinf(d.delta));
}

TEST_CASE("diagnostic input validation") {
  CHECK_THROWS_AS(clt_diagnostic(0.0, 1.0, 10, 10, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(clt_diagnostic(1.0, 1.0, 0, 10, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(clt_diagnostic(1.0, 1.0, 10, 10, 1.0, 0.0), ConfigError);
}
