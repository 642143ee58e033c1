#include <cmath>
#include <string>

#include "doctest.h"
#include "mrd/estimation.hpp"

using namespace mrd;

namespace {

// 4x4 instance with factors (0,0,1,1) x (0,0,1,1); cc block holds 2,3,4,5.
TypeMatrix half_split() {
  TypeMatrix t;
  t.rows = 4;
  t.cols = 4;
  t.buyer_factors = {0, 0, 1, 1};
  t.seller_factors = {0, 0, 1, 1};
  return t;
}

}  // namespace

TEST_CASE("type means average the matching blocks") {
  const auto types = half_split();
  std::vector<double> obs(16, 0.0);
  // cc block (rows 0-1, cols 0-1) = 2,3,4,5 -> mean 3.5.
  obs[0] = 2;
  obs[1] = 3;
  obs[4] = 4;
  obs[5] = 5;
  // tr block (rows 2-3, cols 2-3) = 10.
  obs[10] = obs[11] = obs[14] = obs[15] = 10;
  const auto means = type_mean_estimates(obs, types);
  CHECK(means.means[0] == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(means.means[1] == 0.0);
  CHECK(means.means[2] == 0.0);
  CHECK(means.means[3] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(means.row_counts[0] == 2);
  CHECK(means.col_counts[3] == 2);
}

TEST_CASE("per-type constants reproduce the preset estimands") {
  const auto types = half_split();
  const double constants[4] = {3.0, 2.55, 2.45, 5.0};
  std::vector<double> obs(16, 0.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      obs[i * 4 + j] = constants[static_cast<int>(types.type_of(i, j))];
    }
  }
  const auto means = type_mean_estimates(obs, types);
  CHECK(estimand_value(EstimandSpec::ate(), means) ==
        doctest::Approx(2.0).epsilon(1e-15));
  CHECK(estimand_value(EstimandSpec::spill_buyer(), means) ==
        doctest::Approx(-0.45).epsilon(1e-14));
  CHECK(estimand_value(EstimandSpec::spill_seller(), means) ==
        doctest::Approx(-0.55).epsilon(1e-14));
  CHECK(estimand_value(EstimandSpec::direct(), means) ==
        doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("a missing type is a hard error naming the type") {
  TypeMatrix t;
  t.rows = 2;
  t.cols = 2;
  t.buyer_factors = {1, 1};  // no control buyers -> cc and is absent
  t.seller_factors = {0, 1};
  std::vector<double> obs(4, 1.0);
  try {
    type_mean_estimates(obs, t);
    FAIL("expected EstimationError");
  } catch (const EstimationError& e) {
    CHECK(std::string(e.what()).find("cc") != std::string::npos);
  }
}

TEST_CASE("preset lookup by name") {
  CHECK(EstimandSpec::by_name("ate").beta ==
        std::array<double, 4>{-1, 0, 0, 1});
  CHECK(EstimandSpec::by_name("direct").beta ==
        std::array<double, 4>{1, -1, -1, 1});
  CHECK_THROWS_AS(EstimandSpec::by_name("nope"), EstimationError);
}

TEST_CASE("beta norm") {
  CHECK(EstimandSpec::ate().norm() == doctest::Approx(std::sqrt(2.0)));
  CHECK(EstimandSpec::direct().norm() == doctest::Approx(2.0));
}
