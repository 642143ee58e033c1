#include <cmath>

#include "doctest.h"
#include "mrd/harness.hpp"
#include "mrd/prng.hpp"
#include "mrd/report.hpp"

using namespace mrd;

namespace {

PotentialOutcomeTable random_table(int rows, int cols, std::uint64_t seed) {
  auto t = make_potential_table(rows, cols);
  Rng rng(seed);
  for (auto& table : t.tables) {
    for (auto& y : table) y = -5.0 + 10.0 * rng.next_double();
  }
  return t;
}

}  // namespace

TEST_CASE("enumeration sweeps C(I,I_T)*C(J,J_T) assignments") {
  const SmrdConfig cfg{4, 4, 2, 2};
  const auto report = enumerate_smrd(cfg, random_table(4, 4, 1));
  CHECK(report.num_assignments == 36);  // C(4,2)^2
}

TEST_CASE("enumeration refuses oversized supports") {
  const SmrdConfig cfg{30, 30, 15, 15};
  CHECK_THROWS_AS(enumerate_smrd(cfg, random_table(30, 30, 2)), ConfigError);
}

TEST_CASE("enumeration is identical with and without parallelism") {
  const SmrdConfig cfg{5, 6, 2, 3};
  const auto t = random_table(5, 6, 9);
  EnumerateOptions serial;
  serial.parallel = false;
  EnumerateOptions parallel;
  parallel.parallel = true;
  parallel.block = 17;  // awkward block size on purpose
  const auto a = enumerate_smrd(cfg, t, serial);
  const auto b = enumerate_smrd(cfg, t, parallel);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("oracle comparison passes on a random instance") {
  const SmrdConfig cfg{4, 5, 2, 2};
  const auto t = random_table(4, 5, 33);
  const auto report = enumerate_smrd(cfg, t);
  const auto cmp = oracle_compare(report, t, cfg, 1e-10);
  CHECK(cmp.all_pass);
  CHECK(cmp.checks.size() == 4 + 10 + 4 + 4);
}

TEST_CASE("oracle comparison names a corrupted covariance entry") {
  const SmrdConfig cfg{4, 4, 2, 2};
  const auto t = random_table(4, 4, 5);
  auto report = enumerate_smrd(cfg, t);
  report.covariance[2][0] += 1e-3;  // corrupt Cov(is, cc)
  report.covariance[0][2] += 1e-3;
  const auto cmp = oracle_compare(report, t, cfg, 1e-10);
  CHECK_FALSE(cmp.all_pass);
  bool found = false;
  for (const auto& check : cmp.checks) {
    if (!check.pass) {
      CHECK(check.quantity == "cov_cc_is");
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("histogram counts sum to the draw count") {
  std::vector<double> values;
  Rng rng(8);
  for (int k = 0; k < 1000; ++k) values.push_back(rng.next_gaussian());
  const auto h = make_histogram(values);
  CHECK(h.bins() == 50);
  long long total = 0;
  for (auto c : h.counts) total += c;
  CHECK(total == 1000);
  CHECK(h.lo <= h.hi);
}

TEST_CASE("ks statistic separates normal from shifted draws") {
  std::vector<double> values;
  Rng rng(12);
  for (int k = 0; k < 5000; ++k) values.push_back(rng.next_gaussian());
  CHECK(ks_statistic(values, 0.0, 1.0) < 0.03);
  CHECK(ks_statistic(values, 3.0, 1.0) > 0.5);
}

TEST_CASE("monte carlo study is deterministic across thread counts") {
  const SmrdConfig cfg{10, 8, 4, 3};
  const auto t = random_table(10, 8, 77);
  McOptions serial;
  serial.replications = 10;
  serial.seed = 123;
  serial.parallel = false;
  McOptions parallel = serial;
  parallel.parallel = true;
  const auto a =
      rerandomization_study(cfg, t, EstimandSpec::presets(), serial);
  const auto b =
      rerandomization_study(cfg, t, EstimandSpec::presets(), parallel);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("constant potentials give degenerate draws and full coverage") {
  const SmrdConfig cfg{8, 8, 3, 3};
  auto t = make_potential_table(8, 8);
  for (auto& table : t.tables) {
    for (auto& y : table) y = 2.0;
  }
  McOptions options;
  options.replications = 50;
  const auto report =
      rerandomization_study(cfg, t, EstimandSpec::presets(), options);
  for (int type = 0; type < kNumTypes; ++type) {
    CHECK(report.types[type].sample_variance == 0.0);
    CHECK(report.types[type].mean_variance_estimate == 0.0);
  }
  for (const auto& est : report.estimands) {
    CHECK(est.true_value == 0.0);
    CHECK(est.coverage == 1.0);
  }
}

TEST_CASE("mc estimates concentrate near the population values") {
  const SmrdConfig cfg{20, 16, 8, 7};
  const auto t = random_table(20, 16, 4);
  McOptions options;
  options.replications = 2000;
  options.seed = 31;
  const auto report =
      rerandomization_study(cfg, t, EstimandSpec::presets(), options);
  for (int type = 0; type < kNumTypes; ++type) {
    const auto& s = report.types[type];
    const double se = std::sqrt(s.exact_variance / options.replications);
    CHECK(std::abs(s.mean_estimate - s.population_mean) < 5 * se);
    CHECK(s.sample_variance ==
          doctest::Approx(s.exact_variance).epsilon(0.15));
  }
}
