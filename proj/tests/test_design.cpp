#include "doctest.h"
#include "mrd/design.hpp"

using namespace mrd;

namespace {

DesignSpec smrd_spec(int rows, int cols, int tb, int ts) {
  DesignSpec spec;
  spec.kind = DesignKind::smrd;
  spec.smrd = {rows, cols, tb, ts};
  return spec;
}

}  // namespace

TEST_CASE("smrd validation enforces interior treated counts") {
  CHECK_THROWS_AS(smrd_spec(4, 8, 1, 4).validate(), ConfigError);
  CHECK_THROWS_AS(smrd_spec(4, 8, 3, 4).validate(), ConfigError);
  CHECK_THROWS_AS(smrd_spec(6, 8, 2, 7).validate(), ConfigError);
  CHECK_NOTHROW(smrd_spec(6, 8, 2, 4).validate());
}

TEST_CASE("smrd sample is a product block with exact margins") {
  const auto a = sample_assignment(smrd_spec(6, 9, 3, 4), 42);
  CHECK(a.rows == 6);
  CHECK(a.cols == 9);
  CHECK(a.treated_count() == 3 * 4);
  REQUIRE(a.buyer_factors.has_value());
  REQUIRE(a.seller_factors.has_value());
  int tb = 0, ts = 0;
  for (auto b : *a.buyer_factors) tb += b;
  for (auto s : *a.seller_factors) ts += s;
  CHECK(tb == 3);
  CHECK(ts == 4);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      CHECK(a.at(i, j) ==
            ((*a.buyer_factors)[i] && (*a.seller_factors)[j] ? 1 : 0));
    }
  }
}

TEST_CASE("smrd sampling is deterministic in the seed") {
  const auto a = sample_assignment(smrd_spec(8, 7, 3, 3), 9);
  const auto b = sample_assignment(smrd_spec(8, 7, 3, 3), 9);
  const auto c = sample_assignment(smrd_spec(8, 7, 3, 3), 10);
  CHECK(a.cells == b.cells);
  CHECK(a.cells != c.cells);
}

TEST_CASE("infer_factors recovers the generator's factors") {
  const auto a = sample_assignment(smrd_spec(5, 6, 2, 3), 1);
  const auto [buyer, seller] = infer_factors(a);
  CHECK(buyer == *a.buyer_factors);
  CHECK(seller == *a.seller_factors);
}

TEST_CASE("infer_factors rejects non-product matrices") {
  Assignment a;
  a.rows = 2;
  a.cols = 2;
  a.cells = {1, 0, 0, 1};
  CHECK_THROWS_AS(infer_factors(a), StructureError);
  a.cells = {0, 0, 0, 0};
  CHECK_THROWS_AS(infer_factors(a), StructureError);
}

TEST_CASE("classify_types matches the conjunctive rule") {
  const auto a = sample_assignment(smrd_spec(6, 6, 2, 2), 77);
  const auto t = classify_types(a);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const bool wb = (*a.buyer_factors)[i];
      const bool ws = (*a.seller_factors)[j];
      const PairType expected = wb ? (ws ? PairType::tr : PairType::ib)
                                   : (ws ? PairType::is : PairType::cc);
      CHECK(t.type_of(i, j) == expected);
    }
  }
  const auto rc = t.row_counts();
  const auto cc = t.col_counts();
  CHECK(rc[0] == rc[2]);  // I_cc = I_is
  CHECK(rc[1] == rc[3]);  // I_ib = I_tr
  CHECK(cc[0] == cc[1]);  // J_cc = J_ib
  CHECK(cc[2] == cc[3]);  // J_is = J_tr
}

TEST_CASE("row-balanced crossover fixes every row margin") {
  DesignSpec spec;
  spec.kind = DesignKind::crossover;
  spec.rows = 6;
  spec.cols = 8;
  spec.treated_per_row = 4;
  const auto a = sample_assignment(spec, 13);
  for (int i = 0; i < a.rows; ++i) {
    int row_sum = 0;
    for (int j = 0; j < a.cols; ++j) row_sum += a.at(i, j);
    CHECK(row_sum == 4);
  }
}

TEST_CASE("doubly balanced crossover fixes both margins") {
  DesignSpec spec;
  spec.kind = DesignKind::crossover;
  spec.rows = 6;
  spec.cols = 8;
  spec.treated_per_row = 4;
  spec.balance = CrossoverBalance::double_balanced;
  const auto a = sample_assignment(spec, 21);
  for (int i = 0; i < a.rows; ++i) {
    int row_sum = 0;
    for (int j = 0; j < a.cols; ++j) row_sum += a.at(i, j);
    CHECK(row_sum == 4);
  }
  for (int j = 0; j < a.cols; ++j) {
    int col_sum = 0;
    for (int i = 0; i < a.rows; ++i) col_sum += a.at(i, j);
    CHECK(col_sum == 3);  // I*t/J = 6*4/8
  }
}

TEST_CASE("doubly balanced crossover needs divisible margins") {
  DesignSpec spec;
  spec.kind = DesignKind::crossover;
  spec.rows = 5;
  spec.cols = 8;
  spec.treated_per_row = 3;
  spec.balance = CrossoverBalance::double_balanced;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("multigroup staircase hits its fixed fraction") {
  DesignSpec spec;
  spec.kind = DesignKind::multigroup;
  spec.buyer_groups = {3, 3};
  spec.seller_groups = {3, 3, 3};
  const double expected = spec.treated_fraction();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = sample_assignment(spec, seed);
    CHECK(a.treated_fraction() == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("hybrid and clustered designs have fixed fractions") {
  DesignSpec hybrid;
  hybrid.kind = DesignKind::hybrid;
  hybrid.rows = 8;
  hybrid.cols = 10;
  hybrid.group_a_cols = 4;
  hybrid.treated_buyers_a = 3;
  hybrid.treated_cols_b = 2;

  DesignSpec clustered;
  clustered.kind = DesignKind::clustered;
  clustered.rows = 9;
  clustered.cols = 12;
  clustered.group_a_rows = 4;
  clustered.cluster_count = 4;
  clustered.treated_clusters = 2;
  clustered.treated_cols_plain = 5;

  for (const auto& spec : {hybrid, clustered}) {
    std::vector<Assignment> samples;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      samples.push_back(sample_assignment(spec, seed));
    }
    const auto report = validate_mrd(spec, samples);
    CHECK(report.valid);
    CHECK(report.offending_index == -1);
  }
}

TEST_CASE("validate_mrd flags a corrupted sample") {
  const auto spec = smrd_spec(6, 6, 2, 2);
  std::vector<Assignment> samples;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    samples.push_back(sample_assignment(spec, seed));
  }
  samples[2].cells[0] ^= 1;
  const auto report = validate_mrd(spec, samples);
  CHECK_FALSE(report.valid);
  CHECK(report.offending_index == 2);
}

TEST_CASE("consistency profile separates smrd from crossover") {
  const auto smrd = sample_assignment(smrd_spec(6, 6, 2, 2), 3);
  const auto p1 = consistency_profile(smrd);
  // Treated buyers see a mixed row; control buyers see an all-zero row.
  for (int i = 0; i < smrd.rows; ++i) {
    CHECK(p1.buyer_consistent[i] == !(*smrd.buyer_factors)[i]);
  }

  DesignSpec srd;
  srd.kind = DesignKind::buyer_srd;
  srd.rows = 6;
  srd.cols = 6;
  srd.treated_rows = 2;
  const auto p2 = consistency_profile(sample_assignment(srd, 3));
  for (bool c : p2.buyer_consistent) CHECK(c);
}
