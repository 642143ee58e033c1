#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "mrd/design.hpp"
#include "mrd/report.hpp"

using namespace mrd;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("mrd_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

LongOutcomes sample_outcomes() {
  LongOutcomes data;
  data.types.rows = 4;
  data.types.cols = 4;
  data.types.buyer_factors = {0, 0, 1, 1};
  data.types.seller_factors = {0, 1, 0, 1};
  for (int i = 0; i < 4; ++i) data.buyer_ids.push_back("b" + std::to_string(i));
  for (int j = 0; j < 4; ++j) data.seller_ids.push_back("s" + std::to_string(j));
  data.observed.resize(16);
  for (int k = 0; k < 16; ++k) data.observed[k] = 0.25 * k - 1.0;
  return data;
}

}  // namespace

TEST_CASE("assignment csv round-trips through infer_factors") {
  TempDir dir;
  DesignSpec spec;
  spec.kind = DesignKind::smrd;
  spec.smrd = {5, 7, 2, 3};
  const auto a = sample_assignment(spec, 7);
  const auto path = dir.file("assignment.csv");
  write_assignment_csv(a, path);
  const auto b = read_assignment_csv(path);
  CHECK(b.rows == a.rows);
  CHECK(b.cols == a.cols);
  CHECK(b.cells == a.cells);
  const auto [buyer, seller] = infer_factors(b);
  CHECK(buyer == *a.buyer_factors);
  CHECK(seller == *a.seller_factors);
}

TEST_CASE("long outcomes csv round-trips") {
  TempDir dir;
  const auto data = sample_outcomes();
  const auto path = dir.file("outcomes.csv");
  write_long_outcomes_csv(data, path);
  const auto back = read_long_outcomes_csv(path);
  CHECK(back.types.rows == 4);
  CHECK(back.types.buyer_factors == data.types.buyer_factors);
  CHECK(back.types.seller_factors == data.types.seller_factors);
  CHECK(back.observed == data.observed);
  CHECK(back.buyer_ids == data.buyer_ids);
  CHECK(back.seller_ids == data.seller_ids);
}

TEST_CASE("inconsistent buyer factors are rejected with the line number") {
  TempDir dir;
  const auto path = dir.file("bad.csv");
  write_text_file(path,
                  "buyer_id,seller_id,w_buyer,w_seller,outcome\n"
                  "b1,s1,0,0,1.0\n"
                  "b1,s2,1,1,2.0\n");
  try {
    read_long_outcomes_csv(path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string what = e.what();
    CHECK(what.find("inconsistent buyer factor") != std::string::npos);
    CHECK(what.find("line 3") != std::string::npos);
  }
}

TEST_CASE("missing pairs are rejected") {
  TempDir dir;
  const auto path = dir.file("missing.csv");
  write_text_file(path,
                  "buyer_id,seller_id,w_buyer,w_seller,outcome\n"
                  "b1,s1,0,0,1.0\n"
                  "b1,s2,0,1,2.0\n"
                  "b2,s1,1,0,3.0\n");
  try {
    read_long_outcomes_csv(path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing pair") != std::string::npos);
  }
}

TEST_CASE("duplicate pairs are rejected") {
  TempDir dir;
  const auto path = dir.file("dup.csv");
  write_text_file(path,
                  "buyer_id,seller_id,w_buyer,w_seller,outcome\n"
                  "b1,s1,0,0,1.0\n"
                  "b1,s1,0,0,1.5\n");
  CHECK_THROWS_AS(read_long_outcomes_csv(path), IoError);
}

TEST_CASE("analysis on constant outcomes is degenerate") {
  auto data = sample_outcomes();
  for (auto& y : data.observed) y = 3.0;
  const auto report = analyze(data, EstimandSpec::presets(), 0.95);
  for (int t = 0; t < kNumTypes; ++t) {
    CHECK(report.type_means.means[t] == 3.0);
    CHECK(report.variance.combined[t] == 0.0);
  }
  for (const auto& est : report.estimands) {
    CHECK(est.estimate == 0.0);
    CHECK(est.ci.lower() == est.ci.upper());
    CHECK(est.diagnostic.degenerate);
  }
}

TEST_CASE("analysis report json round-trips losslessly") {
  auto data = sample_outcomes();
  auto report = analyze(data, EstimandSpec::presets(), 0.9);
  report.input_path = "outcomes.csv";
  report.input_hash = "0123456789abcdef";
  const std::string text = to_json(report);
  const auto parsed = analysis_report_from_json(text);
  CHECK(to_json(parsed) == text);
}

TEST_CASE("unknown json fields are rejected") {
  auto data = sample_outcomes();
  auto report = analyze(data, {EstimandSpec::ate()}, 0.95);
  std::string text = to_json(report);
  const auto pos = text.find("\"level\"");
  REQUIRE(pos != std::string::npos);
  text.insert(pos, "\"extra\": 1,\n  ");
  CHECK_THROWS_AS(analysis_report_from_json(text), IoError);
}

TEST_CASE("histogram csv lists 50 bins") {
  TempDir dir;
  Histogram h;
  h.lo = 0.0;
  h.hi = 1.0;
  h.counts.assign(50, 2);
  const auto path = dir.file("hist.csv");
  write_histogram_csv(h, path);
  const auto text = read_text_file(path);
  CHECK(text.rfind("bin_lo,bin_hi,count\n", 0) == 0);
  int lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 51);
}

TEST_CASE("file hash is stable and content-sensitive") {
  TempDir dir;
  const auto path = dir.file("hash.txt");
  write_text_file(path, "abc");
  const auto h1 = fnv1a_file_hash(path);
  CHECK(h1 == fnv1a_file_hash(path));
  CHECK(h1.size() == 16);
  write_text_file(path, "abd");
  CHECK(h1 != fnv1a_file_hash(path));
}
