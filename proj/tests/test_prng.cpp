#include <set>

#include "doctest.h"
#include "mrd/prng.hpp"

using namespace mrd;

TEST_CASE("rng streams are deterministic") {
  Rng a(123), b(123);
  for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived seeds differ per stream") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(derive_seed(7, s));
  CHECK(seeds.size() == 100);
}

TEST_CASE("k-subset has exactly k members") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sel = sample_k_subset(17, 6, rng);
    int count = 0;
    for (auto b : sel) count += b;
    CHECK(count == 6);
    CHECK(sel.size() == 17);
  }
}

TEST_CASE("k-subset is roughly uniform over elements") {
  Rng rng(99);
  const int n = 10, k = 4, trials = 20000;
  std::vector<int> hits(n, 0);
  for (int t = 0; t < trials; ++t) {
    const auto sel = sample_k_subset(n, k, rng);
    for (int i = 0; i < n; ++i) hits[i] += sel[i];
  }
  // Each element is included with probability k/n = 0.4.
  for (int i = 0; i < n; ++i) {
    CHECK(hits[i] > trials * 0.37);
    CHECK(hits[i] < trials * 0.43);
  }
}

TEST_CASE("permutation is a bijection") {
  Rng rng(3);
  const auto p = sample_permutation(12, rng);
  std::set<int> seen(p.begin(), p.end());
  CHECK(seen.size() == 12);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 11);
}

TEST_CASE("gaussian stream has sane moments") {
  Rng rng(2024);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("next_below stays in range") {
  Rng rng(17);
  for (int t = 0; t < 1000; ++t) {
    CHECK(rng.next_below(7) < 7);
  }
}
