#include "mrd/design.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mrd/prng.hpp"

namespace mrd {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::string bound_message(const char* what, int value, const char* bound) {
  std::ostringstream os;
  os << "invalid " << what << " = " << value << ": requires " << bound;
  return os.str();
}

}  // namespace

void SmrdConfig::validate() const {
  require(buyers > 0, bound_message("buyer count", buyers, "I > 0"));
  require(sellers > 0, bound_message("seller count", sellers, "J > 0"));
  require(treated_buyers > 1 && treated_buyers < buyers - 1,
          bound_message("treated-buyer count", treated_buyers,
                        "1 < I_T < I - 1"));
  require(treated_sellers > 1 && treated_sellers < sellers - 1,
          bound_message("treated-seller count", treated_sellers,
                        "1 < J_T < J - 1"));
}

void DesignSpec::validate() const {
  switch (kind) {
    case DesignKind::smrd:
      smrd.validate();
      return;
    case DesignKind::buyer_srd:
      require(rows > 0 && cols > 0, "rows and cols must be positive");
      require(treated_rows > 0 && treated_rows < rows,
              bound_message("treated-row count", treated_rows,
                            "0 < I_T < I"));
      return;
    case DesignKind::seller_srd:
      require(rows > 0 && cols > 0, "rows and cols must be positive");
      require(treated_cols > 0 && treated_cols < cols,
              bound_message("treated-col count", treated_cols,
                            "0 < J_T < J"));
      return;
    case DesignKind::crossover:
      require(rows > 0 && cols > 0, "rows and cols must be positive");
      require(treated_per_row > 0 && treated_per_row < cols,
              bound_message("per-row treated count", treated_per_row,
                            "0 < t < J"));
      if (balance == CrossoverBalance::double_balanced) {
        require((static_cast<long>(rows) * treated_per_row) % cols == 0,
                "doubly balanced crossover requires J | I*t");
      }
      return;
    case DesignKind::multigroup: {
      require(!buyer_groups.empty(), "multigroup needs buyer group sizes");
      require(seller_groups.size() == buyer_groups.size() + 1,
              "multigroup needs one more seller group than buyer groups");
      for (int g : buyer_groups) require(g > 0, "group sizes must be positive");
      for (int g : seller_groups)
        require(g > 0, "group sizes must be positive");
      const double frac = treated_fraction();
      require(frac > 0.0 && frac < 1.0,
              "multigroup thresholds give degenerate treated fraction");
      return;
    }
    case DesignKind::hybrid:
      require(rows > 0 && cols > 0, "rows and cols must be positive");
      require(group_a_cols > 0 && group_a_cols < cols,
              bound_message("seller split", group_a_cols, "0 < |A| < J"));
      require(treated_buyers_a > 0 && treated_buyers_a < rows,
              bound_message("treated buyers in A", treated_buyers_a,
                            "0 < I_T^A < I"));
      require(treated_cols_b > 0 && treated_cols_b < cols - group_a_cols,
              bound_message("treated sellers in B", treated_cols_b,
                            "0 < J_T^B < |B|"));
      return;
    case DesignKind::clustered: {
      require(rows > 0 && cols > 0, "rows and cols must be positive");
      require(group_a_rows > 0 && group_a_rows < rows,
              bound_message("buyer split", group_a_rows, "0 < |A| < I"));
      require(cluster_count > 1, "need at least two seller clusters");
      require(cols % cluster_count == 0,
              "clustered design requires equal-sized seller clusters");
      require(treated_clusters > 0 && treated_clusters < cluster_count,
              bound_message("treated clusters", treated_clusters,
                            "0 < k_T < K"));
      require(treated_cols_plain > 0 && treated_cols_plain < cols,
              bound_message("treated sellers in B", treated_cols_plain,
                            "0 < J_T^B < J"));
      return;
    }
  }
  throw ConfigError("unknown design kind");
}

double DesignSpec::treated_fraction() const {
  switch (kind) {
    case DesignKind::smrd:
      return static_cast<double>(smrd.treated_buyers) * smrd.treated_sellers /
             (static_cast<double>(smrd.buyers) * smrd.sellers);
    case DesignKind::buyer_srd:
      return static_cast<double>(treated_rows) / rows;
    case DesignKind::seller_srd:
      return static_cast<double>(treated_cols) / cols;
    case DesignKind::crossover:
      return static_cast<double>(treated_per_row) / cols;
    case DesignKind::multigroup: {
      // Buyer group k is treated in the last k+1 seller groups.
      const int total_rows =
          std::accumulate(buyer_groups.begin(), buyer_groups.end(), 0);
      const int total_cols =
          std::accumulate(seller_groups.begin(), seller_groups.end(), 0);
      long treated = 0;
      int tail = 0;
      for (std::size_t k = 0; k < buyer_groups.size(); ++k) {
        tail += seller_groups[seller_groups.size() - 1 - k];
        treated += static_cast<long>(buyer_groups[k]) * tail;
      }
      return static_cast<double>(treated) /
             (static_cast<double>(total_rows) * total_cols);
    }
    case DesignKind::hybrid: {
      const long treated =
          static_cast<long>(treated_buyers_a) * group_a_cols +
          static_cast<long>(rows) * treated_cols_b;
      return static_cast<double>(treated) /
             (static_cast<double>(rows) * cols);
    }
    case DesignKind::clustered: {
      const int cluster_size = cols / cluster_count;
      const long treated =
          static_cast<long>(group_a_rows) * treated_clusters * cluster_size +
          static_cast<long>(rows - group_a_rows) * treated_cols_plain;
      return static_cast<double>(treated) /
             (static_cast<double>(rows) * cols);
    }
  }
  return 0.0;
}

long Assignment::treated_count() const {
  long n = 0;
  for (auto c : cells) n += c;
  return n;
}

double Assignment::treated_fraction() const {
  return static_cast<double>(treated_count()) /
         (static_cast<double>(rows) * cols);
}

namespace {

Assignment from_factors(int rows, int cols,
                        std::vector<std::uint8_t> buyer,
                        std::vector<std::uint8_t> seller) {
  Assignment a;
  a.rows = rows;
  a.cols = cols;
  a.cells.assign(static_cast<std::size_t>(rows) * cols, 0);
  for (int i = 0; i < rows; ++i) {
    if (!buyer[i]) continue;
    for (int j = 0; j < cols; ++j) {
      if (seller[j]) a.at(i, j) = 1;
    }
  }
  a.buyer_factors = std::move(buyer);
  a.seller_factors = std::move(seller);
  return a;
}

Assignment sample_smrd(const SmrdConfig& cfg, std::uint64_t seed) {
  Rng buyer_rng(derive_seed(seed, 0));
  Rng seller_rng(derive_seed(seed, 1));
  auto buyer = sample_k_subset(cfg.buyers, cfg.treated_buyers, buyer_rng);
  auto seller = sample_k_subset(cfg.sellers, cfg.treated_sellers, seller_rng);
  return from_factors(cfg.buyers, cfg.sellers, std::move(buyer),
                      std::move(seller));
}

Assignment sample_buyer_srd(const DesignSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  auto buyer = sample_k_subset(spec.rows, spec.treated_rows, rng);
  Assignment a;
  a.rows = spec.rows;
  a.cols = spec.cols;
  a.cells.assign(static_cast<std::size_t>(a.rows) * a.cols, 0);
  for (int i = 0; i < a.rows; ++i) {
    if (!buyer[i]) continue;
    for (int j = 0; j < a.cols; ++j) a.at(i, j) = 1;
  }
  return a;
}

Assignment sample_seller_srd(const DesignSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 1));
  auto seller = sample_k_subset(spec.cols, spec.treated_cols, rng);
  Assignment a;
  a.rows = spec.rows;
  a.cols = spec.cols;
  a.cells.assign(static_cast<std::size_t>(a.rows) * a.cols, 0);
  for (int j = 0; j < a.cols; ++j) {
    if (!seller[j]) continue;
    for (int i = 0; i < a.rows; ++i) a.at(i, j) = 1;
  }
  return a;
}

Assignment sample_crossover(const DesignSpec& spec, std::uint64_t seed) {
  Assignment a;
  a.rows = spec.rows;
  a.cols = spec.cols;
  a.cells.assign(static_cast<std::size_t>(a.rows) * a.cols, 0);
  const int t = spec.treated_per_row;
  if (spec.balance == CrossoverBalance::row) {
    // Each row independently a random arrangement of t treated periods.
    for (int i = 0; i < a.rows; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      auto row = sample_k_subset(a.cols, t, rng);
      for (int j = 0; j < a.cols; ++j) a.at(i, j) = row[j];
    }
    return a;
  }
  // Doubly balanced: cyclic staircase start with exact margins, then random
  // 2x2 checkerboard swaps. The swap chain's stationary distribution is
  // uniform over the margin-fixed set; mixing depth is heuristic.
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < t; ++k) {
      a.at(i, (static_cast<long>(i) * t + k) % a.cols) = 1;
    }
  }
  Rng rng(derive_seed(seed, 0x5741505350ULL));
  const long swaps = 10L * a.rows * a.cols;
  for (long s = 0; s < swaps; ++s) {
    const int i1 = static_cast<int>(rng.next_below(a.rows));
    const int i2 = static_cast<int>(rng.next_below(a.rows));
    const int j1 = static_cast<int>(rng.next_below(a.cols));
    const int j2 = static_cast<int>(rng.next_below(a.cols));
    if (i1 == i2 || j1 == j2) continue;
    const auto w11 = a.at(i1, j1), w12 = a.at(i1, j2);
    const auto w21 = a.at(i2, j1), w22 = a.at(i2, j2);
    if (w11 == w22 && w12 == w21 && w11 != w12) {
      a.at(i1, j1) = w12;
      a.at(i1, j2) = w11;
      a.at(i2, j1) = w22;
      a.at(i2, j2) = w21;
    }
  }
  return a;
}

Assignment sample_multigroup(const DesignSpec& spec, std::uint64_t seed) {
  const int rows =
      std::accumulate(spec.buyer_groups.begin(), spec.buyer_groups.end(), 0);
  const int cols =
      std::accumulate(spec.seller_groups.begin(), spec.seller_groups.end(), 0);
  Rng buyer_rng(derive_seed(seed, 0));
  Rng seller_rng(derive_seed(seed, 1));
  const auto row_perm = sample_permutation(rows, buyer_rng);
  const auto col_perm = sample_permutation(cols, seller_rng);

  // Buyer group k is treated in the last k+1 seller groups (staircase).
  std::vector<int> row_group(rows), col_group(cols);
  {
    int pos = 0;
    for (std::size_t g = 0; g < spec.buyer_groups.size(); ++g) {
      for (int k = 0; k < spec.buyer_groups[g]; ++k)
        row_group[row_perm[pos++]] = static_cast<int>(g);
    }
    pos = 0;
    for (std::size_t g = 0; g < spec.seller_groups.size(); ++g) {
      for (int k = 0; k < spec.seller_groups[g]; ++k)
        col_group[col_perm[pos++]] = static_cast<int>(g);
    }
  }
  const int num_col_groups = static_cast<int>(spec.seller_groups.size());
  Assignment a;
  a.rows = rows;
  a.cols = cols;
  a.cells.assign(static_cast<std::size_t>(rows) * cols, 0);
  for (int i = 0; i < rows; ++i) {
    const int threshold = num_col_groups - 1 - row_group[i];
    for (int j = 0; j < cols; ++j) {
      if (col_group[j] >= threshold) a.at(i, j) = 1;
    }
  }
  return a;
}

Assignment sample_hybrid(const DesignSpec& spec, std::uint64_t seed) {
  Rng split_rng(derive_seed(seed, 0));
  Rng buyer_rng(derive_seed(seed, 1));
  Rng seller_rng(derive_seed(seed, 2));
  auto in_a = sample_k_subset(spec.cols, spec.group_a_cols, split_rng);
  auto treated_buyer =
      sample_k_subset(spec.rows, spec.treated_buyers_a, buyer_rng);

  std::vector<int> b_cols;
  for (int j = 0; j < spec.cols; ++j) {
    if (!in_a[j]) b_cols.push_back(j);
  }
  auto treated_b = sample_k_subset(static_cast<int>(b_cols.size()),
                                   spec.treated_cols_b, seller_rng);

  Assignment a;
  a.rows = spec.rows;
  a.cols = spec.cols;
  a.cells.assign(static_cast<std::size_t>(a.rows) * a.cols, 0);
  for (int i = 0; i < a.rows; ++i) {
    if (!treated_buyer[i]) continue;
    for (int j = 0; j < a.cols; ++j) {
      if (in_a[j]) a.at(i, j) = 1;
    }
  }
  for (std::size_t k = 0; k < b_cols.size(); ++k) {
    if (!treated_b[k]) continue;
    for (int i = 0; i < a.rows; ++i) a.at(i, b_cols[k]) = 1;
  }
  return a;
}

Assignment sample_clustered(const DesignSpec& spec, std::uint64_t seed) {
  Rng split_rng(derive_seed(seed, 0));
  Rng cluster_rng(derive_seed(seed, 1));
  Rng seller_rng(derive_seed(seed, 2));
  auto in_a = sample_k_subset(spec.rows, spec.group_a_rows, split_rng);
  auto treated_cluster =
      sample_k_subset(spec.cluster_count, spec.treated_clusters, cluster_rng);
  auto treated_plain =
      sample_k_subset(spec.cols, spec.treated_cols_plain, seller_rng);

  const int cluster_size = spec.cols / spec.cluster_count;
  Assignment a;
  a.rows = spec.rows;
  a.cols = spec.cols;
  a.cells.assign(static_cast<std::size_t>(a.rows) * a.cols, 0);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      if (in_a[i]) {
        if (treated_cluster[j / cluster_size]) a.at(i, j) = 1;
      } else {
        if (treated_plain[j]) a.at(i, j) = 1;
      }
    }
  }
  return a;
}

}  // namespace

Assignment sample_assignment(const DesignSpec& spec, std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case DesignKind::smrd:
      return sample_smrd(spec.smrd, seed);
    case DesignKind::buyer_srd:
      return sample_buyer_srd(spec, seed);
    case DesignKind::seller_srd:
      return sample_seller_srd(spec, seed);
    case DesignKind::crossover:
      return sample_crossover(spec, seed);
    case DesignKind::multigroup:
      return sample_multigroup(spec, seed);
    case DesignKind::hybrid:
      return sample_hybrid(spec, seed);
    case DesignKind::clustered:
      return sample_clustered(spec, seed);
  }
  throw ConfigError("unknown design kind");
}

TypeMatrix classify_types(const Assignment& assignment) {
  if (!assignment.buyer_factors || !assignment.seller_factors) {
    throw StructureError("classify_types requires factor vectors");
  }
  TypeMatrix t;
  t.rows = assignment.rows;
  t.cols = assignment.cols;
  t.buyer_factors = *assignment.buyer_factors;
  t.seller_factors = *assignment.seller_factors;
  return t;
}

std::array<std::vector<int>, kNumTypes> TypeMatrix::row_sets() const {
  std::array<std::vector<int>, kNumTypes> sets;
  for (int i = 0; i < rows; ++i) {
    if (buyer_factors[i]) {
      sets[static_cast<int>(PairType::ib)].push_back(i);
      sets[static_cast<int>(PairType::tr)].push_back(i);
    } else {
      sets[static_cast<int>(PairType::cc)].push_back(i);
      sets[static_cast<int>(PairType::is)].push_back(i);
    }
  }
  return sets;
}

std::array<std::vector<int>, kNumTypes> TypeMatrix::col_sets() const {
  std::array<std::vector<int>, kNumTypes> sets;
  for (int j = 0; j < cols; ++j) {
    if (seller_factors[j]) {
      sets[static_cast<int>(PairType::is)].push_back(j);
      sets[static_cast<int>(PairType::tr)].push_back(j);
    } else {
      sets[static_cast<int>(PairType::cc)].push_back(j);
      sets[static_cast<int>(PairType::ib)].push_back(j);
    }
  }
  return sets;
}

std::array<int, kNumTypes> TypeMatrix::row_counts() const {
  int treated = 0;
  for (auto b : buyer_factors) treated += b;
  const int control = rows - treated;
  return {control, treated, control, treated};  // cc, ib, is, tr
}

std::array<int, kNumTypes> TypeMatrix::col_counts() const {
  int treated = 0;
  for (auto s : seller_factors) treated += s;
  const int control = cols - treated;
  return {control, control, treated, treated};  // cc, ib, is, tr
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> infer_factors(
    const Assignment& assignment) {
  if (assignment.rows == 0 || assignment.cols == 0) {
    throw StructureError("cannot infer factors from an empty matrix");
  }
  std::vector<std::uint8_t> buyer(assignment.rows, 0);
  std::vector<std::uint8_t> seller(assignment.cols, 0);
  bool any = false;
  for (int i = 0; i < assignment.rows; ++i) {
    for (int j = 0; j < assignment.cols; ++j) {
      if (assignment.at(i, j)) {
        buyer[i] = 1;
        seller[j] = 1;
        any = true;
      }
    }
  }
  if (!any) {
    throw StructureError(
        "all-control matrix: factor vectors are not unique");
  }
  for (int i = 0; i < assignment.rows; ++i) {
    for (int j = 0; j < assignment.cols; ++j) {
      const std::uint8_t expected = buyer[i] && seller[j];
      if (assignment.at(i, j) != expected) {
        throw StructureError(
            "matrix is not a binary outer product of factor vectors");
      }
    }
  }
  return {std::move(buyer), std::move(seller)};
}

ConsistencyProfile consistency_profile(const Assignment& assignment) {
  ConsistencyProfile p;
  p.buyer_fractions.resize(assignment.rows);
  p.seller_fractions.assign(assignment.cols, 0.0);
  p.buyer_consistent.resize(assignment.rows);
  p.seller_consistent.resize(assignment.cols);
  long total = 0;
  for (int i = 0; i < assignment.rows; ++i) {
    int row_sum = 0;
    for (int j = 0; j < assignment.cols; ++j) {
      const int w = assignment.at(i, j);
      row_sum += w;
      p.seller_fractions[j] += w;
    }
    total += row_sum;
    p.buyer_fractions[i] =
        static_cast<double>(row_sum) / assignment.cols;
    p.buyer_consistent[i] = row_sum == 0 || row_sum == assignment.cols;
  }
  for (int j = 0; j < assignment.cols; ++j) {
    const double col_sum = p.seller_fractions[j];
    p.seller_fractions[j] = col_sum / assignment.rows;
    p.seller_consistent[j] = col_sum == 0 || col_sum == assignment.rows;
  }
  p.global_fraction =
      static_cast<double>(total) /
      (static_cast<double>(assignment.rows) * assignment.cols);
  return p;
}

MrdValidationReport validate_mrd(const DesignSpec& spec,
                                 const std::vector<Assignment>& samples) {
  MrdValidationReport report;
  if (samples.empty()) {
    report.message = "no samples";
    return report;
  }
  report.treated_fraction = spec.treated_fraction();
  const double expected = report.treated_fraction;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double frac = samples[k].treated_fraction();
    if (frac != expected || frac <= 0.0 || frac >= 1.0) {
      report.offending_index = static_cast<int>(k);
      std::ostringstream os;
      os << "sample " << k << " has treated fraction " << frac
         << ", expected " << expected << " in (0,1)";
      report.message = os.str();
      return report;
    }
  }
  report.valid = true;
  report.message = "all samples share treated fraction";
  return report;
}

}  // namespace mrd
