#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrd {

// Errors raised by configuration and structural validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pair types induced by the conjunctive buyer/seller factor assignment:
// consistent control, inconsistent-buyer control, inconsistent-seller
// control, treated. Order is fixed and used for every 4-vector in the lib.
enum class PairType : int { cc = 0, ib = 1, is = 2, tr = 3 };

inline constexpr int kNumTypes = 4;
inline constexpr std::array<PairType, 4> kAllTypes = {
    PairType::cc, PairType::ib, PairType::is, PairType::tr};

inline const char* type_name(PairType t) {
  static constexpr const char* names[4] = {"cc", "ib", "is", "tr"};
  return names[static_cast<int>(t)];
}

// Conjunctive two-sided design: I buyers, J sellers, fixed treated counts
// on each side. Requires 1 < I_T < I-1 and 1 < J_T < J-1 so that every
// type keeps at least two rows and two columns.
struct SmrdConfig {
  int buyers = 0;        // I
  int sellers = 0;       // J
  int treated_buyers = 0;   // I_T
  int treated_sellers = 0;  // J_T

  int control_buyers() const { return buyers - treated_buyers; }
  int control_sellers() const { return sellers - treated_sellers; }
  double buyer_fraction() const {
    return static_cast<double>(treated_buyers) / buyers;
  }
  double seller_fraction() const {
    return static_cast<double>(treated_sellers) / sellers;
  }

  void validate() const;
};

enum class DesignKind {
  smrd,
  buyer_srd,
  seller_srd,
  crossover,
  multigroup,
  hybrid,
  clustered,
};

enum class CrossoverBalance { row, double_balanced };

// One configuration object covering every supported design. Only the
// fields relevant to `kind` are read.
struct DesignSpec {
  DesignKind kind = DesignKind::smrd;

  SmrdConfig smrd;  // smrd

  int rows = 0;  // all other kinds
  int cols = 0;

  int treated_rows = 0;  // buyer_srd
  int treated_cols = 0;  // seller_srd

  int treated_per_row = 0;  // crossover
  CrossoverBalance balance = CrossoverBalance::row;

  std::vector<int> buyer_groups;   // multigroup: sizes, length G
  std::vector<int> seller_groups;  // multigroup: sizes, length G+1

  int group_a_cols = 0;        // hybrid: seller split |A|
  int treated_buyers_a = 0;    // hybrid: buyer-SRD treated count on A
  int treated_cols_b = 0;      // hybrid: seller-SRD treated count on B

  int group_a_rows = 0;      // clustered: buyer split |A|
  int cluster_count = 0;     // clustered: equal-sized seller clusters
  int treated_clusters = 0;  // clustered: treated clusters in group A
  int treated_cols_plain = 0;  // clustered: seller-SRD treated count in B

  void validate() const;
  // Fraction of treated pairs, identical for every assignment the spec
  // can emit.
  double treated_fraction() const;
};

// An I x J binary treatment matrix; factor vectors are present when the
// matrix is the conjunctive product of per-buyer and per-seller labels.
struct Assignment {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> cells;  // row-major, 1 = treated
  std::optional<std::vector<std::uint8_t>> buyer_factors;
  std::optional<std::vector<std::uint8_t>> seller_factors;

  std::uint8_t at(int i, int j) const { return cells[i * cols + j]; }
  std::uint8_t& at(int i, int j) { return cells[i * cols + j]; }
  long treated_count() const;
  double treated_fraction() const;
};

// Per-pair type labels plus the per-type row/column index sets.
struct TypeMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> buyer_factors;
  std::vector<std::uint8_t> seller_factors;

  PairType type_of(int i, int j) const {
    const int b = buyer_factors[i];
    const int s = seller_factors[j];
    return static_cast<PairType>(b * 1 + s * 2);  // cc=00 ib=10 is=01 tr=11
  }
  std::array<std::vector<int>, kNumTypes> row_sets() const;
  std::array<std::vector<int>, kNumTypes> col_sets() const;
  // I_gamma, J_gamma.
  std::array<int, kNumTypes> row_counts() const;
  std::array<int, kNumTypes> col_counts() const;
};

struct ConsistencyProfile {
  std::vector<double> buyer_fractions;   // per-buyer treated fraction
  std::vector<double> seller_fractions;  // per-seller treated fraction
  std::vector<bool> buyer_consistent;
  std::vector<bool> seller_consistent;
  double global_fraction = 0.0;
};

struct MrdValidationReport {
  bool valid = false;
  double treated_fraction = 0.0;
  // Index of the first sample violating the fixed-fraction condition, or
  // -1 when none.
  int offending_index = -1;
  std::string message;
};

// Samples one assignment from the design's support; deterministic in
// (spec, seed).
Assignment sample_assignment(const DesignSpec& spec, std::uint64_t seed);

// Labels every pair from the factor vectors. Requires factors present.
TypeMatrix classify_types(const Assignment& assignment);

// Recovers the unique binary factor vectors with matrix = outer product.
// All-zero matrices are degenerate (factors not unique); matrices that are
// not a binary outer product are a structure error.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> infer_factors(
    const Assignment& assignment);

ConsistencyProfile consistency_profile(const Assignment& assignment);

// Checks that all samples share the same treated fraction in (0,1).
// Violations are reported, not thrown.
MrdValidationReport validate_mrd(const DesignSpec& spec,
                                 const std::vector<Assignment>& samples);

}  // namespace mrd
