#pragma once

#include <string>
#include <vector>

#include "mrd/design.hpp"
#include "mrd/estimation.hpp"
#include "mrd/harness.hpp"
#include "mrd/inference.hpp"
#include "mrd/variance.hpp"

namespace mrd {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "mrd-analysis-report/1";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// FNV-1a 64-bit hash of a file's bytes, as 16 hex digits.
std::string fnv1a_file_hash(const std::string& path);

// Assignment CSV: header `buyer_id,s1,...,sJ`, then one 0/1 row per buyer.
void write_assignment_csv(const Assignment& assignment,
                          const std::string& path);
Assignment read_assignment_csv(const std::string& path);

// Long-format observed outcomes plus the dense id mapping recovered from
// first-appearance order.
struct LongOutcomes {
  TypeMatrix types;
  std::vector<double> observed;  // row-major
  std::vector<std::string> buyer_ids;
  std::vector<std::string> seller_ids;
};

// Header `buyer_id,seller_id,w_buyer,w_seller,outcome`; requires every
// pair exactly once and consistent factors per id.
LongOutcomes read_long_outcomes_csv(const std::string& path);
void write_long_outcomes_csv(const LongOutcomes& data,
                             const std::string& path);

// `bin_lo,bin_hi,count` rows.
void write_histogram_csv(const Histogram& histogram, const std::string& path);

struct EstimandResult {
  EstimandSpec spec;
  double estimate = 0.0;
  double conservative_variance = 0.0;
  ConfidenceInterval ci;
  CltDiagnostic diagnostic;
};

struct AnalysisReport {
  int buyers = 0;
  int sellers = 0;
  int treated_buyers = 0;
  int treated_sellers = 0;
  TypeMeans type_means;
  VarianceEstimate variance;
  double level = 0.0;
  std::vector<EstimandResult> estimands;
  std::string input_path;
  std::string input_hash;
  std::vector<std::string> buyer_ids;
  std::vector<std::string> seller_ids;
};

// Full analysis of one realized outcome set.
AnalysisReport analyze(const LongOutcomes& data,
                       const std::vector<EstimandSpec>& estimands,
                       double level);

// Strict JSON round-trip: emission at 17 significant digits, parsing
// rejects unknown fields.
std::string to_json(const AnalysisReport& report);
AnalysisReport analysis_report_from_json(const std::string& text);

std::string to_json(const EnumerationReport& report);
std::string to_json(const McReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mrd
