#include "mrd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace mrd {

namespace {

using nlohmann::json;

// 17 significant digits: enough for a lossless double round-trip.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += "\"";
  return out;
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw IoError("unknown field \"" + it.key() + "\" in " + where);
    }
  }
  for (const auto& key : allowed) {
    if (!obj.contains(key)) {
      throw IoError("missing field \"" + key + "\" in " + where);
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_double(const std::string& text, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw IoError("line " + std::to_string(line_no) +
                  ": cannot parse number \"" + text + "\"");
  }
}

int parse_binary(const std::string& text, int line_no, const char* what) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw IoError("line " + std::to_string(line_no) + ": " + what +
                " must be 0 or 1, got \"" + text + "\"");
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string fnv1a_file_hash(const std::string& path) {
  const std::string bytes = read_text_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_assignment_csv(const Assignment& assignment,
                          const std::string& path) {
  std::ostringstream out;
  out << "buyer_id";
  for (int j = 0; j < assignment.cols; ++j) out << ",s" << (j + 1);
  out << "\n";
  for (int i = 0; i < assignment.rows; ++i) {
    out << "b" << (i + 1);
    for (int j = 0; j < assignment.cols; ++j) {
      out << ',' << static_cast<int>(assignment.at(i, j));
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

Assignment read_assignment_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty assignment file " + path);
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "buyer_id") {
    throw IoError("assignment header must start with buyer_id");
  }
  const int cols = static_cast<int>(header.size()) - 1;
  if (cols < 1) throw IoError("assignment file has no seller columns");
  for (int j = 0; j < cols; ++j) {
    if (header[j + 1] != "s" + std::to_string(j + 1)) {
      throw IoError("assignment header column " + std::to_string(j + 2) +
                    " must be s" + std::to_string(j + 1));
    }
  }
  Assignment a;
  a.cols = cols;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != cols + 1) {
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(cols + 1) + " fields");
    }
    for (int j = 0; j < cols; ++j) {
      a.cells.push_back(static_cast<std::uint8_t>(
          parse_binary(fields[j + 1], line_no, "cell")));
    }
    ++a.rows;
  }
  if (a.rows == 0) throw IoError("assignment file has no data rows");
  return a;
}

LongOutcomes read_long_outcomes_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty outcomes file " + path);
  {
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected = {
        "buyer_id", "seller_id", "w_buyer", "w_seller", "outcome"};
    if (std::vector<std::string>(header.begin(), header.end()) != expected) {
      throw IoError(
          "outcomes header must be buyer_id,seller_id,w_buyer,w_seller,"
          "outcome");
    }
  }

  LongOutcomes data;
  std::unordered_map<std::string, int> buyer_index, seller_index;
  std::vector<int> buyer_factor, seller_factor;
  struct Cell {
    double outcome;
    int line_no;
  };
  std::vector<std::vector<Cell>> cells;  // [buyer][seller], line_no 0 = empty

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      throw IoError("line " + std::to_string(line_no) +
                    ": expected 5 fields");
    }
    const int wb = parse_binary(fields[2], line_no, "w_buyer");
    const int ws = parse_binary(fields[3], line_no, "w_seller");
    const double y = parse_double(fields[4], line_no);

    auto [bit, bnew] = buyer_index.try_emplace(
        fields[0], static_cast<int>(data.buyer_ids.size()));
    if (bnew) {
      data.buyer_ids.push_back(fields[0]);
      buyer_factor.push_back(wb);
      cells.emplace_back();
    } else if (buyer_factor[bit->second] != wb) {
      throw IoError("line " + std::to_string(line_no) +
                    ": inconsistent buyer factor for id \"" + fields[0] +
                    "\"");
    }
    auto [sit, snew] = seller_index.try_emplace(
        fields[1], static_cast<int>(data.seller_ids.size()));
    if (snew) {
      data.seller_ids.push_back(fields[1]);
      seller_factor.push_back(ws);
    } else if (seller_factor[sit->second] != ws) {
      throw IoError("line " + std::to_string(line_no) +
                    ": inconsistent seller factor for id \"" + fields[1] +
                    "\"");
    }
    const int bi = bit->second;
    const int sj = sit->second;
    auto& row = cells[bi];
    if (static_cast<int>(row.size()) <= sj) row.resize(sj + 1, {0.0, 0});
    if (row[sj].line_no != 0) {
      throw IoError("line " + std::to_string(line_no) + ": duplicate pair (" +
                    fields[0] + ", " + fields[1] + "), first seen at line " +
                    std::to_string(row[sj].line_no));
    }
    row[sj] = {y, line_no};
  }

  const int rows = static_cast<int>(data.buyer_ids.size());
  const int cols = static_cast<int>(data.seller_ids.size());
  if (rows == 0 || cols == 0) throw IoError("outcomes file has no data rows");

  data.types.rows = rows;
  data.types.cols = cols;
  data.types.buyer_factors.assign(buyer_factor.begin(), buyer_factor.end());
  data.types.seller_factors.assign(seller_factor.begin(),
                                   seller_factor.end());
  data.observed.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (static_cast<int>(cells[i].size()) <= j || cells[i][j].line_no == 0) {
        throw IoError("missing pair (" + data.buyer_ids[i] + ", " +
                      data.seller_ids[j] + ")");
      }
      data.observed[static_cast<std::size_t>(i) * cols + j] =
          cells[i][j].outcome;
    }
  }
  return data;
}

void write_long_outcomes_csv(const LongOutcomes& data,
                             const std::string& path) {
  std::ostringstream out;
  out << "buyer_id,seller_id,w_buyer,w_seller,outcome\n";
  for (int i = 0; i < data.types.rows; ++i) {
    for (int j = 0; j < data.types.cols; ++j) {
      out << data.buyer_ids[i] << ',' << data.seller_ids[j] << ','
          << static_cast<int>(data.types.buyer_factors[i]) << ','
          << static_cast<int>(data.types.seller_factors[j]) << ','
          << fmt(data.observed[static_cast<std::size_t>(i) * data.types.cols +
                               j])
          << "\n";
    }
  }
  write_text_file(path, out.str());
}

void write_histogram_csv(const Histogram& histogram,
                         const std::string& path) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < histogram.bins(); ++b) {
    out << fmt(histogram.edge(b)) << ',' << fmt(histogram.edge(b + 1)) << ','
        << histogram.counts[b] << "\n";
  }
  write_text_file(path, out.str());
}

AnalysisReport analyze(const LongOutcomes& data,
                       const std::vector<EstimandSpec>& estimands,
                       double level) {
  AnalysisReport report;
  report.buyers = data.types.rows;
  report.sellers = data.types.cols;
  for (auto f : data.types.buyer_factors) report.treated_buyers += f;
  for (auto f : data.types.seller_factors) report.treated_sellers += f;
  report.buyer_ids = data.buyer_ids;
  report.seller_ids = data.seller_ids;
  report.level = level;

  report.type_means = type_mean_estimates(data.observed, data.types);
  report.variance = variance_estimate(data.observed, data.types);

  const double ib = report.treated_buyers;
  const double is = report.treated_sellers;
  const double balance =
      std::max({report.buyers / ib, report.buyers / (report.buyers - ib),
                report.sellers / is, report.sellers / (report.sellers - is)});
  double outcome_bound = 0.0;
  for (double y : data.observed) outcome_bound = std::max(outcome_bound, std::abs(y));
  if (outcome_bound == 0.0) outcome_bound = 1.0;  // any bound dominates 0

  for (const auto& spec : estimands) {
    EstimandResult res;
    res.spec = spec;
    res.estimate = estimand_value(spec, report.type_means);
    res.conservative_variance = conservative_variance(report.variance, spec);
    res.ci = confidence_interval(res.estimate, res.conservative_variance,
                                 level);
    res.diagnostic =
        clt_diagnostic(balance, outcome_bound, report.buyers, report.sellers,
                       res.conservative_variance, spec.norm());
    report.estimands.push_back(std::move(res));
  }
  return report;
}

std::string to_json(const AnalysisReport& report) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"schema\": " << escape(kSchemaVersion) << ",\n";
  out << "  \"tool_version\": " << escape(kToolVersion) << ",\n";
  out << "  \"design\": {\"buyers\": " << report.buyers
      << ", \"sellers\": " << report.sellers
      << ", \"treated_buyers\": " << report.treated_buyers
      << ", \"treated_sellers\": " << report.treated_sellers << "},\n";
  out << "  \"level\": " << fmt(report.level) << ",\n";
  out << "  \"types\": [\n";
  for (int t = 0; t < kNumTypes; ++t) {
    out << "    {\"type\": \"" << type_name(static_cast<PairType>(t))
        << "\", \"rows\": " << report.type_means.row_counts[t]
        << ", \"cols\": " << report.type_means.col_counts[t]
        << ", \"mean\": " << fmt(report.type_means.means[t])
        << ", \"variance_raw\": " << fmt(report.variance.combined_raw[t])
        << ", \"variance\": " << fmt(report.variance.combined[t]) << "}"
        << (t + 1 < kNumTypes ? "," : "") << "\n";
  }
  out << "  ],\n";
  out << "  \"estimands\": [\n";
  for (std::size_t e = 0; e < report.estimands.size(); ++e) {
    const auto& res = report.estimands[e];
    out << "    {\"name\": " << escape(res.spec.name) << ", \"beta\": [";
    for (int t = 0; t < kNumTypes; ++t) {
      out << fmt(res.spec.beta[t]) << (t + 1 < kNumTypes ? ", " : "");
    }
    out << "], \"estimate\": " << fmt(res.estimate)
        << ", \"conservative_variance\": " << fmt(res.conservative_variance)
        << ", \"ci\": {\"center\": " << fmt(res.ci.center)
        << ", \"half_width\": " << fmt(res.ci.half_width) << "}"
        << ", \"diagnostic\": {\"balance_bound\": "
        << fmt(res.diagnostic.balance_bound)
        << ", \"outcome_bound\": " << fmt(res.diagnostic.outcome_bound)
        << ", \"delta\": "
        << (res.diagnostic.degenerate ? std::string("null")
                                      : fmt(res.diagnostic.delta))
        << ", \"degenerate\": "
        << (res.diagnostic.degenerate ? "true" : "false") << "}}"
        << (e + 1 < report.estimands.size() ? "," : "") << "\n";
  }
  out << "  ],\n";
  out << "  \"provenance\": {\"input\": " << escape(report.input_path)
      << ", \"fnv1a64\": " << escape(report.input_hash)
      << ", \"buyer_ids\": [";
  for (std::size_t i = 0; i < report.buyer_ids.size(); ++i) {
    out << escape(report.buyer_ids[i])
        << (i + 1 < report.buyer_ids.size() ? ", " : "");
  }
  out << "], \"seller_ids\": [";
  for (std::size_t j = 0; j < report.seller_ids.size(); ++j) {
    out << escape(report.seller_ids[j])
        << (j + 1 < report.seller_ids.size() ? ", " : "");
  }
  out << "]}\n";
  out << "}\n";
  return out.str();
}

AnalysisReport analysis_report_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid JSON: ") + e.what());
  }
  require_keys(doc,
               {"schema", "tool_version", "design", "level", "types",
                "estimands", "provenance"},
               "report");
  if (doc["schema"] != kSchemaVersion) {
    throw IoError("unsupported schema " + doc["schema"].dump());
  }

  AnalysisReport report;
  const auto& design = doc["design"];
  require_keys(design,
               {"buyers", "sellers", "treated_buyers", "treated_sellers"},
               "design");
  report.buyers = design["buyers"].get<int>();
  report.sellers = design["sellers"].get<int>();
  report.treated_buyers = design["treated_buyers"].get<int>();
  report.treated_sellers = design["treated_sellers"].get<int>();
  report.level = doc["level"].get<double>();

  const auto& types = doc["types"];
  if (!types.is_array() || types.size() != kNumTypes) {
    throw IoError("types must be an array of 4 entries");
  }
  for (int t = 0; t < kNumTypes; ++t) {
    const auto& entry = types[t];
    require_keys(entry,
                 {"type", "rows", "cols", "mean", "variance_raw", "variance"},
                 "types entry");
    if (entry["type"] != type_name(static_cast<PairType>(t))) {
      throw IoError("types entries must be ordered cc,ib,is,tr");
    }
    report.type_means.row_counts[t] = entry["rows"].get<int>();
    report.type_means.col_counts[t] = entry["cols"].get<int>();
    report.type_means.means[t] = entry["mean"].get<double>();
    report.variance.combined_raw[t] = entry["variance_raw"].get<double>();
    report.variance.combined[t] = entry["variance"].get<double>();
  }

  for (const auto& entry : doc["estimands"]) {
    require_keys(entry,
                 {"name", "beta", "estimate", "conservative_variance", "ci",
                  "diagnostic"},
                 "estimand entry");
    EstimandResult res;
    res.spec.name = entry["name"].get<std::string>();
    const auto& beta = entry["beta"];
    if (!beta.is_array() || beta.size() != kNumTypes) {
      throw IoError("beta must have 4 entries");
    }
    for (int t = 0; t < kNumTypes; ++t) res.spec.beta[t] = beta[t].get<double>();
    res.estimate = entry["estimate"].get<double>();
    res.conservative_variance = entry["conservative_variance"].get<double>();
    const auto& ci = entry["ci"];
    require_keys(ci, {"center", "half_width"}, "ci");
    res.ci.level = report.level;
    res.ci.center = ci["center"].get<double>();
    res.ci.half_width = ci["half_width"].get<double>();
    const auto& diag = entry["diagnostic"];
    require_keys(diag, {"balance_bound", "outcome_bound", "delta", "degenerate"},
                 "diagnostic");
    res.diagnostic.balance_bound = diag["balance_bound"].get<double>();
    res.diagnostic.outcome_bound = diag["outcome_bound"].get<double>();
    res.diagnostic.degenerate = diag["degenerate"].get<bool>();
    res.diagnostic.delta =
        res.diagnostic.degenerate
            ? std::numeric_limits<double>::infinity()
            : diag["delta"].get<double>();
    res.diagnostic.buyers = report.buyers;
    res.diagnostic.sellers = report.sellers;
    res.diagnostic.variance = res.conservative_variance;
    res.diagnostic.beta_norm = res.spec.norm();
    report.estimands.push_back(std::move(res));
  }

  const auto& prov = doc["provenance"];
  require_keys(prov, {"input", "fnv1a64", "buyer_ids", "seller_ids"},
               "provenance");
  report.input_path = prov["input"].get<std::string>();
  report.input_hash = prov["fnv1a64"].get<std::string>();
  for (const auto& id : prov["buyer_ids"]) {
    report.buyer_ids.push_back(id.get<std::string>());
  }
  for (const auto& id : prov["seller_ids"]) {
    report.seller_ids.push_back(id.get<std::string>());
  }
  return report;
}

namespace {

void emit_histogram(std::ostringstream& out, const Histogram& h) {
  out << "{\"lo\": " << fmt(h.lo) << ", \"hi\": " << fmt(h.hi)
      << ", \"counts\": [";
  for (int b = 0; b < h.bins(); ++b) {
    out << h.counts[b] << (b + 1 < h.bins() ? ", " : "");
  }
  out << "]}";
}

}  // namespace

std::string to_json(const EnumerationReport& report) {
  std::ostringstream out;
  out << "{\n  \"num_assignments\": " << report.num_assignments << ",\n";
  auto emit4 = [&](const char* key, const std::array<double, kNumTypes>& v,
                   bool comma) {
    out << "  \"" << key << "\": [";
    for (int t = 0; t < kNumTypes; ++t) {
      out << fmt(v[t]) << (t + 1 < kNumTypes ? ", " : "");
    }
    out << "]" << (comma ? "," : "") << "\n";
  };
  emit4("mean_estimates", report.mean_estimates, true);
  out << "  \"covariance\": [\n";
  for (int a = 0; a < kNumTypes; ++a) {
    out << "    [";
    for (int b = 0; b < kNumTypes; ++b) {
      out << fmt(report.covariance[a][b]) << (b + 1 < kNumTypes ? ", " : "");
    }
    out << "]" << (a + 1 < kNumTypes ? "," : "") << "\n";
  }
  out << "  ],\n";
  emit4("mean_variance_estimate_raw", report.mean_variance_estimate_raw,
        true);
  emit4("mean_variance_estimate_clamped",
        report.mean_variance_estimate_clamped, true);
  emit4("mean_estimand", report.mean_estimand, true);
  emit4("mean_conservative", report.mean_conservative, false);
  out << "}\n";
  return out.str();
}

std::string to_json(const McReport& report) {
  std::ostringstream out;
  out << "{\n  \"replications\": " << report.replications
      << ",\n  \"seed\": " << report.seed
      << ",\n  \"level\": " << fmt(report.level) << ",\n  \"types\": [\n";
  for (int t = 0; t < kNumTypes; ++t) {
    const auto& s = report.types[t];
    out << "    {\"type\": \"" << type_name(static_cast<PairType>(t))
        << "\", \"population_mean\": " << fmt(s.population_mean)
        << ", \"exact_variance\": " << fmt(s.exact_variance)
        << ", \"mean_estimate\": " << fmt(s.mean_estimate)
        << ", \"sample_variance\": " << fmt(s.sample_variance)
        << ", \"mean_variance_estimate\": " << fmt(s.mean_variance_estimate)
        << ", \"ks\": " << fmt(s.ks) << ", \"estimate_hist\": ";
    emit_histogram(out, s.estimate_hist);
    out << ", \"variance_hist\": ";
    emit_histogram(out, s.variance_hist);
    out << "}" << (t + 1 < kNumTypes ? "," : "") << "\n";
  }
  out << "  ],\n  \"estimands\": [\n";
  for (std::size_t e = 0; e < report.estimands.size(); ++e) {
    const auto& s = report.estimands[e];
    out << "    {\"name\": " << escape(s.name)
        << ", \"true_value\": " << fmt(s.true_value)
        << ", \"exact_variance\": " << fmt(s.exact_variance)
        << ", \"mean_estimate\": " << fmt(s.mean_estimate)
        << ", \"sample_variance\": " << fmt(s.sample_variance)
        << ", \"mean_conservative_variance\": "
        << fmt(s.mean_conservative_variance)
        << ", \"coverage\": " << fmt(s.coverage) << ", \"ks\": " << fmt(s.ks)
        << ", \"estimate_hist\": ";
    emit_histogram(out, s.estimate_hist);
    out << ", \"variance_hist\": ";
    emit_histogram(out, s.variance_hist);
    out << "}" << (e + 1 < report.estimands.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

}  // namespace mrd
