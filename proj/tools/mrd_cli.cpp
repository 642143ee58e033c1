#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrd/design.hpp"
#include "mrd/harness.hpp"
#include "mrd/outcomes.hpp"
#include "mrd/prng.hpp"
#include "mrd/report.hpp"

#ifdef MRD_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

using nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitVerification = 2;

void apply_threads(int threads) {
#ifdef MRD_HAVE_OPENMP
  if (threads <= 0) {
    if (const char* env = std::getenv("MRD_THREADS")) {
      threads = std::atoi(env);
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

void check_known_keys(const json& obj, const std::vector<std::string>& allowed,
                      const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const auto& key : allowed) known = known || key == it.key();
    if (!known) {
      throw mrd::IoError("unknown field \"" + it.key() + "\" in " + where);
    }
  }
}

struct SimulateConfig {
  mrd::SmrdConfig design;
  mrd::OutcomeModelConfig outcomes;
  std::uint64_t outcome_seed = 0;
  double level = 0.95;
};

SimulateConfig load_simulate_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(mrd::read_text_file(path));
  } catch (const json::parse_error& e) {
    throw mrd::IoError(path + ": " + e.what());
  }
  check_known_keys(doc, {"design", "outcomes", "outcome_seed", "level"},
                   "config");
  SimulateConfig cfg;
  const auto& design = doc.at("design");
  check_known_keys(design,
                   {"buyers", "sellers", "treated_buyers", "treated_sellers"},
                   "design");
  cfg.design.buyers = design.at("buyers").get<int>();
  cfg.design.sellers = design.at("sellers").get<int>();
  cfg.design.treated_buyers = design.at("treated_buyers").get<int>();
  cfg.design.treated_sellers = design.at("treated_sellers").get<int>();
  if (doc.contains("outcomes")) {
    const auto& oc = doc["outcomes"];
    check_known_keys(oc,
                     {"mu_0", "mu_buyer", "mu_seller", "mu_1", "sigma_0",
                      "sigma_buyer", "sigma_seller", "sigma_1", "p_buyer",
                      "p_seller"},
                     "outcomes");
    auto get = [&](const char* key, double fallback) {
      return oc.contains(key) ? oc[key].get<double>() : fallback;
    };
    cfg.outcomes.mu_0 = get("mu_0", cfg.outcomes.mu_0);
    cfg.outcomes.mu_buyer = get("mu_buyer", cfg.outcomes.mu_buyer);
    cfg.outcomes.mu_seller = get("mu_seller", cfg.outcomes.mu_seller);
    cfg.outcomes.mu_1 = get("mu_1", cfg.outcomes.mu_1);
    cfg.outcomes.sigma_0 = get("sigma_0", cfg.outcomes.sigma_0);
    cfg.outcomes.sigma_buyer = get("sigma_buyer", cfg.outcomes.sigma_buyer);
    cfg.outcomes.sigma_seller = get("sigma_seller", cfg.outcomes.sigma_seller);
    cfg.outcomes.sigma_1 = get("sigma_1", cfg.outcomes.sigma_1);
    cfg.outcomes.p_buyer = get("p_buyer", cfg.outcomes.p_buyer);
    cfg.outcomes.p_seller = get("p_seller", cfg.outcomes.p_seller);
  }
  if (doc.contains("outcome_seed")) {
    cfg.outcome_seed = doc["outcome_seed"].get<std::uint64_t>();
  }
  if (doc.contains("level")) cfg.level = doc["level"].get<double>();
  cfg.design.validate();
  cfg.outcomes.validate();
  return cfg;
}

int cmd_design(const mrd::DesignSpec& spec, std::uint64_t seed,
               const std::string& out) {
  const auto assignment = mrd::sample_assignment(spec, seed);
  mrd::write_assignment_csv(assignment, out);
  const auto profile = mrd::consistency_profile(assignment);
  int consistent_buyers = 0, consistent_sellers = 0;
  for (bool c : profile.buyer_consistent) consistent_buyers += c;
  for (bool c : profile.seller_consistent) consistent_sellers += c;
  std::cout << "wrote " << out << "\n"
            << "treated fraction " << profile.global_fraction << "\n"
            << "consistent buyers " << consistent_buyers << "/"
            << assignment.rows << ", consistent sellers "
            << consistent_sellers << "/" << assignment.cols << "\n";
  return 0;
}

int cmd_analyze(const std::string& input,
                const std::vector<std::string>& estimand_names,
                const std::vector<double>& custom_beta,
                const std::string& custom_name, double level,
                const std::string& out) {
  const auto data = mrd::read_long_outcomes_csv(input);
  std::vector<mrd::EstimandSpec> estimands;
  if (estimand_names.empty() && custom_beta.empty()) {
    estimands = mrd::EstimandSpec::presets();
  }
  for (const auto& name : estimand_names) {
    estimands.push_back(mrd::EstimandSpec::by_name(name));
  }
  if (!custom_beta.empty()) {
    mrd::EstimandSpec spec;
    spec.name = custom_name;
    for (int t = 0; t < mrd::kNumTypes; ++t) spec.beta[t] = custom_beta[t];
    estimands.push_back(spec);
  }
  auto report = mrd::analyze(data, estimands, level);
  report.input_path = input;
  report.input_hash = mrd::fnv1a_file_hash(input);
  const std::string text = mrd::to_json(report);
  if (out.empty()) {
    std::cout << text;
  } else {
    mrd::write_text_file(out, text);
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, int reps, std::uint64_t seed,
                 const std::string& out_dir) {
  const auto cfg = load_simulate_config(config_path);
  if (reps < 2) throw mrd::ConfigError("--reps must be at least 2");
  const auto potentials = mrd::generate_potential_outcomes(
      cfg.outcomes, cfg.design.buyers, cfg.design.sellers, cfg.outcome_seed);
  mrd::McOptions options;
  options.replications = reps;
  options.seed = seed;
  options.level = cfg.level;
  const auto report = mrd::rerandomization_study(
      cfg.design, potentials, mrd::EstimandSpec::presets(), options);

  std::filesystem::create_directories(out_dir);
  const auto path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  mrd::write_text_file(path("mc_report.json"), mrd::to_json(report));

  // Type histograms: figures 1 (cc) and 3-5 (ib, is, tr); estimand
  // histograms: figures 2 (spill_b), 6 (direct), 7 (spill_s), 8 (ate).
  const int type_fig[mrd::kNumTypes] = {1, 3, 4, 5};
  for (int t = 0; t < mrd::kNumTypes; ++t) {
    const std::string label = mrd::type_name(static_cast<mrd::PairType>(t));
    const std::string fig = "fig" + std::to_string(type_fig[t]);
    mrd::write_histogram_csv(report.types[t].estimate_hist,
                             path(fig + "_mean_" + label + ".csv"));
    mrd::write_histogram_csv(report.types[t].variance_hist,
                             path(fig + "_var_" + label + ".csv"));
  }
  for (const auto& est : report.estimands) {
    int fig = 0;
    if (est.name == "ate") fig = 8;
    else if (est.name == "spill_b") fig = 2;
    else if (est.name == "spill_s") fig = 7;
    else if (est.name == "direct") fig = 6;
    const std::string prefix = "fig" + std::to_string(fig);
    mrd::write_histogram_csv(est.estimate_hist,
                             path(prefix + "_mean_" + est.name + ".csv"));
    mrd::write_histogram_csv(est.variance_hist,
                             path(prefix + "_var_" + est.name + ".csv"));
  }
  std::cout << "wrote " << out_dir << " (" << report.replications
            << " replications)\n";
  return 0;
}

int cmd_verify(const mrd::SmrdConfig& config, int trials, std::uint64_t seed,
               double tolerance, unsigned long long limit) {
  if (trials < 1) throw mrd::ConfigError("--trials must be positive");
  bool all_pass = true;
  for (int trial = 0; trial < trials; ++trial) {
    auto potentials =
        mrd::make_potential_table(config.buyers, config.sellers);
    mrd::Rng rng(mrd::derive_seed(seed, static_cast<std::uint64_t>(trial)));
    for (auto& table : potentials.tables) {
      for (auto& y : table) y = -5.0 + 10.0 * rng.next_double();
    }
    mrd::EnumerateOptions options;
    options.limit = limit;
    const auto report = mrd::enumerate_smrd(config, potentials, options);
    const auto cmp =
        mrd::oracle_compare(report, potentials, config, tolerance);
    for (const auto& check : cmp.checks) {
      std::cout << "trial " << trial << " " << check.quantity << " expected "
                << check.expected << " actual " << check.actual << " abs_err "
                << check.abs_error << (check.pass ? " PASS" : " FAIL")
                << "\n";
    }
    all_pass = all_pass && cmp.all_pass;
  }
  std::cout << (all_pass ? "verify: all checks passed"
                         : "verify: FAILURES detected")
            << "\n";
  return all_pass ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sided multiple-randomization design toolkit"};
  app.set_version_flag("--version", std::string("mrd ") + mrd::kToolVersion +
                                        " (schema " + mrd::kSchemaVersion +
                                        ")");
  int threads = 0;
  app.add_option("--threads", threads, "worker thread count (0 = default)");

  // design
  auto* design = app.add_subcommand("design", "sample one assignment matrix");
  std::string kind = "smrd";
  mrd::DesignSpec spec;
  std::uint64_t seed = 0;
  std::string out = "assignment.csv";
  std::string balance = "row";
  int rows = 0, cols = 0, treated_rows = 0, treated_cols = 0;
  int treated_per_row = 0;
  std::vector<int> buyer_groups, seller_groups;
  int group_a_cols = 0, treated_buyers_a = 0, treated_cols_b = 0;
  int group_a_rows = 0, cluster_count = 0, treated_clusters = 0;
  int treated_cols_plain = 0;
  design->add_option("--kind", kind,
                     "smrd|buyer-srd|seller-srd|crossover|multigroup|hybrid|"
                     "clustered");
  design->add_option("--rows", rows, "buyer count I")->required();
  design->add_option("--cols", cols, "seller count J")->required();
  design->add_option("--treated-rows", treated_rows, "treated buyers I_T");
  design->add_option("--treated-cols", treated_cols, "treated sellers J_T");
  design->add_option("--treated-per-row", treated_per_row,
                     "crossover: treated periods per unit");
  design->add_option("--balance", balance, "crossover: row|double");
  design->add_option("--buyer-groups", buyer_groups,
                     "multigroup: buyer group sizes");
  design->add_option("--seller-groups", seller_groups,
                     "multigroup: seller group sizes");
  design->add_option("--group-a-cols", group_a_cols, "hybrid: |A| sellers");
  design->add_option("--treated-buyers-a", treated_buyers_a,
                     "hybrid: treated buyers on A");
  design->add_option("--treated-cols-b", treated_cols_b,
                     "hybrid: treated sellers in B");
  design->add_option("--group-a-rows", group_a_rows, "clustered: |A| buyers");
  design->add_option("--clusters", cluster_count,
                     "clustered: seller cluster count");
  design->add_option("--treated-clusters", treated_clusters,
                     "clustered: treated clusters");
  design->add_option("--treated-cols-plain", treated_cols_plain,
                     "clustered: treated sellers for B buyers");
  design->add_option("--seed", seed, "random seed");
  design->add_option("--out", out, "output CSV path");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "analyze observed outcomes");
  std::string input;
  std::vector<std::string> estimand_names;
  std::vector<double> custom_beta;
  std::string custom_name = "custom";
  double level = 0.95;
  std::string analyze_out;
  analyze->add_option("--input", input, "long-format outcomes CSV")
      ->required();
  analyze->add_option("--estimand", estimand_names,
                      "preset name (repeatable): ate|spill_b|spill_s|direct");
  analyze->add_option("--beta", custom_beta,
                      "custom coefficients beta_cc beta_ib beta_is beta_tr")
      ->expected(0, 4);
  analyze->add_option("--beta-name", custom_name, "name for --beta estimand");
  analyze->add_option("--level", level, "confidence level");
  analyze->add_option("--out", analyze_out, "report path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "re-randomization study");
  std::string config_path;
  int reps = 10000;
  std::uint64_t sim_seed = 0;
  std::string out_dir = "mc_out";
  simulate->add_option("--config", config_path, "study config JSON")
      ->required();
  simulate->add_option("--reps", reps, "replication count");
  simulate->add_option("--seed", sim_seed, "master seed");
  simulate->add_option("--out-dir", out_dir, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "enumeration oracle check");
  mrd::SmrdConfig vconfig;
  int trials = 20;
  std::uint64_t vseed = 0;
  double tolerance = 1e-10;
  unsigned long long limit = 1'000'000;
  verify->add_option("--rows", vconfig.buyers, "buyer count I")->required();
  verify->add_option("--cols", vconfig.sellers, "seller count J")->required();
  verify->add_option("--treated-rows", vconfig.treated_buyers,
                     "treated buyers I_T")
      ->required();
  verify->add_option("--treated-cols", vconfig.treated_sellers,
                     "treated sellers J_T")
      ->required();
  verify->add_option("--trials", trials, "random tables to test");
  verify->add_option("--seed", vseed, "random seed");
  verify->add_option("--tolerance", tolerance, "absolute tolerance");
  verify->add_option("--limit", limit, "max enumerated assignments");

  app.require_subcommand(0, 1);
  CLI11_PARSE(app, argc, argv);
  apply_threads(threads);

  try {
    if (design->parsed()) {
      if (kind == "smrd") {
        spec.kind = mrd::DesignKind::smrd;
        spec.smrd = {rows, cols, treated_rows, treated_cols};
      } else if (kind == "buyer-srd") {
        spec.kind = mrd::DesignKind::buyer_srd;
        spec.rows = rows;
        spec.cols = cols;
        spec.treated_rows = treated_rows;
      } else if (kind == "seller-srd") {
        spec.kind = mrd::DesignKind::seller_srd;
        spec.rows = rows;
        spec.cols = cols;
        spec.treated_cols = treated_cols;
      } else if (kind == "crossover") {
        spec.kind = mrd::DesignKind::crossover;
        spec.rows = rows;
        spec.cols = cols;
        spec.treated_per_row = treated_per_row;
        if (balance == "double") {
          spec.balance = mrd::CrossoverBalance::double_balanced;
        } else if (balance != "row") {
          throw mrd::ConfigError("--balance must be row or double");
        }
      } else if (kind == "multigroup") {
        spec.kind = mrd::DesignKind::multigroup;
        spec.buyer_groups = buyer_groups;
        spec.seller_groups = seller_groups;
      } else if (kind == "hybrid") {
        spec.kind = mrd::DesignKind::hybrid;
        spec.rows = rows;
        spec.cols = cols;
        spec.group_a_cols = group_a_cols;
        spec.treated_buyers_a = treated_buyers_a;
        spec.treated_cols_b = treated_cols_b;
      } else if (kind == "clustered") {
        spec.kind = mrd::DesignKind::clustered;
        spec.rows = rows;
        spec.cols = cols;
        spec.group_a_rows = group_a_rows;
        spec.cluster_count = cluster_count;
        spec.treated_clusters = treated_clusters;
        spec.treated_cols_plain = treated_cols_plain;
      } else {
        throw mrd::ConfigError("unknown design kind \"" + kind + "\"");
      }
      return cmd_design(spec, seed, out);
    }
    if (analyze->parsed()) {
      if (!custom_beta.empty() && custom_beta.size() != 4) {
        throw mrd::ConfigError("--beta needs exactly 4 values");
      }
      return cmd_analyze(input, estimand_names, custom_beta, custom_name,
                         level, analyze_out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(config_path, reps, sim_seed, out_dir);
    }
    if (verify->parsed()) {
      return cmd_verify(vconfig, trials, vseed, tolerance, limit);
    }
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
