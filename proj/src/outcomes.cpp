#include "mrd/outcomes.hpp"

#include <cmath>
#include <stdexcept>

#include "mrd/prng.hpp"

namespace mrd {

double PotentialOutcomeTable::outcome_bound() const {
  double bound = 0.0;
  for (const auto& table : tables) {
    for (double y : table) bound = std::max(bound, std::abs(y));
  }
  return bound;
}

PotentialOutcomeTable make_potential_table(int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("potential-outcome table dimensions must be positive");
  }
  PotentialOutcomeTable t;
  t.rows = rows;
  t.cols = cols;
  for (auto& table : t.tables) {
    table.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  }
  return t;
}

void OutcomeModelConfig::validate() const {
  if (sigma_0 < 0 || sigma_buyer < 0 || sigma_seller < 0 || sigma_1 < 0) {
    throw ConfigError("outcome-model standard deviations must be nonnegative");
  }
  if (p_buyer <= 0.0 || p_buyer >= 1.0 || p_seller <= 0.0 || p_seller >= 1.0) {
    throw ConfigError("treated fractions must lie in (0,1)");
  }
}

PotentialOutcomeTable generate_potential_outcomes(
    const OutcomeModelConfig& config, int rows, int cols,
    std::uint64_t seed) {
  config.validate();
  PotentialOutcomeTable t = make_potential_table(rows, cols);
  // One derived stream per component, cells consumed in row-major order.
  Rng rng_0(derive_seed(seed, 0));
  Rng rng_1(derive_seed(seed, 1));
  Rng rng_b(derive_seed(seed, 2));
  Rng rng_s(derive_seed(seed, 3));

  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  auto& y_cc = t.tables[static_cast<int>(PairType::cc)];
  auto& y_ib = t.tables[static_cast<int>(PairType::ib)];
  auto& y_is = t.tables[static_cast<int>(PairType::is)];
  auto& y_tr = t.tables[static_cast<int>(PairType::tr)];
  for (std::size_t k = 0; k < n; ++k) {
    // Independent draws per cell and per table; the sums implement the
    // convolution of the component laws.
    auto draw = [](Rng& rng, double mean, double sigma) {
      return mean + sigma * rng.next_gaussian();
    };
    y_cc[k] = draw(rng_0, config.mean_0(), config.sigma_0);
    y_ib[k] = draw(rng_0, config.mean_0(), config.sigma_0) +
              draw(rng_b, config.mean_buyer(), config.sigma_buyer);
    y_is[k] = draw(rng_0, config.mean_0(), config.sigma_0) +
              draw(rng_s, config.mean_seller(), config.sigma_seller);
    y_tr[k] = draw(rng_1, config.mean_1(), config.sigma_1) +
              draw(rng_b, config.mean_buyer(), config.sigma_buyer) +
              draw(rng_s, config.mean_seller(), config.sigma_seller);
  }
  return t;
}

std::vector<double> realize_outcomes(const PotentialOutcomeTable& potentials,
                                     const TypeMatrix& types) {
  if (potentials.rows != types.rows || potentials.cols != types.cols) {
    throw StructureError("potential table and type matrix dimensions differ");
  }
  std::vector<double> observed(
      static_cast<std::size_t>(types.rows) * types.cols);
  for (int i = 0; i < types.rows; ++i) {
    for (int j = 0; j < types.cols; ++j) {
      observed[static_cast<std::size_t>(i) * types.cols + j] =
          potentials.at(types.type_of(i, j), i, j);
    }
  }
  return observed;
}

namespace {

bool tables_equal(const std::vector<double>& a, const std::vector<double>& b,
                  double tolerance) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > tolerance) return false;
  }
  return true;
}

}  // namespace

bool satisfies_strong_no_interference(const PotentialOutcomeTable& potentials,
                                      double tolerance) {
  const auto& cc = potentials.tables[static_cast<int>(PairType::cc)];
  const auto& ib = potentials.tables[static_cast<int>(PairType::ib)];
  const auto& is = potentials.tables[static_cast<int>(PairType::is)];
  return tables_equal(cc, ib, tolerance) && tables_equal(cc, is, tolerance);
}

bool satisfies_no_buyer_interference(const PotentialOutcomeTable& potentials,
                                     double tolerance) {
  const auto& cc = potentials.tables[static_cast<int>(PairType::cc)];
  const auto& ib = potentials.tables[static_cast<int>(PairType::ib)];
  return tables_equal(cc, ib, tolerance);
}

}  // namespace mrd
