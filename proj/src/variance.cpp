#include "mrd/variance.hpp"

#include <cmath>

#include "mrd/kahan.hpp"

namespace mrd {

namespace {

// Signed normalization of the buyer-side stochastic term of each type
// estimator: +1/I_T for types with treated buyers, -1/I_C otherwise.
double buyer_weight(PairType t, const SmrdConfig& cfg) {
  switch (t) {
    case PairType::ib:
    case PairType::tr:
      return 1.0 / cfg.treated_buyers;
    case PairType::cc:
    case PairType::is:
      return -1.0 / cfg.control_buyers();
  }
  return 0.0;
}

double seller_weight(PairType t, const SmrdConfig& cfg) {
  switch (t) {
    case PairType::is:
    case PairType::tr:
      return 1.0 / cfg.treated_sellers;
    case PairType::cc:
    case PairType::ib:
      return -1.0 / cfg.control_sellers();
  }
  return 0.0;
}

}  // namespace

PopulationMoments population_moments(const PotentialOutcomeTable& potentials,
                                     const SmrdConfig& config) {
  const int rows = potentials.rows;
  const int cols = potentials.cols;
  if (rows < 2 || cols < 2) {
    throw ConfigError("population moments require I >= 2 and J >= 2");
  }
  if (rows != config.buyers || cols != config.sellers) {
    throw ConfigError("design dimensions do not match the outcome table");
  }

  PopulationMoments m;
  m.rows = rows;
  m.cols = cols;
  const int treated_b = config.treated_buyers;
  const int control_b = config.control_buyers();
  const int treated_s = config.treated_sellers;
  const int control_s = config.control_sellers();
  m.row_counts = {control_b, treated_b, control_b, treated_b};
  m.col_counts = {control_s, control_s, treated_s, treated_s};

  for (int t = 0; t < kNumTypes; ++t) {
    const auto& y = potentials.tables[t];
    KahanSum grand;
    for (double v : y) grand += v;
    const double mean = grand.value() / (static_cast<double>(rows) * cols);

    std::vector<double> row_mean(rows, 0.0), col_mean(cols, 0.0);
    for (int i = 0; i < rows; ++i) {
      KahanSum s;
      for (int j = 0; j < cols; ++j) s += y[static_cast<std::size_t>(i) * cols + j];
      row_mean[i] = s.value() / cols;
    }
    for (int j = 0; j < cols; ++j) {
      KahanSum s;
      for (int i = 0; i < rows; ++i) s += y[static_cast<std::size_t>(i) * cols + j];
      col_mean[j] = s.value() / rows;
    }

    auto& rd = m.row_dev[t];
    auto& cd = m.col_dev[t];
    auto& id = m.inter_dev[t];
    rd.resize(rows);
    cd.resize(cols);
    id.resize(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i) rd[i] = row_mean[i] - mean;
    for (int j = 0; j < cols; ++j) cd[j] = col_mean[j] - mean;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        id[static_cast<std::size_t>(i) * cols + j] =
            y[static_cast<std::size_t>(i) * cols + j] - row_mean[i] -
            col_mean[j] + mean;
      }
    }

    KahanSum sb, ss, si;
    for (double d : rd) sb += d * d;
    for (double d : cd) ss += d * d;
    for (double d : id) si += d * d;
    m.sigma[t][0] = sb.value() / (rows - 1);
    m.sigma[t][1] = ss.value() / (cols - 1);
    m.sigma[t][2] = si.value() / (static_cast<double>(rows - 1) * (cols - 1));

    m.alpha_buyer[t] = (rows - m.row_counts[t]) /
                       (static_cast<double>(m.row_counts[t]) * (rows - 1));
    m.alpha_seller[t] = (cols - m.col_counts[t]) /
                        (static_cast<double>(m.col_counts[t]) * (cols - 1));
  }

  for (int a = 0; a < kNumTypes; ++a) {
    for (int b = 0; b < kNumTypes; ++b) {
      if (a == b) {
        m.xi[a][b] = {0.0, 0.0, 0.0};
        continue;
      }
      KahanSum xb, xs, xi_sum;
      for (int i = 0; i < rows; ++i) {
        const double d = m.row_dev[a][i] - m.row_dev[b][i];
        xb += d * d;
      }
      for (int j = 0; j < cols; ++j) {
        const double d = m.col_dev[a][j] - m.col_dev[b][j];
        xs += d * d;
      }
      for (std::size_t k = 0; k < m.inter_dev[a].size(); ++k) {
        const double d = m.inter_dev[a][k] - m.inter_dev[b][k];
        xi_sum += d * d;
      }
      m.xi[a][b][0] = xb.value() / (rows - 1);
      m.xi[a][b][1] = xs.value() / (cols - 1);
      m.xi[a][b][2] =
          xi_sum.value() / (static_cast<double>(rows - 1) * (cols - 1));
    }
  }
  return m;
}

CovarianceMatrix4 exact_covariance(const PopulationMoments& moments,
                                   const SmrdConfig& config) {
  CovarianceMatrix4 result;
  const double kb = static_cast<double>(config.treated_buyers) *
                    config.control_buyers() / config.buyers;
  const double ks = static_cast<double>(config.treated_sellers) *
                    config.control_sellers() / config.sellers;
  for (int a = 0; a < kNumTypes; ++a) {
    for (int b = a; b < kNumTypes; ++b) {
      const double wb = buyer_weight(static_cast<PairType>(a), config) *
                        buyer_weight(static_cast<PairType>(b), config);
      const double ws = seller_weight(static_cast<PairType>(a), config) *
                        seller_weight(static_cast<PairType>(b), config);
      // zeta/2 = (1/(I-1)) sum_i dev_i(a) dev_i(b), and likewise for the
      // seller and interaction terms.
      auto half_zeta = [&](int x) {
        return 0.5 *
               (moments.sigma[a][x] + moments.sigma[b][x] - moments.xi[a][b][x]);
      };
      const double value = wb * kb * half_zeta(0) + ws * ks * half_zeta(1) +
                           wb * ws * kb * ks * half_zeta(2);
      result.cov[a][b] = value;
      result.cov[b][a] = value;
    }
  }
  return result;
}

double exact_estimand_variance(const CovarianceMatrix4& cov,
                               const EstimandSpec& spec) {
  double v = 0.0;
  for (int a = 0; a < kNumTypes; ++a) {
    for (int b = 0; b < kNumTypes; ++b) {
      v += spec.beta[a] * spec.beta[b] * cov.cov[a][b];
    }
  }
  return v;
}

VarianceEstimate variance_estimate(const std::vector<double>& observed,
                                   const TypeMatrix& types) {
  const int rows = types.rows;
  const int cols = types.cols;
  if (observed.size() != static_cast<std::size_t>(rows) * cols) {
    throw StructureError("observed matrix and type matrix dimensions differ");
  }
  const auto row_sets = types.row_sets();
  const auto col_sets = types.col_sets();

  VarianceEstimate est;
  for (int t = 0; t < kNumTypes; ++t) {
    const auto& ri = row_sets[t];
    const auto& cj = col_sets[t];
    const int ni = static_cast<int>(ri.size());
    const int nj = static_cast<int>(cj.size());
    if (ni < 2 || nj < 2) {
      throw EstimationError(std::string("variance estimate requires at least "
                                        "two rows and columns of type ") +
                            type_name(static_cast<PairType>(t)));
    }

    auto y = [&](int i, int j) {
      return observed[static_cast<std::size_t>(i) * cols + j];
    };

    std::vector<double> row_mean(ni, 0.0), col_mean(nj, 0.0);
    KahanSum block_sum;
    for (int a = 0; a < ni; ++a) {
      KahanSum s;
      for (int b = 0; b < nj; ++b) s += y(ri[a], cj[b]);
      row_mean[a] = s.value() / nj;
      block_sum += s.value();
    }
    for (int b = 0; b < nj; ++b) {
      KahanSum s;
      for (int a = 0; a < ni; ++a) s += y(ri[a], cj[b]);
      col_mean[b] = s.value() / ni;
    }
    const double block_mean =
        block_sum.value() / (static_cast<double>(ni) * nj);

    KahanSum psi_b, psi_s, psi_bs, resid_row, resid_col;
    for (int a = 0; a < ni; ++a) {
      const double d = row_mean[a] - block_mean;
      psi_b += d * d;
    }
    for (int b = 0; b < nj; ++b) {
      const double d = col_mean[b] - block_mean;
      psi_s += d * d;
    }
    for (int a = 0; a < ni; ++a) {
      for (int b = 0; b < nj; ++b) {
        const double v = y(ri[a], cj[b]);
        const double inter = v - row_mean[a] - col_mean[b] + block_mean;
        psi_bs += inter * inter;
        const double dr = v - row_mean[a];
        resid_row += dr * dr;
        const double dc = v - col_mean[b];
        resid_col += dc * dc;
      }
    }

    // Combination weights solving the three-equation moment system for
    // Var(Yhat_g) = A*sigma^B + B*sigma^S + AB*sigma^BS with
    // A = (I-I_g)/(I I_g): in the psi normalization of the plug-ins the
    // weight becomes a = A * I/(I-1).
    const double wa = (rows - ni) / (static_cast<double>(ni) * (rows - 1));
    const double wb = (cols - nj) / (static_cast<double>(nj) * (cols - 1));

    est.sigma_buyer[t] = psi_b.value() / ni;
    est.sigma_seller[t] = psi_s.value() / nj;
    est.sigma_inter[t] = psi_bs.value() / (static_cast<double>(ni) * nj);

    // Within-row and within-column residual variances feed the
    // finite-sample corrections for the nested subset sampling.
    est.eta_buyer[t] = resid_row.value() / (static_cast<double>(ni) * nj) *
                       (cols - nj) / (static_cast<double>(cols) * (nj - 1));
    est.eta_seller[t] = resid_col.value() / (static_cast<double>(ni) * nj) *
                        (rows - ni) / (static_cast<double>(rows) * (ni - 1));

    const double numerator = wa * est.sigma_buyer[t] +
                             wb * est.sigma_seller[t] +
                             wa * wb * est.sigma_inter[t];
    const double denominator = (1.0 - wa) * (1.0 - wb);
    const double raw = numerator / denominator -
                       wa / (1.0 - wa) * est.eta_buyer[t] -
                       wb / (1.0 - wb) * est.eta_seller[t];
    est.combined_raw[t] = raw;
    est.combined[t] = std::max(raw, 0.0);
  }
  return est;
}

double conservative_variance(const VarianceEstimate& estimates,
                             const EstimandSpec& spec) {
  double bound = 0.0;
  for (int a = 0; a < kNumTypes; ++a) {
    bound += spec.beta[a] * spec.beta[a] * estimates.combined[a];
  }
  for (int a = 0; a < kNumTypes; ++a) {
    for (int b = a + 1; b < kNumTypes; ++b) {
      bound += 2.0 * std::abs(spec.beta[a] * spec.beta[b]) *
               std::sqrt(estimates.combined[a] * estimates.combined[b]);
    }
  }
  return bound;
}

}  // namespace mrd
