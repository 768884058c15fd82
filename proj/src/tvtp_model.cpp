#include "msf/tvtp_model.hpp"

#include <cmath>

#include "softmax_detail.hpp"

namespace msf {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

TvtpModel::TvtpModel(int K, int transition_covariate_count)
    : K_(K), m_(transition_covariate_count) {
  if (K < 1) throw ConfigError("tvtp model requires K >= 1");
  if (m_ < 0) throw ConfigError("transition covariate count must be >= 0");
  d_ = 2 * K_ + num_coefs();
}

std::vector<std::string> TvtpModel::param_names() const {
  std::vector<std::string> names;
  for (int k = 0; k < K_; ++k) names.push_back("mu_" + std::to_string(k + 1));
  for (int k = 0; k < K_; ++k) names.push_back("logvar_" + std::to_string(k + 1));
  static const char* base[] = {"const", "ylag"};
  for (int i = 0; i < K_; ++i)
    for (int j = 0; j < K_ - 1; ++j)
      for (int c = 0; c < feature_dim(); ++c) {
        std::string feat = c < 2 ? base[c] : "x" + std::to_string(c - 1);
        names.push_back("tr_" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + "_" + feat);
      }
  return names;
}

std::vector<Transform> TvtpModel::param_transforms() const {
  std::vector<Transform> tr(d_, Transform::identity);
  for (int k = 0; k < K_; ++k) tr[logvar_offset() + k] = Transform::log_variance;
  for (int j = 0; j < num_coefs(); ++j) tr[coef_offset() + j] = Transform::logit;
  return tr;
}

void TvtpModel::fill_eta(const Vec& theta, const double* z, int from, double* eta) const {
  const int F = feature_dim();
  for (int j = 0; j < K_ - 1; ++j) {
    double v = 0.0;
    const double* c = theta.data() + coef_index(from, j, 0);
    for (int k = 0; k < F; ++k) v += c[k] * z[k];
    eta[j] = v;
  }
}

void TvtpModel::transition_row(const Vec& theta, double y_prev, const double* xrow,
                               int from, double* probs) const {
  std::vector<double> z(feature_dim());
  z[0] = 1.0;
  z[1] = y_prev;
  for (int l = 0; l < m_; ++l) z[2 + l] = xrow[l];
  std::vector<double> eta(std::max(1, K_ - 1));
  fill_eta(theta, z.data(), from, eta.data());
  detail::softmax_row(eta.data(), K_, probs);
}

double TvtpModel::sample_y(const Vec& theta, const int* regimes, const double* /*ylags*/,
                           std::mt19937_64& rng) const {
  std::normal_distribution<double> nd(0.0, 1.0);
  return theta[mu_offset() + regimes[0]] +
         std::sqrt(std::exp(theta[logvar_offset() + regimes[0]])) * nd(rng);
}

void TvtpModel::eval_period(const Vec& theta, const Dataset& data, int t, int order,
                            PeriodEvaluation& out) const {
  const int K = K_, d = d_, F = feature_dim();
  const int C = num_combos();  // K * K, p == 1
  out.t = t;
  out.resize(C, d, order);

  const double yt = data.y[t - 1];
  const double yprev = data.lag(t, 1);
  std::vector<double> z(F);
  z[0] = 1.0;
  z[1] = yprev;
  for (int l = 0; l < m_; ++l) z[2 + l] = data.xrow(t)[l];

  std::vector<double> eta(std::max(1, K - 1));
  std::vector<double> qrows(static_cast<std::size_t>(K) * K);
  for (int i = 0; i < K; ++i) {
    fill_eta(theta, z.data(), i, eta.data());
    detail::softmax_row(eta.data(), K, qrows.data() + i * K);
  }

  std::vector<double> dl(d), d2l(static_cast<std::size_t>(d) * d);

  for (int s_t = 0; s_t < K; ++s_t) {
    for (int from = 0; from < K; ++from) {
      const int idx = s_t * K + from;
      const double lam = theta[logvar_offset() + s_t];
      const double v = std::exp(lam);
      const double e = yt - theta[mu_offset() + s_t];
      const double lg = -0.5 * kLog2Pi - 0.5 * lam - 0.5 * e * e / v;
      const double* q = qrows.data() + from * K;
      const double f = std::exp(lg) * (K > 1 ? q[s_t] : 1.0);
      if (!std::isfinite(f))
        throw EvaluationError("non-finite period density at t=" + std::to_string(t), t, idx);
      out.f[idx] = f;
      if (order < 1) continue;

      std::fill(dl.begin(), dl.end(), 0.0);
      if (order >= 2) std::fill(d2l.begin(), d2l.end(), 0.0);

      const int cmu = mu_offset() + s_t;
      const int clv = logvar_offset() + s_t;
      dl[cmu] = e / v;
      dl[clv] = -0.5 + 0.5 * e * e / v;
      for (int j = 0; j < K - 1; ++j) {
        const double gj = ((j == s_t) ? 1.0 : 0.0) - q[j];
        for (int c = 0; c < F; ++c) dl[coef_index(from, j, c)] += gj * z[c];
      }

      double* dfrow = out.df.data() + static_cast<std::size_t>(idx) * d;
      for (int i = 0; i < d; ++i) dfrow[i] = f * dl[i];
      if (order < 2) continue;

      d2l[cmu * d + cmu] = -1.0 / v;
      d2l[cmu * d + clv] = d2l[clv * d + cmu] = -e / v;
      d2l[clv * d + clv] = -0.5 * e * e / v;
      for (int j = 0; j < K - 1; ++j)
        for (int l = 0; l < K - 1; ++l) {
          const double hjl = -q[j] * (((j == l) ? 1.0 : 0.0) - q[l]);
          for (int c1 = 0; c1 < F; ++c1)
            for (int c2 = 0; c2 < F; ++c2)
              d2l[coef_index(from, j, c1) * d + coef_index(from, l, c2)] +=
                  hjl * z[c1] * z[c2];
        }

      double* d2frow = out.d2f.data() + static_cast<std::size_t>(idx) * d * d;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          d2frow[i * d + j] = f * (dl[i] * dl[j] + d2l[i * d + j]);
    }
  }
}

std::unique_ptr<TvtpModel> make_tvtp_model(int K, int transition_covariate_count) {
  return std::make_unique<TvtpModel>(K, transition_covariate_count);
}

}  // namespace msf
