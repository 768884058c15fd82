#include "msf/gaussian_model.hpp"

#include <cmath>

#include "softmax_detail.hpp"

namespace msf {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

GaussianSwitchingModel::GaussianSwitchingModel(int K, bool switching_variance, int ar_lags)
    : K_(K), ar_(ar_lags), switch_var_(switching_variance) {
  if (K < 1) throw ConfigError("gaussian model requires K >= 1");
  if (ar_lags < 0) throw ConfigError("ar_lags must be >= 0");
  p_ = std::max(1, ar_);
  d_ = K_ + num_logvars() + ar_ + num_logits();
}

std::vector<std::string> GaussianSwitchingModel::param_names() const {
  std::vector<std::string> names;
  for (int k = 0; k < K_; ++k) names.push_back("mu_" + std::to_string(k + 1));
  if (switch_var_)
    for (int k = 0; k < K_; ++k) names.push_back("logvar_" + std::to_string(k + 1));
  else
    names.push_back("logvar");
  for (int a = 1; a <= ar_; ++a) names.push_back("phi_" + std::to_string(a));
  for (int i = 0; i < K_; ++i)
    for (int j = 0; j < K_ - 1; ++j)
      names.push_back("logit_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  return names;
}

std::vector<Transform> GaussianSwitchingModel::param_transforms() const {
  std::vector<Transform> tr(d_, Transform::identity);
  for (int k = 0; k < num_logvars(); ++k) tr[logvar_offset() + k] = Transform::log_variance;
  for (int j = 0; j < num_logits(); ++j) tr[logit_offset() + j] = Transform::logit;
  return tr;
}

void GaussianSwitchingModel::transition_row(const Vec& theta, double /*y_prev*/,
                                            const double* /*xrow*/, int from,
                                            double* probs) const {
  detail::softmax_row(theta.data() + logit_offset() + from * (K_ - 1), K_, probs);
}

double GaussianSwitchingModel::sample_y(const Vec& theta, const int* regimes,
                                        const double* ylags, std::mt19937_64& rng) const {
  const double* mu = theta.data() + mu_offset();
  double mean = mu[regimes[0]];
  for (int a = 1; a <= ar_; ++a)
    mean += theta[phi_offset() + a - 1] * (ylags[a - 1] - mu[regimes[a]]);
  double lam = theta[logvar_offset() + (switch_var_ ? regimes[0] : 0)];
  std::normal_distribution<double> nd(0.0, 1.0);
  return mean + std::sqrt(std::exp(lam)) * nd(rng);
}

void GaussianSwitchingModel::eval_period(const Vec& theta, const Dataset& data, int t,
                                         int order, PeriodEvaluation& out) const {
  const int K = K_, p = p_, d = d_;
  const int M = num_tuples(), C = num_combos();
  out.t = t;
  out.resize(C, d, order);

  const double* mu = theta.data() + mu_offset();
  const double* phi = theta.data() + phi_offset();
  const double yt = data.y[t - 1];

  std::vector<double> qrows(static_cast<std::size_t>(K) * K);
  for (int i = 0; i < K; ++i) transition_row(theta, 0.0, nullptr, i, qrows.data() + i * K);

  std::vector<int> digs(p + 1);
  std::vector<double> dl(d), d2l(static_cast<std::size_t>(d) * d);
  // active mean-parameter coordinates and their mean-derivatives
  std::vector<std::pair<int, double>> ucoef;
  ucoef.reserve(K + ar_);

  for (int s_t = 0; s_t < K; ++s_t) {
    for (int prev = 0; prev < M; ++prev) {
      const int idx = s_t * M + prev;
      digs[0] = s_t;
      decode_tuple(prev, K, p, digs.data() + 1);

      double mean = mu[s_t];
      for (int a = 1; a <= ar_; ++a) mean += phi[a - 1] * (data.lag(t, a) - mu[digs[a]]);
      const int lvix = logvar_offset() + (switch_var_ ? s_t : 0);
      const double lam = theta[lvix];
      const double v = std::exp(lam);
      const double e = yt - mean;
      const double lg = -0.5 * kLog2Pi - 0.5 * lam - 0.5 * e * e / v;
      const double qval = K > 1 ? qrows[digs[1] * K + s_t] : 1.0;
      const double f = std::exp(lg) * qval;
      if (!std::isfinite(f))
        throw EvaluationError("non-finite period density at t=" + std::to_string(t), t, idx);
      out.f[idx] = f;
      if (order < 1) continue;

      // gradient / Hessian of log f = log g + log q
      std::fill(dl.begin(), dl.end(), 0.0);
      if (order >= 2) std::fill(d2l.begin(), d2l.end(), 0.0);

      ucoef.clear();
      for (int k = 0; k < K; ++k) {
        double u = (s_t == k) ? 1.0 : 0.0;
        for (int a = 1; a <= ar_; ++a)
          if (digs[a] == k) u -= phi[a - 1];
        if (u != 0.0) ucoef.emplace_back(mu_offset() + k, u);
      }
      for (int a = 1; a <= ar_; ++a)
        ucoef.emplace_back(phi_offset() + a - 1, data.lag(t, a) - mu[digs[a]]);

      const double cm = e / v;
      for (const auto& [ci, ui] : ucoef) dl[ci] += cm * ui;
      dl[lvix] += -0.5 + 0.5 * e * e / v;
      const int from = digs[1];
      if (K > 1) {
        const double* q = qrows.data() + from * K;
        for (int j = 0; j < K - 1; ++j)
          dl[logit_offset() + from * (K - 1) + j] += ((j == s_t) ? 1.0 : 0.0) - q[j];
      }

      double* dfrow = out.df.data() + static_cast<std::size_t>(idx) * d;
      for (int i = 0; i < d; ++i) dfrow[i] = f * dl[i];
      if (order < 2) continue;

      for (const auto& [ci, ui] : ucoef)
        for (const auto& [cj, uj] : ucoef) d2l[ci * d + cj] += -ui * uj / v;
      // d2 mean / dmu_k dphi_a = -1{S_{t-a}=k}
      for (int a = 1; a <= ar_; ++a) {
        const int cm_k = mu_offset() + digs[a];
        const int cp = phi_offset() + a - 1;
        d2l[cm_k * d + cp] += -cm;
        d2l[cp * d + cm_k] += -cm;
      }
      for (const auto& [ci, ui] : ucoef) {
        d2l[ci * d + lvix] += -e * ui / v;
        d2l[lvix * d + ci] += -e * ui / v;
      }
      d2l[lvix * d + lvix] += -0.5 * e * e / v;
      if (K > 1) {
        const double* q = qrows.data() + from * K;
        for (int j = 0; j < K - 1; ++j) {
          const int cj = logit_offset() + from * (K - 1) + j;
          for (int l = 0; l < K - 1; ++l) {
            const int cl = logit_offset() + from * (K - 1) + l;
            d2l[cj * d + cl] += -q[j] * (((j == l) ? 1.0 : 0.0) - q[l]);
          }
        }
      }

      double* d2frow = out.d2f.data() + static_cast<std::size_t>(idx) * d * d;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          d2frow[i * d + j] = f * (dl[i] * dl[j] + d2l[i * d + j]);
    }
  }
}

bool GaussianSwitchingModel::transition_matrix(const Vec& theta, Vec& A, Vec* dA,
                                               Vec* d2A) const {
  const int K = K_, d = d_;
  A.assign(static_cast<std::size_t>(K) * K, 0.0);
  for (int i = 0; i < K; ++i) transition_row(theta, 0.0, nullptr, i, A.data() + i * K);
  if (dA) {
    dA->assign(static_cast<std::size_t>(d) * K * K, 0.0);
    for (int i = 0; i < K; ++i) {
      const double* q = A.data() + i * K;
      for (int l = 0; l < K - 1; ++l) {
        const int a = logit_offset() + i * (K - 1) + l;
        for (int j = 0; j < K; ++j)
          (*dA)[(static_cast<std::size_t>(a) * K + i) * K + j] =
              q[j] * (((j == l) ? 1.0 : 0.0) - q[l]);
      }
    }
  }
  if (d2A) {
    d2A->assign(static_cast<std::size_t>(d) * d * K * K, 0.0);
    for (int i = 0; i < K; ++i) {
      const double* q = A.data() + i * K;
      for (int l = 0; l < K - 1; ++l) {
        const int a = logit_offset() + i * (K - 1) + l;
        for (int m = 0; m < K - 1; ++m) {
          const int b = logit_offset() + i * (K - 1) + m;
          for (int j = 0; j < K; ++j) {
            const double dl_j = ((j == l) ? 1.0 : 0.0) - q[l];
            const double dm_j = ((j == m) ? 1.0 : 0.0) - q[m];
            const double dlm = ((l == m) ? 1.0 : 0.0) - q[m];
            (*d2A)[((static_cast<std::size_t>(a) * d + b) * K + i) * K + j] =
                q[j] * (dl_j * dm_j - q[l] * dlm);
          }
        }
      }
    }
  }
  return true;
}

std::unique_ptr<GaussianSwitchingModel> make_gaussian_switching_model(int K,
                                                                      bool switching_variance,
                                                                      int ar_lags) {
  return std::make_unique<GaussianSwitchingModel>(K, switching_variance, ar_lags);
}

}  // namespace msf
