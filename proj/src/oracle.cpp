#include "msf/oracle.hpp"

#include <cmath>

#include "msf/kernels.hpp"

namespace msf {

namespace {

// Neumaier accumulator for the path-likelihood sum.
struct CompensatedSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

}  // namespace

// Every path contributes its literal Eq-style summands: per-time weights
// (product of the other factors) are accumulated into per-(t, regime-combo)
// tables, and pairwise weights into per-(t1, t2, combo, combo) tables; the
// gradient/Hessian contractions then run once per table entry instead of
// once per path.
OracleResult brute_force_all(const Model& model, const ParameterVector& theta,
                             const Dataset& data, const InitialDistribution& nu, int order) {
  const int K = model.num_regimes();
  const int p = model.markov_order();
  const int d = model.param_dim();
  const int M = model.num_tuples();
  const int C = model.num_combos();
  const int n = static_cast<int>(data.n());

  double paths_d = std::pow(static_cast<double>(K), n + p);
  if (paths_d > static_cast<double>(kOraclePathGuard))
    throw SizeGuardError("oracle instance too large: K^(n+p) exceeds the guard");
  const std::int64_t npaths = ipow(K, n + p);

  std::vector<PeriodEvaluation> pe(n + 1);
  for (int t = 1; t <= n; ++t) model.eval_period(theta.theta, data, t, order, pe[t]);

  // weight tables (all weights are products of nonnegative factors)
  Vec w1_0(M, 0.0);                                   // t1 = 0 (the nu factor)
  Vec w1(static_cast<std::size_t>(n + 1) * C, 0.0);   // rows 1..n
  Vec w2_0;                                           // (t2, tuple0, combo2), t1 = 0
  Vec w2;                                             // [(t1,t2) pair][combo1][combo2]
  auto pair_offset = [&](int t1, int t2) {
    // t1 in 1..n-1, t2 in t1+1..n, packed lexicographically
    std::int64_t idx = 0;
    idx = static_cast<std::int64_t>(t1 - 1) * n - static_cast<std::int64_t>(t1 - 1) * t1 / 2 +
          (t2 - t1 - 1);
    return idx * C * C;
  };
  if (order >= 2) {
    w2_0.assign(static_cast<std::size_t>(n) * M * C, 0.0);
    w2.assign(static_cast<std::size_t>(n) * (n - 1) / 2 * C * C, 0.0);
  }

  CompensatedSum lik;
  std::vector<int> digits(n + p);  // digits[i] = S_{i-p+1}
  std::vector<int> idxs(n + 1);    // combo index per factor t>=1
  Vec vals(n + 1), pre(n + 2), suf(n + 2);

  for (std::int64_t path = 0; path < npaths; ++path) {
    std::int64_t code = path;
    for (int i = 0; i < n + p; ++i) {
      digits[i] = static_cast<int>(code % K);
      code /= K;
    }
    // tuple code of (S_0, ..., S_{-p+1})
    int prevcode = 0;
    for (int i = p - 1; i >= 0; --i) prevcode = prevcode * K + digits[i];
    const int tuple0 = prevcode;

    vals[0] = nu.nu[tuple0];
    for (int t = 1; t <= n; ++t) {
      const int s_t = digits[p - 1 + t];
      const int idx = s_t * M + prevcode;
      idxs[t] = idx;
      vals[t] = pe[t].f[idx];
      prevcode = shift_tuple(prevcode, s_t, K, p);
    }

    pre[0] = 1.0;
    for (int k = 0; k <= n; ++k) pre[k + 1] = pre[k] * vals[k];
    suf[n + 1] = 1.0;
    for (int k = n; k >= 0; --k) suf[k] = suf[k + 1] * vals[k];

    lik.add(pre[n + 1]);
    if (order >= 1) {
      w1_0[tuple0] += suf[1];
      for (int t = 1; t <= n; ++t)
        w1[static_cast<std::size_t>(t) * C + idxs[t]] += pre[t] * suf[t + 1];
    }
    if (order >= 2) {
      // t1 = 0
      double run = 1.0;  // product of vals strictly between t1 and t2
      for (int t2 = 1; t2 <= n; ++t2) {
        w2_0[(static_cast<std::size_t>(t2 - 1) * M + tuple0) * C + idxs[t2]] +=
            run * suf[t2 + 1];
        run *= vals[t2];
      }
      for (int t1 = 1; t1 < n; ++t1) {
        run = pre[t1];
        for (int t2 = t1 + 1; t2 <= n; ++t2) {
          w2[pair_offset(t1, t2) + static_cast<std::size_t>(idxs[t1]) * C + idxs[t2]] +=
              run * suf[t2 + 1];
          run *= vals[t2];
        }
      }
    }
  }

  OracleResult out;
  out.paths_processed = npaths;
  out.lik = lik.value();
  if (!(out.lik > 0.0))
    throw ImpossibleLikelihoodError("oracle likelihood is zero", n);
  out.loglik = std::log(out.lik);
  if (order < 1) return out;

  // score: sum of grad-factor * weight, divided by the likelihood
  Vec s_raw(d, 0.0);
  for (int c = 0; c < M; ++c)
    if (const double* g = nu.grad_row(c, d))
      kernels::axpy(s_raw.data(), g, w1_0[c], d);
  for (int t = 1; t <= n; ++t)
    for (int idx = 0; idx < C; ++idx) {
      const double w = w1[static_cast<std::size_t>(t) * C + idx];
      if (w != 0.0)
        kernels::axpy(s_raw.data(), pe[t].df.data() + static_cast<std::size_t>(idx) * d, w, d);
    }
  out.score.resize(d);
  for (int i = 0; i < d; ++i) out.score[i] = s_raw[i] / out.lik;
  if (order < 2) return out;

  const std::size_t dd = static_cast<std::size_t>(d) * d;
  Vec H_raw(dd, 0.0), h_raw(dd, 0.0);
  for (int c = 0; c < M; ++c)
    if (const double* h = nu.hess_slice(c, d))
      kernels::axpy(H_raw.data(), h, w1_0[c], dd);
  for (int t = 1; t <= n; ++t)
    for (int idx = 0; idx < C; ++idx) {
      const double w = w1[static_cast<std::size_t>(t) * C + idx];
      if (w != 0.0) kernels::axpy(H_raw.data(), pe[t].d2f.data() + idx * dd, w, dd);
    }

  auto add_outer = [&](const double* a, const double* b, double w) {
    for (int i = 0; i < d; ++i)
      kernels::axpy(h_raw.data() + static_cast<std::size_t>(i) * d, b, w * a[i], d);
  };
  for (int t2 = 1; t2 <= n; ++t2)
    for (int c0 = 0; c0 < M; ++c0) {
      const double* g0 = nu.grad_row(c0, d);
      if (!g0) continue;
      for (int idx2 = 0; idx2 < C; ++idx2) {
        const double w = w2_0[(static_cast<std::size_t>(t2 - 1) * M + c0) * C + idx2];
        if (w != 0.0)
          add_outer(g0, pe[t2].df.data() + static_cast<std::size_t>(idx2) * d, w);
      }
    }
  for (int t1 = 1; t1 < n; ++t1)
    for (int t2 = t1 + 1; t2 <= n; ++t2) {
      const std::size_t base = pair_offset(t1, t2);
      for (int idx1 = 0; idx1 < C; ++idx1)
        for (int idx2 = 0; idx2 < C; ++idx2) {
          const double w = w2[base + static_cast<std::size_t>(idx1) * C + idx2];
          if (w != 0.0)
            add_outer(pe[t1].df.data() + static_cast<std::size_t>(idx1) * d,
                      pe[t2].df.data() + static_cast<std::size_t>(idx2) * d, w);
        }
    }

  out.hessian.resize(dd);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out.hessian[i * d + j] =
          (H_raw[i * d + j] + h_raw[i * d + j] + h_raw[j * d + i]) / out.lik -
          out.score[i] * out.score[j];
  return out;
}

double brute_force_likelihood(const Model& model, const ParameterVector& theta,
                              const Dataset& data, const InitialDistribution& nu) {
  return brute_force_all(model, theta, data, nu, 0).lik;
}

Vec brute_force_score(const Model& model, const ParameterVector& theta, const Dataset& data,
                      const InitialDistribution& nu) {
  return brute_force_all(model, theta, data, nu, 1).score;
}

Vec brute_force_hessian(const Model& model, const ParameterVector& theta, const Dataset& data,
                        const InitialDistribution& nu) {
  return brute_force_all(model, theta, data, nu, 2).hessian;
}

}  // namespace msf
