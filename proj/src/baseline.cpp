#include "msf/baseline.hpp"

#include <cmath>

#include "msf/kernels.hpp"

namespace msf {

FilterOutput hamilton_filter(const Model& model, const ParameterVector& theta,
                             const Dataset& data, const InitialDistribution& nu) {
  const int K = model.num_regimes();
  const int p = model.markov_order();
  const int M = model.num_tuples();
  const int C = model.num_combos();
  const int n = static_cast<int>(data.n());
  const int head_base = M / K;
  data.validate(p);
  if (static_cast<int>(nu.nu.size()) != M)
    throw ConfigError("initial distribution size does not match K^p");

  FilterOutput out;
  out.K = K;
  out.p = p;
  out.M = M;
  out.filtered.assign(static_cast<std::size_t>(n) * M, 0.0);
  out.predicted.assign(static_cast<std::size_t>(n) * M, 0.0);
  out.joint.assign(static_cast<std::size_t>(n) * C, 0.0);
  out.period_lik.assign(n, 0.0);

  Vec prev(nu.nu);
  PeriodEvaluation pe;
  std::vector<double> qrow(K);
  for (int t = 1; t <= n; ++t) {
    model.eval_period(theta.theta, data, t, 0, pe);
    double* pred = out.predicted.data() + static_cast<std::size_t>(t - 1) * M;
    double* filt = out.filtered.data() + static_cast<std::size_t>(t - 1) * M;
    double* jnt = out.joint.data() + static_cast<std::size_t>(t - 1) * C;

    // predicted regime-tuple probabilities use only the transition part
    for (int from = 0; from < K; ++from) {
      model.transition_row(theta.theta, data.lag(t, 1), data.xrow(t), from, qrow.data());
      for (int s_t = 0; s_t < K; ++s_t)
        for (int pr = 0; pr < M; ++pr) {
          if (pr / head_base != from) continue;
          pred[s_t * head_base + pr / K] += qrow[s_t] * prev[pr];
        }
    }

    double c = 0.0;
    for (int s_t = 0; s_t < K; ++s_t)
      for (int pr = 0; pr < M; ++pr) {
        const double v = prev[pr] * pe.f[s_t * M + pr];
        jnt[s_t * M + pr] = v;
        c += v;
      }
    if (!(c > 0.0))
      throw ImpossibleLikelihoodError("zero period likelihood at t=" + std::to_string(t), t);
    out.period_lik[t - 1] = c;
    out.loglik += std::log(c);
    kernels::scale(jnt, 1.0 / c, C);
    for (int s_t = 0; s_t < K; ++s_t)
      for (int pr = 0; pr < M; ++pr) filt[s_t * head_base + pr / K] += jnt[s_t * M + pr];
    prev.assign(filt, filt + M);
  }
  return out;
}

SmootherOutput kim_smoother(const FilterOutput& filter, const Model& model,
                            const ParameterVector& theta, const Dataset& data) {
  (void)theta;
  (void)data;
  const int K = filter.K, p = filter.p, M = filter.M;
  const int C = K * M;
  const int n = static_cast<int>(filter.period_lik.size());
  const int head_base = M / K;

  SmootherOutput out;
  out.K = K;
  out.p = p;
  out.M = M;
  out.smoothed.assign(static_cast<std::size_t>(n) * M, 0.0);
  out.pairwise.assign(static_cast<std::size_t>(std::max(0, n - 1)) * C, 0.0);
  out.initial_pairwise.assign(C, 0.0);

  // t = n: smoothed equals filtered
  for (int c = 0; c < M; ++c)
    out.smoothed[static_cast<std::size_t>(n - 1) * M + c] =
        filter.filtered[static_cast<std::size_t>(n - 1) * M + c];

  for (int t = n; t >= 1; --t) {
    const double* filt = filter.filtered.data() + static_cast<std::size_t>(t - 1) * M;
    const double* jnt = filter.joint.data() + static_cast<std::size_t>(t - 1) * C;
    const double* smo = out.smoothed.data() + static_cast<std::size_t>(t - 1) * M;
    double* pw = t >= 2 ? out.pairwise.data() + static_cast<std::size_t>(t - 2) * C
                        : out.initial_pairwise.data();
    for (int s_t = 0; s_t < K; ++s_t)
      for (int pr = 0; pr < M; ++pr) {
        const int cn = s_t * head_base + pr / K;
        double ratio = 0.0;
        if (filt[cn] > 0.0) {
          ratio = smo[cn] / filt[cn];
        } else {
          ++out.zero_mass_events;  // 0/0 -> 0
        }
        pw[s_t * M + pr] = jnt[s_t * M + pr] * ratio;
      }
    if (t >= 2) {
      double* smo_prev = out.smoothed.data() + static_cast<std::size_t>(t - 2) * M;
      for (int s_t = 0; s_t < K; ++s_t)
        for (int pr = 0; pr < M; ++pr) smo_prev[pr] += pw[s_t * M + pr];
    }
  }
  return out;
}

Vec smoothed_score(const SmootherOutput& smoother, const Model& model,
                   const ParameterVector& theta, const Dataset& data,
                   const InitialDistribution& nu) {
  const int K = smoother.K, M = smoother.M;
  const int C = K * M;
  const int d = model.param_dim();
  const int n = static_cast<int>(data.n());

  Vec score(d, 0.0);
  PeriodEvaluation pe;
  for (int t = 1; t <= n; ++t) {
    model.eval_period(theta.theta, data, t, 1, pe);
    const double* pw = t >= 2 ? smoother.pairwise.data() + static_cast<std::size_t>(t - 2) * C
                              : smoother.initial_pairwise.data();
    for (int idx = 0; idx < C; ++idx) {
      const double w = pw[idx];
      if (w == 0.0 || pe.f[idx] <= 0.0) continue;
      kernels::axpy(score.data(), pe.df.data() + static_cast<std::size_t>(idx) * d,
                    w / pe.f[idx], d);
    }
  }
  // nu-gradient term: grad log nu weighted by P(Sbar_0 | Y_{1:n})
  if (!nu.grad_nu.empty()) {
    Vec smoothed0(M, 0.0);
    for (int s1 = 0; s1 < K; ++s1)
      for (int pr = 0; pr < M; ++pr) smoothed0[pr] += smoother.initial_pairwise[s1 * M + pr];
    for (int pr = 0; pr < M; ++pr) {
      if (smoothed0[pr] == 0.0 || nu.nu[pr] <= 0.0) continue;
      kernels::axpy(score.data(), nu.grad_row(pr, d), smoothed0[pr] / nu.nu[pr], d);
    }
  }
  return score;
}

}  // namespace msf
