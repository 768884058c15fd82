#include "msf/recursion.hpp"

#include <cmath>

#include "msf/kernels.hpp"

namespace msf {

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "unscaled") return Algorithm::unscaled;
  if (s == "scaled") return Algorithm::scaled;
  if (s == "hybrid") return Algorithm::hybrid;
  throw ConfigError("unknown algorithm: " + s);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::unscaled: return "unscaled";
    case Algorithm::scaled: return "scaled";
    default: return "hybrid";
  }
}

namespace {

// The four forward updates, marginalizing the oldest regime S_{t-p} while
// multiplying in f_t. Writes into the buffers, swaps them in, advances t,
// and returns the sum of the new p-array.
double update_core(RecursionState& st, const PeriodEvaluation& pe) {
  const int K = st.K, d = st.d, M = st.M, order = st.order;
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  const int head_base = M / K;  // K^{p-1}

  st.p_buf.assign(M, 0.0);
  if (order >= 1) st.s_buf.assign(static_cast<std::size_t>(M) * d, 0.0);
  if (order >= 2) {
    st.h_buf.assign(static_cast<std::size_t>(M) * dd, 0.0);
    st.H_buf.assign(static_cast<std::size_t>(M) * dd, 0.0);
  }

  for (int s_t = 0; s_t < K; ++s_t) {
    for (int prev = 0; prev < M; ++prev) {
      const int idx = s_t * M + prev;
      const double f = pe.f[idx];
      const double pprev = st.p_arr[prev];
      const int cn = s_t * head_base + prev / K;
      st.p_buf[cn] += f * pprev;
      if (order >= 1) {
        const double* dfi = pe.df.data() + static_cast<std::size_t>(idx) * d;
        kernels::fma2(st.s_buf.data() + static_cast<std::size_t>(cn) * d,
                      st.s_arr.data() + static_cast<std::size_t>(prev) * d, f, dfi, pprev, d);
        if (order >= 2) {
          kernels::fma2(st.H_buf.data() + cn * dd, st.H_arr.data() + prev * dd, f,
                        pe.d2f.data() + idx * dd, pprev, dd);
          const double* sprev = st.s_arr.data() + static_cast<std::size_t>(prev) * d;
          for (int i = 0; i < d; ++i)
            kernels::fma2(st.h_buf.data() + cn * dd + static_cast<std::size_t>(i) * d,
                          st.h_arr.data() + prev * dd + static_cast<std::size_t>(i) * d, f,
                          dfi, sprev[i], d);
        }
      }
    }
  }

  st.p_arr.swap(st.p_buf);
  if (order >= 1) st.s_arr.swap(st.s_buf);
  if (order >= 2) {
    st.h_arr.swap(st.h_buf);
    st.H_arr.swap(st.H_buf);
  }
  st.t = pe.t;
  return kernels::sum(st.p_arr.data(), st.p_arr.size());
}

void rescale_all(RecursionState& st, double c) {
  const double inv = 1.0 / c;
  kernels::scale(st.p_arr.data(), inv, st.p_arr.size());
  if (st.order >= 1) kernels::scale(st.s_arr.data(), inv, st.s_arr.size());
  if (st.order >= 2) {
    kernels::scale(st.h_arr.data(), inv, st.h_arr.size());
    kernels::scale(st.H_arr.data(), inv, st.H_arr.size());
  }
  st.log_norm_sum += std::log(c);
}

void check_step_preconditions(const RecursionState& st, const PeriodEvaluation& pe) {
  if (pe.t != st.t + 1) throw ConfigError("period evaluation time does not follow state time");
  if (pe.num_combos != st.K * st.M || (st.order >= 1 && pe.order < st.order))
    throw ConfigError("period evaluation shape does not match state");
}

}  // namespace

RecursionState init_state(const Model& model, const ParameterVector& theta, const Dataset& data,
                          const InitialDistribution& nu, int order, Algorithm algorithm,
                          const HybridConfig& cfg) {
  RecursionState st;
  st.K = model.num_regimes();
  st.p = model.markov_order();
  st.d = model.param_dim();
  st.M = model.num_tuples();
  st.order = order;
  st.algorithm = algorithm;
  st.t = 0;

  const std::size_t dd = static_cast<std::size_t>(st.d) * st.d;
  if (static_cast<int>(nu.nu.size()) != st.M)
    throw ConfigError("initial distribution size does not match K^p");
  st.p_arr = nu.nu;
  if (order >= 1) {
    st.s_arr.assign(static_cast<std::size_t>(st.M) * st.d, 0.0);
    if (!nu.grad_nu.empty()) st.s_arr = nu.grad_nu;
  }
  if (order >= 2) {
    st.h_arr.assign(static_cast<std::size_t>(st.M) * dd, 0.0);
    st.H_arr.assign(static_cast<std::size_t>(st.M) * dd, 0.0);
    if (!nu.hess_nu.empty()) st.H_arr = nu.hess_nu;
  }

  PeriodEvaluation pe1;
  model.eval_period(theta.theta, data, 1, order, pe1);
  switch (algorithm) {
    case Algorithm::unscaled:
      step_unscaled(st, pe1);
      break;
    case Algorithm::scaled: {
      const double c = update_core(st, pe1);
      if (!(c > 0.0))
        throw ImpossibleLikelihoodError("zero period likelihood at t=1", 1);
      rescale_all(st, c);
      st.rescaled = true;
      break;
    }
    case Algorithm::hybrid: {
      const double c = update_core(st, pe1);
      if (c <= cfg.threshold()) {
        if (!(c > 0.0))
          throw ImpossibleLikelihoodError("zero period likelihood at t=1", 1);
        rescale_all(st, c);
        st.rescaled = true;
        st.switched_at = 1;
      }
      break;
    }
  }
  return st;
}

void step_unscaled(RecursionState& state, const PeriodEvaluation& pe) {
  check_step_preconditions(state, pe);
  if (state.rescaled) throw ConfigError("state already rescaled; unscaled step not admissible");
  update_core(state, pe);
}

void step_scaled(RecursionState& state, const PeriodEvaluation& pe) {
  check_step_preconditions(state, pe);
  const double c = update_core(state, pe);
  if (!(c > 0.0) || !std::isfinite(c))
    throw ImpossibleLikelihoodError("zero period likelihood at t=" + std::to_string(pe.t), pe.t);
  rescale_all(state, c);
  state.rescaled = true;
}

void step_hybrid(RecursionState& state, const PeriodEvaluation& pe, const HybridConfig& cfg) {
  if (state.rescaled) {
    step_scaled(state, pe);
    return;
  }
  check_step_preconditions(state, pe);
  const double c = update_core(state, pe);
  if (c <= cfg.threshold()) {  // one-way flag; ties trigger the switch
    if (!(c > 0.0))
      throw ImpossibleLikelihoodError("zero path likelihood at t=" + std::to_string(pe.t), pe.t);
    rescale_all(state, c);
    state.rescaled = true;
    state.switched_at = pe.t;
  }
}

ScoreHessianResult finalize(const RecursionState& state) {
  const int d = state.d, M = state.M, order = state.order;
  const std::size_t dd = static_cast<std::size_t>(d) * d;

  ScoreHessianResult out;
  out.order = order;
  out.switched_at = state.switched_at;

  const double P = kernels::sum(state.p_arr.data(), M);
  Vec s_tot, h_tot, H_tot;
  if (order >= 1) {
    s_tot.assign(d, 0.0);
    for (int c = 0; c < M; ++c)
      kernels::axpy(s_tot.data(), state.s_arr.data() + static_cast<std::size_t>(c) * d, 1.0, d);
  }
  if (order >= 2) {
    h_tot.assign(dd, 0.0);
    H_tot.assign(dd, 0.0);
    for (int c = 0; c < M; ++c) {
      kernels::axpy(h_tot.data(), state.h_arr.data() + c * dd, 1.0, dd);
      kernels::axpy(H_tot.data(), state.H_arr.data() + c * dd, 1.0, dd);
    }
  }

  if (!state.rescaled) {
    if (!(P > 0.0))
      throw UnderflowError(
          "unscaled recursion underflowed (p_n = 0); use the hybrid or scaled algorithm");
    out.loglik = std::log(P);
    if (order >= 1) {
      out.score.resize(d);
      for (int i = 0; i < d; ++i) out.score[i] = s_tot[i] / P;
    }
    if (order >= 2) {
      out.hessian.resize(dd);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          out.hessian[i * d + j] = (H_tot[i * d + j] + h_tot[i * d + j] + h_tot[j * d + i]) / P -
                                   out.score[i] * out.score[j];
    }
  } else {
    // After the last rescale the p-array sums to 1, so log p_n is the
    // accumulated sum of log period normalizers.
    out.loglik = state.log_norm_sum;
    if (order >= 1) out.score = s_tot;
    if (order >= 2) {
      out.hessian.resize(dd);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          out.hessian[i * d + j] = H_tot[i * d + j] + h_tot[i * d + j] + h_tot[j * d + i] -
                                   s_tot[i] * s_tot[j];
    }
  }
  return out;
}

ScoreHessianResult loglik_score_hessian(const Model& model, const ParameterVector& theta,
                                        const Dataset& data, const InitialDistribution& nu,
                                        int order, Algorithm algorithm, const HybridConfig& cfg) {
  if (static_cast<int>(theta.dim()) != model.param_dim())
    throw ConfigError("parameter vector length does not match model dimension");
  data.validate(model.markov_order());
  if (model.covariates_used() > static_cast<int>(data.ncov))
    throw ConfigError("model uses more covariate columns than the dataset provides");

  RecursionState st = init_state(model, theta, data, nu, order, algorithm, cfg);
  PeriodEvaluation pe;
  const int n = static_cast<int>(data.n());
  for (int t = 2; t <= n; ++t) {
    model.eval_period(theta.theta, data, t, order, pe);
    switch (algorithm) {
      case Algorithm::unscaled: step_unscaled(st, pe); break;
      case Algorithm::scaled: step_scaled(st, pe); break;
      case Algorithm::hybrid: step_hybrid(st, pe, cfg); break;
    }
  }
  return finalize(st);
}

}  // namespace msf
