#include "msf/em.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <array>
#include <cstring>

#include "msf/errors.hpp"
#include "msf/gaussian_model.hpp"
#include "msf/initial_distribution.hpp"
#include "msf/kernels.hpp"
#include "msf/recursion.hpp"
#include "msf/regime_tuple.hpp"
#include "msf/tvtp_model.hpp"

namespace msf {

namespace {

constexpr double kOccupancyFloor = 1e-9;
constexpr double kProbFloor = 1e-12;
constexpr double kVarFloor = 1e-12;

}  // namespace

SufficientStats smoothed_additive_functional(const Model& model, const ParameterVector& theta,
                                             const Dataset& data, const InitialDistribution& nu,
                                             const AdditiveFunctional& r) {
  const int K = model.num_regimes();
  const int p = model.markov_order();
  const int M = (int)ipow(K, p);
  const int mr = r.dim;
  const int n = data.n();
  data.validate(p);
  if ((int)nu.nu.size() != M) throw ConfigError("initial distribution has wrong length");

  Vec p_arr(nu.nu), p_buf(M, 0.0);
  Vec R_arr((size_t)M * mr, 0.0), R_buf((size_t)M * mr, 0.0);
  if (r.eval0) {
    Vec r0(mr);
    for (int tau = 0; tau < M; ++tau) {
      std::fill(r0.begin(), r0.end(), 0.0);
      r.eval0(tau, r0.data());
      kernels::axpy(&R_arr[(size_t)tau * mr], r0.data(), p_arr[tau], mr);
    }
  }

  PeriodEvaluation pe;
  Vec rbuf(mr);
  double lls = 0.0;
  for (int t = 1; t <= n; ++t) {
    pe = evaluate_period(model, theta, data, t, 0);
    std::fill(p_buf.begin(), p_buf.end(), 0.0);
    std::fill(R_buf.begin(), R_buf.end(), 0.0);
    for (int st = 0; st < K; ++st) {
      for (int prev = 0; prev < M; ++prev) {
        const int idx = st * M + prev;
        const double f = pe.f[idx];
        const double pp = p_arr[prev];
        if (f == 0.0 && pp == 0.0) continue;
        const int cn = shift_tuple(prev, st, K, p);
        p_buf[cn] += f * pp;
        std::fill(rbuf.begin(), rbuf.end(), 0.0);
        r.eval(t, idx, rbuf.data());
        kernels::fma2(&R_buf[(size_t)cn * mr], &R_arr[(size_t)prev * mr], f, rbuf.data(), f * pp,
                      mr);
      }
    }
    p_arr.swap(p_buf);
    R_arr.swap(R_buf);
    const double c = kernels::sum(p_arr.data(), M);
    if (!(c > 0.0) || !std::isfinite(c))
      throw ImpossibleLikelihoodError("period likelihood is zero at t=" + std::to_string(t), t);
    const double inv = 1.0 / c;
    kernels::scale(p_arr.data(), inv, M);
    kernels::scale(R_arr.data(), inv, (size_t)M * mr);
    lls += std::log(c);
  }

  SufficientStats out;
  out.stats.assign(mr, 0.0);
  for (int tau = 0; tau < M; ++tau)
    kernels::axpy(out.stats.data(), &R_arr[(size_t)tau * mr], 1.0, mr);
  out.loglik = lls;
  return out;
}

SufficientStats e_step(const Model& model, const ParameterVector& theta, const Dataset& data,
                       const InitialDistribution& nu) {
  const int K = model.num_regimes();
  const int p = model.markov_order();
  const int M = (int)ipow(K, p);
  const int C = K * M;
  const int head_base = (int)ipow(K, p - 1);

  int ar = 0;
  if (auto* g = dynamic_cast<const GaussianSwitchingModel*>(&model)) ar = g->ar_lags();

  const int zlen = ar + 2;  // (1, Y_t, Y_{t-1}, ..., Y_{t-ar})
  const int L = ar > 0 ? zlen * (zlen + 1) / 2 : 0;

  AdditiveFunctional r;
  const int occ_off = 0;
  const int pair_off = occ_off + K;       // t = 2..n transitions
  const int pair0_off = pair_off + K * K; // the t = 1 transition from S_0
  const int ysum_off = pair0_off + K * K;
  const int y2sum_off = ysum_off + K;
  const int moment_off = y2sum_off + K;
  r.dim = moment_off + C * L;
  r.eval = [&, K, M, head_base, ar, zlen, L](int t, int idx, double* out) {
    const int st = idx / M;
    const int prev = idx % M;
    out[occ_off + st] = 1.0;
    const int from = prev / head_base;
    out[(t >= 2 ? pair_off : pair0_off) + from * K + st] = 1.0;
    const double yt = data.lag(t, 0);
    out[ysum_off + st] = yt;
    out[y2sum_off + st] = yt * yt;
    if (ar > 0) {
      double z[8];
      z[0] = 1.0;
      for (int a = 0; a <= ar; ++a) z[1 + a] = data.lag(t, a);
      double* m = out + moment_off + (size_t)idx * L;
      int k = 0;
      for (int i = 0; i < zlen; ++i)
        for (int j = i; j < zlen; ++j) m[k++] = z[i] * z[j];
    }
  };

  SufficientStats s = smoothed_additive_functional(model, theta, data, nu, r);
  s.K = K;
  s.ar = ar;
  s.num_combos = C;
  s.moment_len = L;
  s.occ_off = occ_off;
  s.pair_off = pair_off;
  s.pair0_off = pair0_off;
  s.ysum_off = ysum_off;
  s.y2sum_off = y2sum_off;
  s.moment_off = moment_off;
  return s;
}

namespace {

void check_occupancy(const SufficientStats& s) {
  for (int j = 0; j < s.K; ++j)
    if (s.occ(j) < kOccupancyFloor)
      throw DegenerateRegimeError(
          "regime " + std::to_string(j + 1) + " has vanishing smoothed occupancy", j + 1);
}

// logits from a probability row, reference category K-1, with flooring
void row_to_logits(const double* row, int K, double* eta) {
  Vec q(row, row + K);
  double tot = 0.0;
  for (int j = 0; j < K; ++j) {
    if (q[j] < kProbFloor) q[j] = kProbFloor;
    tot += q[j];
  }
  for (int j = 0; j < K - 1; ++j) eta[j] = std::log(q[j] / tot) - std::log(q[K - 1] / tot);
}

// symmetric moment matrix of (1, Y_t, ..., Y_{t-ar}) for one combo
Eigen::MatrixXd moment_matrix(const SufficientStats& s, int combo, int zlen) {
  Eigen::MatrixXd Mc(zlen, zlen);
  const double* m = &s.stats[s.moment_off + (size_t)combo * s.moment_len];
  int k = 0;
  for (int i = 0; i < zlen; ++i)
    for (int j = i; j < zlen; ++j) {
      Mc(i, j) = m[k];
      Mc(j, i) = m[k];
      ++k;
    }
  return Mc;
}

ParameterVector m_step_gaussian(const GaussianSwitchingModel& g, const SufficientStats& s,
                                const ParameterVector& theta_at_estep) {
  const int K = g.num_regimes();
  const int ar = g.ar_lags();
  const int p = g.markov_order();
  const int M = (int)ipow(K, p);
  ParameterVector out = theta_at_estep;
  check_occupancy(s);

  if (ar == 0) {
    for (int j = 0; j < K; ++j) out.theta[g.mu_offset() + j] = s.ysum(j) / s.occ(j);
    if (g.switching_variance()) {
      for (int j = 0; j < K; ++j) {
        const double mu = out.theta[g.mu_offset() + j];
        const double v = std::max(kVarFloor, s.y2sum(j) / s.occ(j) - mu * mu);
        out.theta[g.logvar_offset() + j] = std::log(v);
      }
    } else {
      double ss = 0.0, w = 0.0;
      for (int j = 0; j < K; ++j) {
        const double mu = out.theta[g.mu_offset() + j];
        ss += s.y2sum(j) - mu * mu * s.occ(j);
        w += s.occ(j);
      }
      out.theta[g.logvar_offset()] = std::log(std::max(kVarFloor, ss / w));
    }
  } else {
    // Coordinate ascent on the expected complete-data density term: each of
    // the mu / phi / variance blocks has an exact weighted-least-squares
    // update given the others, so every cycle is monotone in Q.
    const int zlen = ar + 2;
    const int C = s.num_combos;
    Eigen::VectorXd mu(K);
    Eigen::VectorXd phi(ar);
    Vec lam(g.num_logvars());
    for (int j = 0; j < K; ++j) mu[j] = out.theta[g.mu_offset() + j];
    for (int a = 0; a < ar; ++a) phi[a] = out.theta[g.phi_offset() + a];
    for (int j = 0; j < g.num_logvars(); ++j) lam[j] = out.theta[g.logvar_offset() + j];

    std::vector<Eigen::MatrixXd> Mc(C);
    std::vector<std::array<int, 8>> digs(C);
    for (int c = 0; c < C; ++c) {
      Mc[c] = moment_matrix(s, c, zlen);
      digs[c][0] = c / M;
      decode_tuple(c % M, K, p, digs[c].data() + 1);
    }
    auto omega = [&](int c) { return std::exp(-lam[g.switching_variance() ? digs[c][0] : 0]); };

    for (int cycle = 0; cycle < 8; ++cycle) {
      // mu given phi, lam
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, K);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
      for (int c = 0; c < C; ++c) {
        Eigen::VectorXd gamma = Eigen::VectorXd::Zero(K);
        gamma[digs[c][0]] -= 1.0;
        for (int a = 1; a <= ar; ++a) gamma[digs[c][a]] += phi[a - 1];
        Eigen::VectorXd arest(zlen);
        arest.setZero();
        arest[1] = 1.0;
        for (int a = 1; a <= ar; ++a) arest[1 + a] = -phi[a - 1];
        const double w = omega(c);
        A += w * Mc[c](0, 0) * gamma * gamma.transpose();
        b -= w * (Mc[c].row(0).dot(arest)) * gamma;
      }
      mu = A.ldlt().solve(b);

      // phi given mu, lam
      Eigen::MatrixXd Ap = Eigen::MatrixXd::Zero(ar, ar);
      Eigen::VectorXd bp = Eigen::VectorXd::Zero(ar);
      for (int c = 0; c < C; ++c) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(zlen);
        u[0] = -mu[digs[c][0]];
        u[1] = 1.0;
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(zlen, ar);
        for (int a = 1; a <= ar; ++a) {
          V(0, a - 1) = mu[digs[c][a]];
          V(1 + a, a - 1) = -1.0;
        }
        const double w = omega(c);
        Ap += w * V.transpose() * Mc[c] * V;
        bp -= w * V.transpose() * (Mc[c] * u);
      }
      phi = Ap.ldlt().solve(bp);

      // lam given mu, phi
      Vec ssq(K, 0.0), wsum(K, 0.0);
      for (int c = 0; c < C; ++c) {
        Eigen::VectorXd a(zlen);
        a[0] = -mu[digs[c][0]];
        a[1] = 1.0;
        for (int aa = 1; aa <= ar; ++aa) {
          a[0] += phi[aa - 1] * mu[digs[c][aa]];
          a[1 + aa] = -phi[aa - 1];
        }
        const double q = a.dot(Mc[c] * a);
        ssq[digs[c][0]] += q;
        wsum[digs[c][0]] += Mc[c](0, 0);
      }
      if (g.switching_variance()) {
        for (int j = 0; j < K; ++j) lam[j] = std::log(std::max(kVarFloor, ssq[j] / wsum[j]));
      } else {
        double num = 0.0, den = 0.0;
        for (int j = 0; j < K; ++j) {
          num += ssq[j];
          den += wsum[j];
        }
        lam[0] = std::log(std::max(kVarFloor, num / den));
      }
    }
    for (int j = 0; j < K; ++j) out.theta[g.mu_offset() + j] = mu[j];
    for (int a = 0; a < ar; ++a) out.theta[g.phi_offset() + a] = phi[a];
    for (int j = 0; j < g.num_logvars(); ++j) out.theta[g.logvar_offset() + j] = lam[j];
  }

  // transition logits from aggregated pair masses over t = 1..n
  for (int i = 0; i < K; ++i) {
    Vec row(K);
    double tot = 0.0;
    for (int j = 0; j < K; ++j) tot += s.pair(i, j) + s.pair0(i, j);
    if (tot <= 0.0)
      throw DegenerateRegimeError(
          "regime " + std::to_string(i + 1) + " has no smoothed transition mass", i + 1);
    for (int j = 0; j < K; ++j) row[j] = (s.pair(i, j) + s.pair0(i, j)) / tot;
    row_to_logits(row.data(), K, &out.theta[g.logit_offset() + (size_t)i * (K - 1)]);
  }
  return out;
}

// Expected complete-data transition log-likelihood for TVTP, with gradient
// and Hessian in the logit coefficients; one rescaled forward pass per
// evaluation point.
struct TvtpQ {
  double Q;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
};

TvtpQ tvtp_transition_q(const TvtpModel& m, const ParameterVector& theta_weights,
                        const Dataset& data, const InitialDistribution& nu,
                        const Eigen::VectorXd& coef) {
  const int K = m.num_regimes();
  const int clen = m.feature_dim();
  const int nc = m.num_coefs();

  AdditiveFunctional r;
  r.dim = 1 + nc + nc * nc;
  r.eval = [&](int t, int idx, double* out) {
    const int st = idx / K;
    const int from = idx % K;
    double z[16];
    z[0] = 1.0;
    z[1] = data.lag(t, 1);
    const double* xr = data.xrow(t);
    for (int c = 0; c < clen - 2; ++c) z[2 + c] = xr[c];
    Vec eta(K, 0.0), q(K);
    for (int j = 0; j < K - 1; ++j) {
      double e = 0.0;
      for (int c = 0; c < clen; ++c) e += coef[(from * (K - 1) + j) * clen + c] * z[c];
      eta[j] = e;
    }
    double mx = 0.0;
    for (int j = 0; j < K; ++j) mx = std::max(mx, eta[j]);
    double tot = 0.0;
    for (int j = 0; j < K; ++j) {
      q[j] = std::exp(eta[j] - mx);
      tot += q[j];
    }
    for (int j = 0; j < K; ++j) q[j] /= tot;
    out[0] = std::log(std::max(q[st], 1e-300));
    double* gr = out + 1;
    double* he = out + 1 + nc;
    for (int l = 0; l < K - 1; ++l) {
      const double gl = ((st == l) ? 1.0 : 0.0) - q[l];
      for (int c = 0; c < clen; ++c) gr[(from * (K - 1) + l) * clen + c] = gl * z[c];
    }
    for (int l = 0; l < K - 1; ++l)
      for (int l2 = 0; l2 < K - 1; ++l2) {
        const double hll = -q[l] * (((l == l2) ? 1.0 : 0.0) - q[l2]);
        for (int c = 0; c < clen; ++c)
          for (int c2 = 0; c2 < clen; ++c2) {
            const int row = (from * (K - 1) + l) * clen + c;
            const int col = (from * (K - 1) + l2) * clen + c2;
            he[(size_t)row * nc + col] = hll * z[c] * z[c2];
          }
      }
  };

  SufficientStats s = smoothed_additive_functional(m, theta_weights, data, nu, r);
  TvtpQ out;
  out.Q = s.stats[0];
  out.g = Eigen::Map<Eigen::VectorXd>(&s.stats[1], nc);
  out.H = Eigen::Map<Eigen::MatrixXd>(&s.stats[1 + nc], nc, nc);
  return out;
}

ParameterVector m_step_tvtp(const TvtpModel& m, const SufficientStats& s,
                            const ParameterVector& theta_at_estep, const Dataset& data,
                            const InitialDistribution& nu) {
  const int K = m.num_regimes();
  ParameterVector out = theta_at_estep;
  check_occupancy(s);

  for (int j = 0; j < K; ++j) {
    const double mu = s.ysum(j) / s.occ(j);
    out.theta[m.mu_offset() + j] = mu;
    out.theta[m.logvar_offset() + j] =
        std::log(std::max(kVarFloor, s.y2sum(j) / s.occ(j) - mu * mu));
  }

  const int nc = m.num_coefs();
  Eigen::VectorXd coef(nc);
  for (int i = 0; i < nc; ++i) coef[i] = theta_at_estep.theta[m.coef_offset() + i];

  // Q is concave in the logit coefficients; plain Newton with halving.
  TvtpQ cur = tvtp_transition_q(m, theta_at_estep, data, nu, coef);
  for (int it = 0; it < 50; ++it) {
    if (cur.g.lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, std::abs(cur.Q))) break;
    Eigen::MatrixXd A = -cur.H;
    double ridge = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    while (llt.info() != Eigen::Success) {
      ridge = ridge == 0.0 ? 1e-8 : ridge * 10.0;
      llt.compute(A + ridge * Eigen::MatrixXd::Identity(nc, nc));
      if (ridge > 1e8) throw StalledFitError("TVTP M-step Hessian not invertible", {});
    }
    Eigen::VectorXd dir = llt.solve(cur.g);
    double step = 1.0;
    bool moved = false;
    for (int h = 0; h < 30; ++h) {
      TvtpQ cand = tvtp_transition_q(m, theta_at_estep, data, nu, coef + step * dir);
      if (cand.Q >= cur.Q) {
        coef += step * dir;
        cur = cand;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  for (int i = 0; i < nc; ++i) out.theta[m.coef_offset() + i] = coef[i];
  return out;
}

}  // namespace

ParameterVector m_step(const Model& model, const SufficientStats& stats,
                       const ParameterVector& theta_at_estep, const Dataset& data,
                       const InitialDistribution& nu) {
  if (auto* g = dynamic_cast<const GaussianSwitchingModel*>(&model))
    return m_step_gaussian(*g, stats, theta_at_estep);
  if (auto* t = dynamic_cast<const TvtpModel*>(&model))
    return m_step_tvtp(*t, stats, theta_at_estep, data, nu);
  throw ConfigError("EM M-step is only implemented for the built-in model families");
}

EmResult em_fit(const Model& model, const ParameterVector& theta0, const Dataset& data,
                const InitialDistribution& nu, double tol, int max_iter,
                bool update_nu_ergodic) {
  EmResult res;
  res.theta = theta0;
  InitialDistribution nu_cur = nu;
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    SufficientStats s = e_step(model, res.theta, data, nu_cur);
    res.loglik_trace.push_back(s.loglik);
    if (it > 0 && s.loglik < prev_ll - 1e-10 * std::max(1.0, std::abs(prev_ll)))
      throw InternalConsistencyError("EM log-likelihood decreased: " + std::to_string(prev_ll) +
                                     " -> " + std::to_string(s.loglik));
    if (it > 0 && std::abs(s.loglik - prev_ll) <= tol) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    prev_ll = s.loglik;
    res.theta = m_step(model, s, res.theta, data, nu_cur);
    if (update_nu_ergodic)
      nu_cur = default_initial_distribution(model, res.theta, InitialMode::ergodic, nullptr, 0);
    res.iterations = it + 1;
  }
  return res;
}

}  // namespace msf
