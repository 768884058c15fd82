#include "msf/estimation.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "msf/errors.hpp"

namespace msf {

namespace {

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double loglik_only(const Model& model, const ParameterVector& theta, const Dataset& data,
                   const InitialDistribution& nu, Algorithm alg) {
  return loglik_score_hessian(model, theta, data, nu, 0, alg).loglik;
}

}  // namespace

FitResult newton_fit(const Model& model, const ParameterVector& theta0, const Dataset& data,
                     const InitialDistribution& nu, const NewtonOptions& opts) {
  const int d = model.param_dim();
  FitResult res;
  res.theta_hat = theta0;

  ScoreHessianResult cur = loglik_score_hessian(model, res.theta_hat, data, nu, 2, opts.algorithm);
  res.path.push_back({cur.loglik, max_abs(cur.score), 0.0});

  for (int it = 0; it < opts.max_iter; ++it) {
    if (max_abs(cur.score) <= opts.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> H(
        cur.hessian.data(), d, d);
    Eigen::Map<const Eigen::VectorXd> g(cur.score.data(), d);
    Eigen::MatrixXd A = -0.5 * (H + H.transpose());  // symmetrize against roundoff
    double lambda = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    while (llt.info() != Eigen::Success) {
      lambda = lambda == 0.0 ? 1e-8 : 2.0 * lambda;
      if (lambda > 1e12) throw StalledFitError("Newton direction solve failed", res.theta_hat.theta);
      llt.compute(A + lambda * Eigen::MatrixXd::Identity(d, d));
    }
    Eigen::VectorXd dir = llt.solve(g);

    // Near a stationary point the attainable increase (~ g'dir / 2) drops
    // below the roundoff noise of the log-likelihood itself; the full Newton
    // step is then a polishing step and must not be rejected for failing a
    // strict-ascent test it cannot numerically pass.
    const double noise = 1e-11 * std::max(1.0, std::abs(cur.loglik));
    const bool polishing = 0.5 * g.dot(dir) <= noise;

    double step = 1.0;
    bool moved = false;
    ParameterVector cand = res.theta_hat;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (int i = 0; i < d; ++i) cand.theta[i] = res.theta_hat.theta[i] + step * dir[i];
      double ll;
      try {
        ll = loglik_only(model, cand, data, nu, opts.algorithm);
      } catch (const Error&) {
        step *= 0.5;  // candidate left the admissible region
        continue;
      }
      if (std::isfinite(ll) && (ll > cur.loglik || (polishing && h == 0 && ll >= cur.loglik - noise))) {
        res.theta_hat = cand;
        cur = loglik_score_hessian(model, res.theta_hat, data, nu, 2, opts.algorithm);
        res.path.push_back({cur.loglik, max_abs(cur.score), step});
        moved = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!moved)
      throw StalledFitError("line search found no ascent step", res.theta_hat.theta);
  }

  if (!res.converged && max_abs(cur.score) <= opts.grad_tol) res.converged = true;
  res.loglik = cur.loglik;
  res.score = cur.score;
  res.hessian = cur.hessian;
  return res;
}

StandardErrors standard_errors(const Vec& hessian, int d) {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> H(
      hessian.data(), d, d);
  Eigen::MatrixXd info = -0.5 * (H + H.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success)
    throw NonInvertibleInformationError("observed information is not positive definite");
  Eigen::MatrixXd V = llt.solve(Eigen::MatrixXd::Identity(d, d));
  StandardErrors out;
  out.vcov.resize((size_t)d * d);
  out.se.resize(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out.vcov[(size_t)i * d + j] = V(i, j);
    out.se[i] = std::sqrt(V(i, i));
  }
  return out;
}

GradientCheckReport gradient_check(const Model& model, const ParameterVector& theta,
                                   const Dataset& data, const InitialDistribution& nu,
                                   double step) {
  const int d = model.param_dim();
  GradientCheckReport rep;

  ScoreHessianResult an = loglik_score_hessian(model, theta, data, nu, 2, Algorithm::hybrid);
  rep.analytic_score = an.score;
  rep.analytic_hessian = an.hessian;
  rep.fd_score.assign(d, 0.0);
  rep.fd_hessian.assign((size_t)d * d, 0.0);
  rep.score_rel_err.assign(d, 0.0);
  rep.hess_rel_err.assign((size_t)d * d, 0.0);

  // When nu carries theta-derivatives (ergodic initial distribution), the
  // finite-difference evaluations must move nu along with theta; we use the
  // second-order family implied by (nu, grad_nu, hess_nu), which is exact to
  // the order being checked.
  const int M = (int)nu.nu.size();
  auto nu_shifted = [&](int j, double h) {
    if (nu.grad_nu.empty()) return nu;
    InitialDistribution out = nu;
    for (int code = 0; code < M; ++code) {
      const double* g = nu.grad_row(code, d);
      const double* hs = nu.hess_slice(code, d);
      out.nu[code] += h * g[j];
      if (hs) {
        out.nu[code] += 0.5 * h * h * hs[(size_t)j * d + j];
        for (int i = 0; i < d; ++i)
          out.grad_nu[(size_t)code * d + i] += h * hs[(size_t)i * d + j];
      }
    }
    return out;
  };

  ParameterVector th = theta;
  for (int j = 0; j < d; ++j) {
    th.theta[j] = theta.theta[j] + step;
    const ScoreHessianResult up =
        loglik_score_hessian(model, th, data, nu_shifted(j, step), 1, Algorithm::hybrid);
    th.theta[j] = theta.theta[j] - step;
    const ScoreHessianResult dn =
        loglik_score_hessian(model, th, data, nu_shifted(j, -step), 1, Algorithm::hybrid);
    th.theta[j] = theta.theta[j];

    rep.fd_score[j] = (up.loglik - dn.loglik) / (2.0 * step);
    rep.score_rel_err[j] = std::abs(rep.fd_score[j] - an.score[j]) /
                           std::max(1.0, std::abs(an.score[j]));
    rep.max_score_rel_err = std::max(rep.max_score_rel_err, rep.score_rel_err[j]);

    for (int i = 0; i < d; ++i) {
      const double fd = (up.score[i] - dn.score[i]) / (2.0 * step);
      rep.fd_hessian[(size_t)i * d + j] = fd;
      const double rel = std::abs(fd - an.hessian[(size_t)i * d + j]) /
                         std::max(1.0, std::abs(an.hessian[(size_t)i * d + j]));
      rep.hess_rel_err[(size_t)i * d + j] = rel;
      rep.max_hess_rel_err = std::max(rep.max_hess_rel_err, rel);
    }
  }
  rep.ok = rep.max_score_rel_err <= 1e-5 && rep.max_hess_rel_err <= 1e-4;
  return rep;
}

}  // namespace msf
