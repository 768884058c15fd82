#ifndef MSF_ESTIMATION_HPP
#define MSF_ESTIMATION_HPP

#include "msf/model.hpp"
#include "msf/recursion.hpp"

namespace msf {

struct NewtonOptions {
  double grad_tol = 1e-6;  // convergence on the max-abs score component
  int max_iter = 100;
  int max_halvings = 30;
  Algorithm algorithm = Algorithm::hybrid;
};

struct FitIterate {
  double loglik;
  double grad_norm;  // max-abs score at the iterate
  double step;       // line-search step that produced it (0 for theta0)
};

struct FitResult {
  ParameterVector theta_hat;
  double loglik = 0.0;
  Vec score;
  Vec hessian;  // d x d, row-major, at theta_hat
  bool converged = false;
  int iterations = 0;
  std::vector<FitIterate> path;
};

// Damped Newton ascent on the exact log-likelihood: direction solves
// (-H + lambda I) dir = score with lambda doubled from 1e-8 until the shifted
// matrix is positive definite, then a halving line search on the
// log-likelihood. Throws StalledFitError when no ascent step exists.
FitResult newton_fit(const Model& model, const ParameterVector& theta0, const Dataset& data,
                     const InitialDistribution& nu, const NewtonOptions& opts = {});

struct StandardErrors {
  Vec se;    // d
  Vec vcov;  // d x d row-major, inverse observed information
};

// Inverts the observed information -H at theta_hat. Throws
// NonInvertibleInformationError unless -H is positive definite.
StandardErrors standard_errors(const Vec& hessian, int d);

struct GradientCheckReport {
  Vec analytic_score, fd_score, score_rel_err;
  Vec analytic_hessian, fd_hessian, hess_rel_err;  // d x d
  double max_score_rel_err = 0.0;
  double max_hess_rel_err = 0.0;
  bool ok = false;  // score within 1e-5, Hessian within 1e-4 (relative)
};

// Central finite differences of the log-likelihood (for the score) and of
// the analytic score (for the Hessian) against the recursion output.
GradientCheckReport gradient_check(const Model& model, const ParameterVector& theta,
                                   const Dataset& data, const InitialDistribution& nu,
                                   double step = 1e-6);

}  // namespace msf

#endif
