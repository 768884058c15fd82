#ifndef MSF_EM_HPP
#define MSF_EM_HPP

#include <functional>

#include "msf/model.hpp"
#include "msf/recursion.hpp"

namespace msf {

// Vector-valued per-period statistic r_t(S_t, Sbar_{t-1}); batching many
// statistics into one functional keeps the whole E-step a single forward
// pass. `eval` receives a zeroed buffer of length dim and fills the
// components; `eval0` (optional) supplies the t=0 term over Sbar_0 tuples.
struct AdditiveFunctional {
  int dim = 0;
  std::function<void(int t, int combo_idx, double* out)> eval;
  std::function<void(int tuple0_code, double* out)> eval0;
};

struct SufficientStats {
  Vec stats;
  double loglik = 0.0;

  // layout of the built-in E-step batch (offsets into stats)
  int K = 0, ar = 0, num_combos = 0, moment_len = 0;
  int occ_off = 0, pair_off = 0, pair0_off = 0, ysum_off = 0, y2sum_off = 0, moment_off = 0;

  double occ(int j) const { return stats[occ_off + j]; }
  double pair(int i, int j) const { return stats[pair_off + i * K + j]; }
  // smoothed mass of the t = 1 transition out of the presample regime S_0;
  // the complete-data transition term covers t = 1..n, so the M-step needs it
  double pair0(int i, int j) const { return stats[pair0_off + i * K + j]; }
  double ysum(int j) const { return stats[ysum_off + j]; }
  double y2sum(int j) const { return stats[y2sum_off + j]; }
};

// Computes sum_t E[r_t(S_t, Sbar_{t-1}) | Y_{1:n}] by the score recursion
// with grad f replaced by r*f; single rescaled forward pass, no stored
// filtered probabilities.
SufficientStats smoothed_additive_functional(const Model& model, const ParameterVector& theta,
                                             const Dataset& data, const InitialDistribution& nu,
                                             const AdditiveFunctional& r);

// One forward pass batching occupancies, transition pair masses (t = 2..n),
// weighted observation moments, and (when ar_lags > 0) per-tuple cross
// moments of (1, Y_t, ..., Y_{t-ar}).
SufficientStats e_step(const Model& model, const ParameterVector& theta, const Dataset& data,
                       const InitialDistribution& nu);

// Closed-form updates for the Gaussian built-in; TVTP transitions use an
// inner Newton solve on the expected complete-data transition
// log-likelihood. The (theta, data, nu) context of the producing e_step is
// required for that solve.
ParameterVector m_step(const Model& model, const SufficientStats& stats,
                       const ParameterVector& theta_at_estep, const Dataset& data,
                       const InitialDistribution& nu);

struct EmResult {
  ParameterVector theta;
  std::vector<double> loglik_trace;  // loglik at each iterate, starting at theta0
  int iterations = 0;
  bool converged = false;
};

struct EmOptions {
  double tol = 1e-8;
  int max_iter = 200;
  bool update_nu_ergodic = false;  // re-set nu to the ergodic distribution each iteration
};

EmResult em_fit(const Model& model, const ParameterVector& theta0, const Dataset& data,
                const InitialDistribution& nu, double tol, int max_iter,
                bool update_nu_ergodic = false);

}  // namespace msf

#endif
