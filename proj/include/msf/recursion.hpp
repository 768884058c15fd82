#ifndef MSF_RECURSION_HPP
#define MSF_RECURSION_HPP

#include <limits>
#include <optional>

#include "msf/model.hpp"

namespace msf {

enum class Algorithm { unscaled, scaled, hybrid };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);

struct HybridConfig {
  double B = 1000.0;  // threshold multiplier on the unit roundoff
  double eps = std::numeric_limits<double>::epsilon();

  double threshold() const { return B * eps; }
};

// Log-likelihood value with its exact score vector and Hessian matrix from a
// single forward pass.
struct ScoreHessianResult {
  double loglik = 0.0;
  Vec score;    // d (order >= 1)
  Vec hessian;  // d*d row-major (order >= 2)
  std::optional<int> switched_at;  // hybrid switch time, if any
  int order = 2;
};

// Per-regime-tuple forward arrays p_t, s_t, h_t, H_t (or their rescaled
// tilde variants once `rescaled` is set) plus scaling bookkeeping. h is not
// symmetric; the symmetrization h + h^T enters only at finalize.
struct RecursionState {
  int t = 0;
  int K = 0, p = 0, d = 0, order = 2;
  int M = 0;  // K^p
  Algorithm algorithm = Algorithm::hybrid;
  bool rescaled = false;
  double log_norm_sum = 0.0;  // sum of log c_k over performed rescales
  std::optional<int> switched_at;

  Vec p_arr;  // M
  Vec s_arr;  // M*d
  Vec h_arr;  // M*d*d
  Vec H_arr;  // M*d*d
  Vec p_buf, s_buf, h_buf, H_buf;  // double buffers for the step

  std::size_t state_bytes() const {
    return (p_arr.size() + s_arr.size() + h_arr.size() + H_arr.size() + p_buf.size() +
            s_buf.size() + h_buf.size() + H_buf.size()) *
           sizeof(double);
  }
};

// Builds the t=0 state from nu and performs the t=1 step (including the
// re-scale / threshold handling the chosen algorithm prescribes).
RecursionState init_state(const Model& model, const ParameterVector& theta, const Dataset& data,
                          const InitialDistribution& nu, int order, Algorithm algorithm,
                          const HybridConfig& cfg = {});

void step_unscaled(RecursionState& state, const PeriodEvaluation& pe);
void step_scaled(RecursionState& state, const PeriodEvaluation& pe);
void step_hybrid(RecursionState& state, const PeriodEvaluation& pe, const HybridConfig& cfg);

ScoreHessianResult finalize(const RecursionState& state);

// Single forward pass over t = 1..n. order=0 computes only the likelihood,
// order=1 adds the score, order=2 the Hessian.
ScoreHessianResult loglik_score_hessian(const Model& model, const ParameterVector& theta,
                                        const Dataset& data, const InitialDistribution& nu,
                                        int order, Algorithm algorithm,
                                        const HybridConfig& cfg = {});

}  // namespace msf

#endif
