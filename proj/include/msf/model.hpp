#ifndef MSF_MODEL_HPP
#define MSF_MODEL_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "msf/errors.hpp"
#include "msf/regime_tuple.hpp"

namespace msf {

using Vec = std::vector<double>;

// Per-coordinate transform tags. Built-in models already parameterize in an
// unconstrained space (log variances, transition logits), so estimators use
// these only for reporting.
enum class Transform { identity, log_variance, logit };

struct ParameterVector {
  Vec theta;
  std::vector<Transform> transforms;  // empty or same length as theta

  std::size_t dim() const { return theta.size(); }
};

// Observations Y_1..Y_n with the presample block Ybar_0 and optional
// exogenous covariates X_1..X_n (row-major, n x m).
struct Dataset {
  Vec y;        // Y_1..Y_n
  Vec y0;       // (Y_0, Y_{-1}, ..., Y_{-p+1})
  Vec x;        // n * ncov, row t-1 holds X_t
  std::size_t ncov = 0;

  std::size_t n() const { return y.size(); }

  // Y_{t-j} for t in 1..n, j >= 0, reaching into the presample when t-j <= 0.
  double lag(int t, int j) const {
    int idx = t - j;
    return idx >= 1 ? y[idx - 1] : y0[-idx];
  }

  const double* xrow(int t) const { return ncov ? x.data() + (t - 1) * ncov : nullptr; }

  void validate(int p) const;
};

// Distribution of the presample regime tuple Sbar_0 given Ybar_0, with
// analytic theta-derivatives (all-zero when nu does not depend on theta).
struct InitialDistribution {
  Vec nu;       // K^p
  Vec grad_nu;  // K^p * d, may be empty (== zero)
  Vec hess_nu;  // K^p * d * d, may be empty

  const double* grad_row(int code, int d) const {
    return grad_nu.empty() ? nullptr : grad_nu.data() + static_cast<std::size_t>(code) * d;
  }
  const double* hess_slice(int code, int d) const {
    return hess_nu.empty() ? nullptr : hess_nu.data() + static_cast<std::size_t>(code) * d * d;
  }
};

// Values of the period likelihood f(S_t, Sbar_{t-1}) = g*q for all K^{p+1}
// regime-argument combinations at one time index, with derivatives in theta
// up to the requested order. Derivatives are of f itself, not log f.
struct PeriodEvaluation {
  int t = 0;
  int order = 0;
  int num_combos = 0;  // K^{p+1}
  int d = 0;
  Vec f;    // num_combos
  Vec df;   // num_combos * d
  Vec d2f;  // num_combos * d * d

  void resize(int combos, int dim, int ord) {
    num_combos = combos;
    d = dim;
    order = ord;
    f.assign(combos, 0.0);
    if (ord >= 1) df.assign(static_cast<std::size_t>(combos) * dim, 0.0);
    if (ord >= 2) d2f.assign(static_cast<std::size_t>(combos) * dim * dim, 0.0);
  }
};

// Abstract regime-switching model: regime count K, Markov order p, parameter
// dimension d, and the period density / transition evaluators with analytic
// first and second theta-derivatives.
class Model {
 public:
  virtual ~Model() = default;

  virtual int num_regimes() const = 0;
  virtual int markov_order() const = 0;
  virtual int param_dim() const = 0;
  virtual std::string family() const = 0;
  virtual std::vector<std::string> param_names() const = 0;
  virtual std::vector<Transform> param_transforms() const = 0;

  int num_tuples() const { return static_cast<int>(ipow(num_regimes(), markov_order())); }
  int num_combos() const { return num_regimes() * num_tuples(); }

  // Fill f (and df, d2f for order >= 1 / 2) for all (S_t, Sbar_{t-1}) combos
  // at time t. `out` must already be resized by the caller or is resized here.
  virtual void eval_period(const Vec& theta, const Dataset& data, int t, int order,
                           PeriodEvaluation& out) const = 0;

  // Transition probabilities q(. | S_{t-1} = from) at time t given the
  // realized lag Y_{t-1} and covariate row X_t; used by simulation.
  virtual void transition_row(const Vec& theta, double y_prev, const double* xrow,
                              int from, double* probs) const = 0;

  // Conditional draw of Y_t given the regimes (S_t, ..., S_{t-p}) and lags
  // (Y_{t-1}, ..., Y_{t-p}).
  virtual double sample_y(const Vec& theta, const int* regimes, const double* ylags,
                          std::mt19937_64& rng) const = 0;

  // Time-homogeneous transition matrix with derivatives, when the family has
  // one (needed for the ergodic initial distribution). A is K x K row-major
  // (row = from); dA is d x K x K; d2A is d x d x K x K. Returns false for
  // families whose transitions vary with t.
  virtual bool transition_matrix(const Vec& theta, Vec& A, Vec* dA, Vec* d2A) const {
    (void)theta; (void)A; (void)dA; (void)d2A;
    return false;
  }

  // Number of covariate columns the model reads from the dataset.
  virtual int covariates_used() const { return 0; }
};

// Validating wrapper around Model::eval_period.
PeriodEvaluation evaluate_period(const Model& model, const ParameterVector& theta,
                                 const Dataset& data, int t, int order);

}  // namespace msf

#endif
