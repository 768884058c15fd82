#ifndef MSF_GAUSSIAN_MODEL_HPP
#define MSF_GAUSSIAN_MODEL_HPP

#include <memory>

#include "msf/model.hpp"

namespace msf {

// Gaussian switching-mean model, optionally with switching variance and a
// mean-adjusted autoregression whose lagged means follow the lagged regimes:
//
//   Y_t = mu_{S_t} + sum_a phi_a (Y_{t-a} - mu_{S_{t-a}}) + sigma_{S_t} eps_t
//
// Transitions are time-homogeneous, parameterized by K(K-1) multinomial
// logits with the last regime as reference. theta layout:
//   [mu_1..mu_K][logvar (K or 1)][phi_1..phi_ar][logit_{i,j}]
class GaussianSwitchingModel : public Model {
 public:
  GaussianSwitchingModel(int K, bool switching_variance, int ar_lags);

  int num_regimes() const override { return K_; }
  int markov_order() const override { return p_; }
  int param_dim() const override { return d_; }
  std::string family() const override { return "gaussian"; }
  std::vector<std::string> param_names() const override;
  std::vector<Transform> param_transforms() const override;

  void eval_period(const Vec& theta, const Dataset& data, int t, int order,
                   PeriodEvaluation& out) const override;
  void transition_row(const Vec& theta, double y_prev, const double* xrow,
                      int from, double* probs) const override;
  double sample_y(const Vec& theta, const int* regimes, const double* ylags,
                  std::mt19937_64& rng) const override;
  bool transition_matrix(const Vec& theta, Vec& A, Vec* dA, Vec* d2A) const override;

  // theta layout, used by the EM M-step and by tests.
  bool switching_variance() const { return switch_var_; }
  int ar_lags() const { return ar_; }
  int mu_offset() const { return 0; }
  int logvar_offset() const { return K_; }
  int num_logvars() const { return switch_var_ ? K_ : 1; }
  int phi_offset() const { return K_ + num_logvars(); }
  int logit_offset() const { return phi_offset() + ar_; }
  int num_logits() const { return K_ * (K_ - 1); }

 private:
  int K_, ar_, p_, d_;
  bool switch_var_;
};

std::unique_ptr<GaussianSwitchingModel> make_gaussian_switching_model(int K,
                                                                      bool switching_variance,
                                                                      int ar_lags);

}  // namespace msf

#endif
