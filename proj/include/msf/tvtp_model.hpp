#ifndef MSF_TVTP_MODEL_HPP
#define MSF_TVTP_MODEL_HPP

#include <memory>

#include "msf/model.hpp"

namespace msf {

// Gaussian switching mean/variance model whose transition probabilities are
// multinomial-logit in (1, Y_{t-1}, X_t[0..m'-1]); Markov order p = 1.
// theta layout:
//   [mu_1..mu_K][logvar_1..logvar_K][coef_{i,j,c}]
// with coef blocks of width 2+m' per (from i, to j<K) pair, ordered
// (intercept, slope on Y_{t-1}, slopes on the covariate slice).
class TvtpModel : public Model {
 public:
  TvtpModel(int K, int transition_covariate_count);

  int num_regimes() const override { return K_; }
  int markov_order() const override { return 1; }
  int param_dim() const override { return d_; }
  std::string family() const override { return "tvtp"; }
  std::vector<std::string> param_names() const override;
  std::vector<Transform> param_transforms() const override;

  void eval_period(const Vec& theta, const Dataset& data, int t, int order,
                   PeriodEvaluation& out) const override;
  void transition_row(const Vec& theta, double y_prev, const double* xrow,
                      int from, double* probs) const override;
  double sample_y(const Vec& theta, const int* regimes, const double* ylags,
                  std::mt19937_64& rng) const override;
  int covariates_used() const override { return m_; }

  int mu_offset() const { return 0; }
  int logvar_offset() const { return K_; }
  int coef_offset() const { return 2 * K_; }
  int feature_dim() const { return 2 + m_; }
  int num_coefs() const { return K_ * (K_ - 1) * feature_dim(); }
  int coef_index(int from, int to, int c) const {
    return coef_offset() + (from * (K_ - 1) + to) * feature_dim() + c;
  }

 private:
  void fill_eta(const Vec& theta, const double* z, int from, double* eta) const;

  int K_, m_, d_;
};

std::unique_ptr<TvtpModel> make_tvtp_model(int K, int transition_covariate_count);

}  // namespace msf

#endif
