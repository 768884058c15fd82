#ifndef MSF_TEST_HELPERS_HPP
#define MSF_TEST_HELPERS_HPP

#include <cmath>
#include <memory>
#include <random>

#include "msf/gaussian_model.hpp"
#include "msf/initial_distribution.hpp"
#include "msf/model.hpp"
#include "msf/simulate.hpp"
#include "msf/tvtp_model.hpp"

namespace msf::testing {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

inline double max_rel_err(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_err(a[i], b[i]));
  return m;
}

struct Instance {
  std::unique_ptr<Model> model;
  ParameterVector theta;
  Dataset data;
  InitialDistribution nu;
};

inline ParameterVector random_gaussian_theta(const GaussianSwitchingModel& m,
                                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParameterVector pv;
  pv.theta.resize(m.param_dim());
  pv.transforms = m.param_transforms();
  for (int j = 0; j < m.num_regimes(); ++j) pv.theta[m.mu_offset() + j] = 2.0 * u(rng);
  for (int j = 0; j < m.num_logvars(); ++j) pv.theta[m.logvar_offset() + j] = 0.5 * u(rng);
  for (int a = 0; a < m.ar_lags(); ++a) pv.theta[m.phi_offset() + a] = 0.4 * u(rng) / (a + 1);
  for (int j = 0; j < m.num_logits(); ++j) pv.theta[m.logit_offset() + j] = u(rng);
  return pv;
}

inline ParameterVector random_tvtp_theta(const TvtpModel& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParameterVector pv;
  pv.theta.resize(m.param_dim());
  pv.transforms = m.param_transforms();
  for (int j = 0; j < m.num_regimes(); ++j) pv.theta[m.mu_offset() + j] = 2.0 * u(rng);
  for (int j = 0; j < m.num_regimes(); ++j) pv.theta[m.logvar_offset() + j] = 0.5 * u(rng);
  for (int j = 0; j < m.num_coefs(); ++j) pv.theta[m.coef_offset() + j] = 0.6 * u(rng);
  return pv;
}

// Random instance with data drawn from the model itself; `ergodic_nu` makes
// the initial distribution theta-dependent (constant-transition families
// only), exercising the nu-derivative paths.
inline Instance random_gaussian_instance(std::mt19937_64& rng, int K, int ar, int n,
                                         bool switching_variance, bool ergodic_nu) {
  Instance inst;
  auto model = make_gaussian_switching_model(K, switching_variance, ar);
  inst.theta = random_gaussian_theta(*model, rng);
  InitialDistribution nu_sim = default_initial_distribution(
      *model, inst.theta, InitialMode::uniform, nullptr, 0);
  inst.data = simulate(*model, inst.theta, n, rng(), nu_sim).data;
  inst.nu = default_initial_distribution(
      *model, inst.theta, ergodic_nu ? InitialMode::ergodic : InitialMode::uniform, nullptr, 2);
  inst.model = std::move(model);
  return inst;
}

inline Instance random_tvtp_instance(std::mt19937_64& rng, int K, int mcov, int n) {
  Instance inst;
  auto model = make_tvtp_model(K, mcov);
  inst.theta = random_tvtp_theta(*model, rng);
  InitialDistribution nu = default_initial_distribution(
      *model, inst.theta, InitialMode::uniform, nullptr, 0);
  inst.data = simulate(*model, inst.theta, n, rng(), nu).data;
  inst.nu = std::move(nu);
  inst.model = std::move(model);
  return inst;
}

}  // namespace msf::testing

#endif
