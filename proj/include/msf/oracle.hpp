#ifndef MSF_ORACLE_HPP
#define MSF_ORACLE_HPP

#include <cstdint>

#include "msf/model.hpp"

namespace msf {

// Ground truth by explicit enumeration of all K^{n+p} regime paths.
// Deliberately naive apart from the size guard; used by the test suites and
// the `check` CLI subcommand.
struct OracleResult {
  double lik = 0.0;     // p_{theta,n}
  double loglik = 0.0;
  Vec score;            // d
  Vec hessian;          // d*d, assembled Hessian of the log-likelihood
  std::int64_t paths_processed = 0;
};

inline constexpr std::int64_t kOraclePathGuard = 10'000'000;

OracleResult brute_force_all(const Model& model, const ParameterVector& theta,
                             const Dataset& data, const InitialDistribution& nu, int order);

double brute_force_likelihood(const Model& model, const ParameterVector& theta,
                              const Dataset& data, const InitialDistribution& nu);
Vec brute_force_score(const Model& model, const ParameterVector& theta, const Dataset& data,
                      const InitialDistribution& nu);
Vec brute_force_hessian(const Model& model, const ParameterVector& theta, const Dataset& data,
                        const InitialDistribution& nu);

}  // namespace msf

#endif
