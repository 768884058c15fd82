#ifndef MSF_SIMULATE_HPP
#define MSF_SIMULATE_HPP

#include <cstdint>

#include "msf/model.hpp"

namespace msf {

struct SimulationResult {
  Dataset data;
  std::vector<int> path;  // S_1..S_n, 0-based regimes
  int initial_tuple = 0;  // code of Sbar_0 drawn from nu
};

// Deterministic given the seed. The latent path is returned for test
// assertions. Covariate columns (TVTP) are drawn iid standard normal.
SimulationResult simulate(const Model& model, const ParameterVector& theta, int n,
                          std::uint64_t seed, const InitialDistribution& nu);

}  // namespace msf

#endif
