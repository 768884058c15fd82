#ifndef MSF_INITIAL_DISTRIBUTION_HPP
#define MSF_INITIAL_DISTRIBUTION_HPP

#include "msf/model.hpp"

namespace msf {

enum class InitialMode { uniform, ergodic, user };

// uniform: nu_i = K^{-p} with zero gradient. ergodic: stationary distribution
// of the regime-tuple chain with analytic first and second theta-derivatives
// obtained by differentiating the stationarity system (constant-transition
// families only). user: validated passthrough, zero gradient.
InitialDistribution default_initial_distribution(const Model& model, const ParameterVector& theta,
                                                 InitialMode mode,
                                                 const Vec* user_nu = nullptr, int order = 2);

}  // namespace msf

#endif
