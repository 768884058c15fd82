#include <cmath>

#include "msf/model.hpp"

namespace msf {

void Dataset::validate(int p) const {
  if (y.empty()) throw ConfigError("dataset must contain at least one observation");
  if (static_cast<int>(y0.size()) < p)
    throw ConfigError("presample block must supply at least p lags");
  for (double v : y)
    if (!std::isfinite(v)) throw ConfigError("non-finite observation in dataset");
  for (double v : y0)
    if (!std::isfinite(v)) throw ConfigError("non-finite presample value in dataset");
  if (ncov > 0 && x.size() != y.size() * ncov)
    throw ConfigError("covariate matrix row count must equal n");
  for (double v : x)
    if (!std::isfinite(v)) throw ConfigError("non-finite covariate in dataset");
}

PeriodEvaluation evaluate_period(const Model& model, const ParameterVector& theta,
                                 const Dataset& data, int t, int order) {
  if (static_cast<int>(theta.dim()) != model.param_dim())
    throw ConfigError("parameter vector length does not match model dimension");
  for (double v : theta.theta)
    if (!std::isfinite(v)) throw ConfigError("non-finite parameter value");
  data.validate(model.markov_order());
  if (t < 1 || t > static_cast<int>(data.n()))
    throw ConfigError("time index out of range");
  if (model.covariates_used() > static_cast<int>(data.ncov))
    throw ConfigError("model uses more covariate columns than the dataset provides");
  PeriodEvaluation pe;
  model.eval_period(theta.theta, data, t, order, pe);
  return pe;
}

}  // namespace msf
