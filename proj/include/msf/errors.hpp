#ifndef MSF_ERRORS_HPP
#define MSF_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace msf {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model configuration is inconsistent (bad K, dimension mismatch, ...).
struct ConfigError : Error {
  using Error::Error;
};

// A period density evaluated to a non-finite value.
struct EvaluationError : Error {
  int t;
  int tuple;
  EvaluationError(const std::string& msg, int t_, int tuple_)
      : Error(msg), t(t_), tuple(tuple_) {}
};

// Every regime path assigns zero density to the data at some period.
struct ImpossibleLikelihoodError : Error {
  int t;
  ImpossibleLikelihoodError(const std::string& msg, int t_) : Error(msg), t(t_) {}
};

// The unscaled recursion drove the path-product likelihood to exactly zero.
struct UnderflowError : Error {
  using Error::Error;
};

// An EM regime lost all smoothed mass; its M-step update is undefined.
struct DegenerateRegimeError : Error {
  int regime;
  DegenerateRegimeError(const std::string& msg, int regime_) : Error(msg), regime(regime_) {}
};

// Newton line search could not find an ascent step.
struct StalledFitError : Error {
  std::vector<double> last_theta;
  StalledFitError(const std::string& msg, std::vector<double> theta)
      : Error(msg), last_theta(std::move(theta)) {}
};

// Observed information matrix is singular or indefinite at the optimum.
struct NonInvertibleInformationError : Error {
  using Error::Error;
};

// EM log-likelihood decreased beyond tolerance; indicates a bug.
struct InternalConsistencyError : Error {
  using Error::Error;
};

// Oracle instance exceeds the path-enumeration guard.
struct SizeGuardError : Error {
  using Error::Error;
};

}  // namespace msf

#endif
