#ifndef MSF_BASELINE_HPP
#define MSF_BASELINE_HPP

#include "msf/model.hpp"

namespace msf {

// Forward-backward comparator: the standard regime-tuple predict/update
// filter and Kim backward smoother, which deliberately store all n
// probability rows.
struct FilterOutput {
  int K = 0, p = 0, M = 0;
  Vec filtered;    // n x M, P(Sbar_t | Y_{1:t})
  Vec predicted;   // n x M, P(Sbar_t | Y_{1:t-1})
  Vec joint;       // n x (K*M), P(S_t, Sbar_{t-1} | Y_{1:t}); kept for the smoother
  Vec period_lik;  // n, c_t
  double loglik = 0.0;

  std::size_t stored_bytes() const {
    return (filtered.size() + predicted.size() + joint.size() + period_lik.size()) *
           sizeof(double);
  }
};

struct SmootherOutput {
  int K = 0, p = 0, M = 0;
  Vec smoothed;          // n x M, P(Sbar_t | Y_{1:n})
  Vec pairwise;          // (n-1) x (K*M), P(S_t, Sbar_{t-1} | Y_{1:n}) for t = 2..n
  Vec initial_pairwise;  // K*M, the same joint at t = 1 (involves Sbar_0)
  int zero_mass_events = 0;  // 0/0 conventions applied in the backward pass

  std::size_t stored_bytes() const {
    return (smoothed.size() + pairwise.size() + initial_pairwise.size()) * sizeof(double);
  }
};

FilterOutput hamilton_filter(const Model& model, const ParameterVector& theta,
                             const Dataset& data, const InitialDistribution& nu);

SmootherOutput kim_smoother(const FilterOutput& filter, const Model& model,
                            const ParameterVector& theta, const Dataset& data);

// Smoothed-probability score: sum over t of grad log f weighted by the
// pairwise smoothed probabilities, plus the nu-gradient term.
Vec smoothed_score(const SmootherOutput& smoother, const Model& model,
                   const ParameterVector& theta, const Dataset& data,
                   const InitialDistribution& nu);

}  // namespace msf

#endif
