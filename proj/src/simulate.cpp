#include "msf/simulate.hpp"

#include <cmath>

namespace msf {

namespace {

int draw_discrete(const double* probs, int n, double u) {
  double acc = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace

SimulationResult simulate(const Model& model, const ParameterVector& theta, int n,
                          std::uint64_t seed, const InitialDistribution& nu) {
  if (n < 1) throw ConfigError("simulation length must be >= 1");
  const int K = model.num_regimes();
  const int p = model.markov_order();
  const int M = model.num_tuples();
  const int m = model.covariates_used();
  if (static_cast<int>(nu.nu.size()) != M)
    throw ConfigError("initial distribution size does not match K^p");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulationResult out;
  out.initial_tuple = draw_discrete(nu.nu.data(), M, unif(rng));

  // regimes[i] = S_{t-i}, ylags[i] = Y_{t-1-i}; seeded from the presample.
  std::vector<int> regimes(p + 1);
  std::vector<double> ylags(p, 0.0);
  std::vector<int> digs(p);
  decode_tuple(out.initial_tuple, K, p, digs.data());  // (S_0, ..., S_{-p+1})

  // Presample observations conditional on the drawn presample regimes,
  // generated oldest first with whatever lags are available.
  std::vector<double> pres(p, 0.0);
  std::vector<int> preg(p + 1);
  std::vector<double> plag(p, 0.0);
  for (int i = p - 1; i >= 0; --i) {  // i indexes Y_{-i}
    for (int a = 0; a <= p; ++a) preg[a] = digs[std::min(i + a, p - 1)];
    for (int a = 0; a < p; ++a) plag[a] = (i + 1 + a <= p - 1) ? pres[i + 1 + a] : 0.0;
    pres[i] = model.sample_y(theta.theta, preg.data(), plag.data(), rng);
  }

  out.data.y0.assign(pres.begin(), pres.end());  // y0[0] = Y_0
  out.data.ncov = m;
  out.data.x.assign(static_cast<std::size_t>(n) * m, 0.0);
  out.data.y.resize(n);
  out.path.resize(n);

  std::vector<int> state(digs);  // (S_{t-1}, ..., S_{t-p})
  for (int i = 0; i < p; ++i) ylags[i] = (i < static_cast<int>(pres.size())) ? pres[i] : 0.0;

  std::vector<double> probs(K);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 1; t <= n; ++t) {
    double* xrow = m ? out.data.x.data() + static_cast<std::size_t>(t - 1) * m : nullptr;
    for (int l = 0; l < m; ++l) xrow[l] = nd(rng);
    model.transition_row(theta.theta, ylags[0], xrow, state[0], probs.data());
    const int s_t = draw_discrete(probs.data(), K, unif(rng));

    regimes[0] = s_t;
    for (int a = 1; a <= p; ++a) regimes[a] = state[a - 1];
    const double y_t = model.sample_y(theta.theta, regimes.data(), ylags.data(), rng);
    if (!std::isfinite(y_t))
      throw EvaluationError("non-finite simulated observation", t, s_t);

    out.data.y[t - 1] = y_t;
    out.path[t - 1] = s_t;
    for (int i = p - 1; i >= 1; --i) {
      state[i] = state[i - 1];
      ylags[i] = ylags[i - 1];
    }
    state[0] = s_t;
    ylags[0] = y_t;
  }
  return out;
}

}  // namespace msf
