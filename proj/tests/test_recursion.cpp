#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "msf/errors.hpp"
#include "msf/oracle.hpp"
#include "msf/recursion.hpp"

using namespace msf;
using namespace msf::testing;

TEST_CASE("forward recursion matches the path-enumeration oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 1 + (int)(rng() % 3);
    const int ar = (int)(rng() % 3);
    const int n = 2 + (int)(rng() % 5);
    Instance in = random_gaussian_instance(rng, K, ar, n, trial % 2 == 0, trial % 3 == 0);
    OracleResult oracle = brute_force_all(*in.model, in.theta, in.data, in.nu, 2);
    for (Algorithm alg : {Algorithm::unscaled, Algorithm::scaled, Algorithm::hybrid}) {
      ScoreHessianResult fwd = loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 2, alg);
      CHECK(rel_err(fwd.loglik, oracle.loglik) < 1e-11);
      CHECK(max_rel_err(fwd.score, oracle.score) < 1e-11);
      CHECK(max_rel_err(fwd.hessian, oracle.hessian) < 1e-11);
    }
  }
}

TEST_CASE("forward recursion matches the oracle on tvtp instances") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    const int K = 2 + (int)(rng() % 2);
    Instance in = random_tvtp_instance(rng, K, (int)(rng() % 2), 2 + (int)(rng() % 4));
    OracleResult oracle = brute_force_all(*in.model, in.theta, in.data, in.nu, 2);
    ScoreHessianResult fwd =
        loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 2, Algorithm::scaled);
    CHECK(rel_err(fwd.loglik, oracle.loglik) < 1e-11);
    CHECK(max_rel_err(fwd.score, oracle.score) < 1e-11);
    CHECK(max_rel_err(fwd.hessian, oracle.hessian) < 1e-11);
  }
}

TEST_CASE("order 0 and 1 results agree with order 2 and skip the heavy arrays") {
  std::mt19937_64 rng(3);
  Instance in = random_gaussian_instance(rng, 2, 1, 50, true, false);
  ScoreHessianResult r2 =
      loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 2, Algorithm::hybrid);
  ScoreHessianResult r1 =
      loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 1, Algorithm::hybrid);
  ScoreHessianResult r0 =
      loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 0, Algorithm::hybrid);
  CHECK(r1.loglik == doctest::Approx(r2.loglik).epsilon(1e-14));
  CHECK(r0.loglik == doctest::Approx(r2.loglik).epsilon(1e-14));
  CHECK(max_rel_err(r1.score, r2.score) < 1e-14);
  CHECK(r0.score.empty());
  CHECK(r1.hessian.empty());

  RecursionState st0 = init_state(*in.model, in.theta, in.data, in.nu, 0, Algorithm::hybrid);
  RecursionState st2 = init_state(*in.model, in.theta, in.data, in.nu, 2, Algorithm::hybrid);
  CHECK(st0.state_bytes() < st2.state_bytes());
}

TEST_CASE("state size is independent of the sample length") {
  std::mt19937_64 rng(4);
  Instance small = random_gaussian_instance(rng, 2, 1, 100, true, false);
  Instance large = random_gaussian_instance(rng, 2, 1, 10000, true, false);
  RecursionState s1 = init_state(*small.model, small.theta, small.data, small.nu, 2,
                                 Algorithm::hybrid);
  RecursionState s2 = init_state(*large.model, large.theta, large.data, large.nu, 2,
                                 Algorithm::hybrid);
  CHECK(s1.state_bytes() == s2.state_bytes());
}

namespace {

// instance whose per-period density is ~ tiny, driving the unscaled
// recursion to a true zero in double precision
Instance deep_underflow_instance(int n, double tiny_scale) {
  Instance in;
  auto model = make_gaussian_switching_model(2, true, 0);
  in.theta.theta = {0.0, 0.1, std::log(1e-4), std::log(1e-4), 0.5, -0.5};
  in.theta.transforms = model->param_transforms();
  in.data.y.assign(n, 0.0);
  for (int t = 0; t < n; ++t) in.data.y[t] = tiny_scale;  // far in the tails
  in.data.y0 = {0.0};
  in.nu = default_initial_distribution(*model, in.theta, InitialMode::uniform);
  in.model = std::move(model);
  return in;
}

}  // namespace

TEST_CASE("unscaled underflows where scaled and hybrid agree") {
  Instance in = deep_underflow_instance(10000, 0.05);
  CHECK_THROWS_AS(
      loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 2, Algorithm::unscaled),
      UnderflowError);
  ScoreHessianResult sc =
      loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 2, Algorithm::scaled);
  ScoreHessianResult hy =
      loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 2, Algorithm::hybrid);
  CHECK(hy.switched_at.has_value());
  CHECK(rel_err(sc.loglik, hy.loglik) < 1e-9);
  CHECK(max_rel_err(sc.score, hy.score) < 1e-8);
  CHECK(max_rel_err(sc.hessian, hy.hessian) < 1e-8);
}

TEST_CASE("hybrid does not switch on benign data") {
  // short series: the running unnormalized likelihood stays above B*eps
  std::mt19937_64 rng(5);
  Instance in = random_gaussian_instance(rng, 2, 0, 5, true, false);
  ScoreHessianResult hy =
      loglik_score_hessian(*in.model, in.theta, in.data, in.nu, 2, Algorithm::hybrid);
  CHECK_FALSE(hy.switched_at.has_value());
}

TEST_CASE("impossible likelihood is reported with its period") {
  auto model = make_gaussian_switching_model(2, true, 0);
  ParameterVector th;
  th.theta = {0.0, 0.0, std::log(1e-300), std::log(1e-300), 0.0, 0.0};
  th.transforms = model->param_transforms();
  Dataset ds;
  ds.y = {0.0, 1e8};  // second observation has zero density in both regimes
  ds.y0 = {0.0};
  InitialDistribution nu = default_initial_distribution(*model, th, InitialMode::uniform);
  try {
    loglik_score_hessian(*model, th, ds, nu, 0, Algorithm::scaled);
    FAIL("expected ImpossibleLikelihoodError");
  } catch (const ImpossibleLikelihoodError& e) {
    CHECK(e.t == 2);
  }
}
