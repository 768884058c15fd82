#include "msf/cli_app.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "msf/baseline.hpp"
#include "msf/csv.hpp"
#include "msf/em.hpp"
#include "msf/errors.hpp"
#include "msf/estimation.hpp"
#include "msf/gaussian_model.hpp"
#include "msf/initial_distribution.hpp"
#include "msf/oracle.hpp"
#include "msf/recursion.hpp"
#include "msf/simulate.hpp"
#include "msf/tvtp_model.hpp"

namespace msf {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in config section '" + section + "'");
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  check_keys(cfg, "(top level)", {"model", "algorithm", "data", "initial", "task", "output"});
  if (!cfg.contains("model")) throw ConfigError("config is missing the 'model' section");
  return cfg;
}

Vec as_vec(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  Vec v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + " must be an array of numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

struct Run {
  std::unique_ptr<Model> model;
  json resolved;  // fully-resolved config, echoed into every report
  Algorithm algorithm = Algorithm::hybrid;
  HybridConfig hybrid;
  std::string csv_path;
  Vec presample;
  std::string output_path;
  json initial_section;
  json task;
};

Run build_run(const json& cfg) {
  Run r;
  const json& m = cfg.at("model");
  check_keys(m, "model",
             {"family", "K", "ar_lags", "switching_variance", "transition_covariates"});
  const std::string family = m.value("family", std::string());
  const int K = m.value("K", 0);
  if (family == "gaussian") {
    const int ar = m.value("ar_lags", 0);
    const bool sv = m.value("switching_variance", true);
    r.model = make_gaussian_switching_model(K, sv, ar);
    r.resolved["model"] = {{"family", family}, {"K", K}, {"ar_lags", ar},
                           {"switching_variance", sv}};
  } else if (family == "tvtp") {
    const int mcov = m.value("transition_covariates", 0);
    if (m.contains("ar_lags") || m.contains("switching_variance"))
      throw ConfigError("ar_lags/switching_variance do not apply to family 'tvtp'");
    r.model = make_tvtp_model(K, mcov);
    r.resolved["model"] = {{"family", family}, {"K", K}, {"transition_covariates", mcov}};
  } else {
    throw ConfigError("model.family must be 'gaussian' or 'tvtp'");
  }

  json a = cfg.value("algorithm", json::object());
  check_keys(a, "algorithm", {"name", "B"});
  r.algorithm = algorithm_from_string(a.value("name", std::string("hybrid")));
  r.hybrid.B = a.value("B", 1000.0);
  if (!(r.hybrid.B > 0)) throw ConfigError("algorithm.B must be positive");
  r.resolved["algorithm"] = {{"name", to_string(r.algorithm)}, {"B", r.hybrid.B}};

  json d = cfg.value("data", json::object());
  check_keys(d, "data", {"csv", "presample"});
  r.csv_path = d.value("csv", std::string());
  if (d.contains("presample")) r.presample = as_vec(d.at("presample"), "data.presample");
  r.resolved["data"] = {{"csv", r.csv_path}, {"presample", r.presample}};

  r.initial_section = cfg.value("initial", json::object());
  check_keys(r.initial_section, "initial", {"mode", "nu"});
  r.resolved["initial"] = {{"mode", r.initial_section.value("mode", std::string("uniform"))}};
  if (r.initial_section.contains("nu")) r.resolved["initial"]["nu"] = r.initial_section["nu"];

  r.task = cfg.value("task", json::object());
  r.output_path = cfg.value("output", std::string());
  return r;
}

ParameterVector theta_from(const json& task, const Model& model, const char* key) {
  if (!task.contains(key))
    throw ConfigError(std::string("task.") + key + " is required");
  ParameterVector pv;
  pv.theta = as_vec(task.at(key), std::string("task.") + key);
  pv.transforms = model.param_transforms();
  if ((int)pv.theta.size() != model.param_dim())
    throw ConfigError(std::string("task.") + key + " has length " +
                      std::to_string(pv.theta.size()) + ", model needs " +
                      std::to_string(model.param_dim()));
  return pv;
}

Dataset dataset_from(const Run& r) {
  if (r.csv_path.empty()) throw ConfigError("data.csv is required for this command");
  CsvSeries s = read_series_csv(r.csv_path);
  Dataset ds;
  ds.y = s.y;
  ds.x = s.x;
  ds.ncov = s.ncov;
  const int p = r.model->markov_order();
  ds.y0 = r.presample;
  if ((int)ds.y0.size() < p) ds.y0.resize(p, 0.0);
  ds.validate(p);
  if (s.ncov < r.model->covariates_used())
    throw ConfigError("CSV provides " + std::to_string(s.ncov) + " covariate columns, model needs " +
                      std::to_string(r.model->covariates_used()));
  return ds;
}

InitialDistribution initial_from(const Run& r, const ParameterVector& theta, int order) {
  const std::string mode = r.initial_section.value("mode", std::string("uniform"));
  if (mode == "uniform")
    return default_initial_distribution(*r.model, theta, InitialMode::uniform, nullptr, order);
  if (mode == "ergodic")
    return default_initial_distribution(*r.model, theta, InitialMode::ergodic, nullptr, order);
  if (mode == "user") {
    if (!r.initial_section.contains("nu"))
      throw ConfigError("initial.mode 'user' requires initial.nu");
    Vec nu = as_vec(r.initial_section.at("nu"), "initial.nu");
    return default_initial_distribution(*r.model, theta, InitialMode::user, &nu, order);
  }
  throw ConfigError("initial.mode must be uniform, ergodic, or user");
}

void write_report(const std::string& path, const json& report) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << report.dump(2) << "\n";
}

json hessian_json(const Vec& h, int d) {
  return json{{"d", d}, {"values", h}};
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(Run& r) {
  check_keys(r.task, "task", {"seed", "n", "theta"});
  const int n = r.task.value("n", 0);
  if (n <= 0) throw ConfigError("task.n must be a positive integer");
  const std::uint64_t seed = r.task.value("seed", (std::uint64_t)0);
  ParameterVector theta = theta_from(r.task, *r.model, "theta");
  if (r.csv_path.empty()) throw ConfigError("data.csv must name the output CSV path");

  InitialDistribution nu = initial_from(r, theta, 0);
  SimulationResult sim = simulate(*r.model, theta, n, seed, nu);
  write_series_csv(r.csv_path, sim.data.y, sim.data.x, sim.data.ncov);

  r.resolved["task"] = {{"command", "simulate"}, {"seed", seed}, {"n", n},
                        {"theta", theta.theta}};
  json report;
  report["config"] = r.resolved;
  report["theta"] = theta.theta;
  report["seed"] = seed;
  report["n"] = n;
  report["csv"] = r.csv_path;
  json path = json::array();
  for (int s : sim.path) path.push_back(s + 1);  // 1-based regime labels
  report["latent_path"] = path;
  report["initial_tuple"] = sim.initial_tuple;
  report["presample"] = sim.data.y0;
  write_report(r.output_path, report);
  return 0;
}

// -------------------------------------------------------------------- eval

int cmd_eval(Run& r, int order_override) {
  check_keys(r.task, "task", {"theta", "order"});
  ParameterVector theta = theta_from(r.task, *r.model, "theta");
  int order = r.task.value("order", 2);
  if (order_override >= 0) order = order_override;
  if (order < 0 || order > 2) throw ConfigError("order must be 0, 1, or 2");
  Dataset data = dataset_from(r);
  InitialDistribution nu = initial_from(r, theta, order);

  const auto t0 = Clock::now();
  ScoreHessianResult res =
      loglik_score_hessian(*r.model, theta, data, nu, order, r.algorithm, r.hybrid);
  const double eval_ms = ms_since(t0);

  r.resolved["task"] = {{"command", "eval"}, {"theta", theta.theta}, {"order", order}};
  json report;
  report["config"] = r.resolved;
  report["loglik"] = res.loglik;
  report["algorithm"] = to_string(r.algorithm);
  report["switched_at"] = res.switched_at ? json(*res.switched_at) : json(nullptr);
  if (order >= 1) report["score"] = res.score;
  if (order >= 2) report["hessian"] = hessian_json(res.hessian, r.model->param_dim());
  report["timings"] = {{"eval_ms", eval_ms}};
  write_report(r.output_path, report);
  return 0;
}

// --------------------------------------------------------------------- fit

json fit_common(const Run& r, const ParameterVector& theta_hat, double loglik) {
  json out;
  out["theta_hat"] = theta_hat.theta;
  out["loglik"] = loglik;
  return out;
}

int cmd_fit(Run& r) {
  check_keys(r.task, "task",
             {"method", "theta0", "tol", "grad_tol", "max_iter", "multistart", "seed"});
  const std::string method = r.task.value("method", std::string());
  if (method != "em" && method != "newton")
    throw ConfigError("task.method must be 'em' or 'newton'");
  ParameterVector theta0 = theta_from(r.task, *r.model, "theta0");
  const int max_iter = r.task.value("max_iter", method == "em" ? 500 : 100);
  const int multistart = r.task.value("multistart", 1);
  const std::uint64_t seed = r.task.value("seed", (std::uint64_t)0);
  if (max_iter <= 0 || multistart <= 0)
    throw ConfigError("max_iter and multistart must be positive");
  Dataset data = dataset_from(r);
  InitialDistribution nu = initial_from(r, theta0, 2);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.5);
  std::vector<ParameterVector> starts{theta0};
  for (int s = 1; s < multistart; ++s) {
    ParameterVector pv = theta0;
    for (double& x : pv.theta) x += jitter(rng);
    starts.push_back(pv);
  }

  json report;
  const auto t0 = Clock::now();
  json result;
  std::string first_error;
  bool any = false;

  if (method == "newton") {
    NewtonOptions opts;
    opts.grad_tol = r.task.value("grad_tol", 1e-6);
    opts.max_iter = max_iter;
    opts.algorithm = r.algorithm;
    FitResult best;
    for (const auto& s : starts) {
      try {
        FitResult f = newton_fit(*r.model, s, data, nu, opts);
        if (!any || f.loglik > best.loglik) best = f;
        any = true;
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
      }
    }
    if (!any) throw StalledFitError("all starts failed: " + first_error, theta0.theta);
    result = fit_common(r, best.theta_hat, best.loglik);
    double gnorm = 0.0;
    for (double g : best.score) gnorm = std::max(gnorm, std::abs(g));
    result["score_norm"] = gnorm;
    result["converged"] = best.converged;
    result["iterations"] = best.iterations;
    json path = json::array();
    for (const auto& it : best.path)
      path.push_back({{"loglik", it.loglik}, {"grad_norm", it.grad_norm}, {"step", it.step}});
    result["path"] = path;
    try {
      StandardErrors se = standard_errors(best.hessian, r.model->param_dim());
      result["standard_errors"] = se.se;
      result["vcov"] = hessian_json(se.vcov, r.model->param_dim());
    } catch (const NonInvertibleInformationError& e) {
      result["standard_errors"] = nullptr;
      result["warning"] = e.what();
    }
    r.resolved["task"] = {{"command", "fit"}, {"method", method}, {"theta0", theta0.theta},
                          {"grad_tol", opts.grad_tol}, {"max_iter", max_iter},
                          {"multistart", multistart}, {"seed", seed}};
  } else {
    const double tol = r.task.value("tol", 1e-8);
    EmResult best;
    for (const auto& s : starts) {
      try {
        EmResult f = em_fit(*r.model, s, data, nu, tol, max_iter);
        if (!any || f.loglik_trace.back() > best.loglik_trace.back()) best = f;
        any = true;
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
      }
    }
    if (!any) throw StalledFitError("all starts failed: " + first_error, theta0.theta);
    result = fit_common(r, best.theta, best.loglik_trace.back());
    result["converged"] = best.converged;
    result["iterations"] = best.iterations;
    result["loglik_trace"] = best.loglik_trace;
    try {
      ScoreHessianResult h =
          loglik_score_hessian(*r.model, best.theta, data, nu, 2, r.algorithm, r.hybrid);
      StandardErrors se = standard_errors(h.hessian, r.model->param_dim());
      result["standard_errors"] = se.se;
      result["vcov"] = hessian_json(se.vcov, r.model->param_dim());
    } catch (const Error& e) {
      result["standard_errors"] = nullptr;
      result["warning"] = e.what();
    }
    r.resolved["task"] = {{"command", "fit"}, {"method", method}, {"theta0", theta0.theta},
                          {"tol", tol}, {"max_iter", max_iter},
                          {"multistart", multistart}, {"seed", seed}};
  }

  report["config"] = r.resolved;
  report["fit"] = result;
  report["timings"] = {{"fit_ms", ms_since(t0)}};
  write_report(r.output_path, report);
  return 0;
}

// ------------------------------------------------------------------- check

// Derivative-corrupting decorator used as the negative control: adds a bump
// to one component of df so the finite-difference check must fail there.
class CorruptedModel : public Model {
 public:
  CorruptedModel(const Model& base, int coord, double amount)
      : base_(base), coord_(coord), amount_(amount) {}
  int num_regimes() const override { return base_.num_regimes(); }
  int markov_order() const override { return base_.markov_order(); }
  int param_dim() const override { return base_.param_dim(); }
  std::string family() const override { return base_.family(); }
  std::vector<std::string> param_names() const override { return base_.param_names(); }
  std::vector<Transform> param_transforms() const override { return base_.param_transforms(); }
  void eval_period(const Vec& theta, const Dataset& data, int t, int order,
                   PeriodEvaluation& out) const override {
    base_.eval_period(theta, data, t, order, out);
    if (order >= 1)
      for (int c = 0; c < out.num_combos; ++c)
        out.df[(size_t)c * out.d + coord_] += amount_ * out.f[c];
  }
  void transition_row(const Vec& theta, double y_prev, const double* xrow, int from,
                      double* probs) const override {
    base_.transition_row(theta, y_prev, xrow, from, probs);
  }
  double sample_y(const Vec& theta, const int* regimes, const double* ylags,
                  std::mt19937_64& rng) const override {
    return base_.sample_y(theta, regimes, ylags, rng);
  }
  bool transition_matrix(const Vec& theta, Vec& A, Vec* dA, Vec* d2A) const override {
    return base_.transition_matrix(theta, A, dA, d2A);
  }
  int covariates_used() const override { return base_.covariates_used(); }

 private:
  const Model& base_;
  int coord_;
  double amount_;
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double max_rel_err(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_err(a[i], b[i]));
  return m;
}

int cmd_check(Run& r) {
  check_keys(r.task, "task",
             {"theta", "fd_step", "oracle_n", "corrupt_coordinate", "corrupt_amount"});
  ParameterVector theta = theta_from(r.task, *r.model, "theta");
  const double fd_step = r.task.value("fd_step", 1e-6);
  Dataset data = dataset_from(r);

  // The oracle enumerates K^(n+p) paths, so compare it on a short prefix only.
  const std::size_t oracle_n =
      std::min<std::size_t>(data.n(), r.task.value("oracle_n", 12));
  Dataset oracle_data = data;
  oracle_data.y.resize(oracle_n);
  if (oracle_data.ncov) oracle_data.x.resize(oracle_n * oracle_data.ncov);
  InitialDistribution nu = initial_from(r, theta, 2);

  const Model* model = r.model.get();
  std::unique_ptr<CorruptedModel> corrupted;
  if (r.task.contains("corrupt_coordinate")) {
    const int cc = r.task.at("corrupt_coordinate").get<int>();
    if (cc < 0 || cc >= model->param_dim())
      throw ConfigError("corrupt_coordinate out of range");
    corrupted = std::make_unique<CorruptedModel>(*model, cc,
                                                 r.task.value("corrupt_amount", 1e-2));
    model = corrupted.get();
  }

  const json tolerances = {{"oracle_rel", 1e-10},       {"fd_score_rel", 1e-5},
                           {"fd_hessian_rel", 1e-4},    {"algorithm_rel", 1e-10},
                           {"baseline_score_rel", 1e-9}, {"filter_loglik_rel", 1e-12}};

  json report;
  bool pass = true;

  // forward vs oracle
  OracleResult oracle = brute_force_all(*model, theta, oracle_data, nu, 2);
  ScoreHessianResult fwd =
      loglik_score_hessian(*model, theta, oracle_data, nu, 2, Algorithm::hybrid, r.hybrid);
  json osec;
  osec["n"] = oracle_n;
  osec["loglik"] = oracle.loglik;
  osec["score"] = oracle.score;
  osec["hessian"] = hessian_json(oracle.hessian, model->param_dim());
  osec["paths_processed"] = oracle.paths_processed;
  osec["loglik_rel_err"] = rel_err(fwd.loglik, oracle.loglik);
  osec["score_rel_err"] = max_rel_err(fwd.score, oracle.score);
  osec["hessian_rel_err"] = max_rel_err(fwd.hessian, oracle.hessian);
  osec["pass"] = osec["loglik_rel_err"].get<double>() <= 1e-10 &&
                 osec["score_rel_err"].get<double>() <= 1e-10 &&
                 osec["hessian_rel_err"].get<double>() <= 1e-10;
  pass = pass && osec["pass"].get<bool>();
  report["oracle"] = osec;

  // analytic vs finite differences
  GradientCheckReport gc = gradient_check(*model, theta, data, nu, fd_step);
  json gsec;
  gsec["max_score_rel_err"] = gc.max_score_rel_err;
  gsec["max_hessian_rel_err"] = gc.max_hess_rel_err;
  int worst = 0;
  for (int j = 1; j < model->param_dim(); ++j)
    if (gc.score_rel_err[j] > gc.score_rel_err[worst]) worst = j;
  gsec["worst_coordinate"] = model->param_names()[worst];
  gsec["pass"] = gc.ok;
  pass = pass && gc.ok;
  report["finite_difference"] = gsec;

  // algorithm equivalence, on the full series
  json asec;
  ScoreHessianResult fwd_full =
      loglik_score_hessian(*model, theta, data, nu, 2, Algorithm::hybrid, r.hybrid);
  ScoreHessianResult scd =
      loglik_score_hessian(*model, theta, data, nu, 2, Algorithm::scaled, r.hybrid);
  double algo_err = std::max(rel_err(scd.loglik, fwd_full.loglik),
                             std::max(max_rel_err(scd.score, fwd_full.score),
                                      max_rel_err(scd.hessian, fwd_full.hessian)));
  bool underflowed = false;
  try {
    ScoreHessianResult uns =
        loglik_score_hessian(*model, theta, data, nu, 2, Algorithm::unscaled, r.hybrid);
    algo_err = std::max(algo_err, rel_err(uns.loglik, fwd_full.loglik));
    algo_err = std::max(algo_err, max_rel_err(uns.score, fwd_full.score));
    algo_err = std::max(algo_err, max_rel_err(uns.hessian, fwd_full.hessian));
  } catch (const UnderflowError&) {
    underflowed = true;
  }
  asec["max_rel_err"] = algo_err;
  asec["unscaled_underflowed"] = underflowed;
  asec["pass"] = algo_err <= 1e-10;
  pass = pass && asec["pass"].get<bool>();
  report["algorithms"] = asec;

  // forward vs baseline
  FilterOutput filt = hamilton_filter(*model, theta, data, nu);
  SmootherOutput smth = kim_smoother(filt, *model, theta, data);
  Vec bscore = smoothed_score(smth, *model, theta, data, nu);
  json bsec;
  bsec["score_rel_err"] = max_rel_err(bscore, fwd_full.score);
  bsec["loglik_rel_err"] = rel_err(filt.loglik, fwd_full.loglik);
  bsec["pass"] = bsec["score_rel_err"].get<double>() <= 1e-9 &&
                 bsec["loglik_rel_err"].get<double>() <= 1e-12;
  pass = pass && bsec["pass"].get<bool>();
  report["baseline"] = bsec;

  r.resolved["task"] = {{"command", "check"},
                        {"theta", theta.theta},
                        {"fd_step", fd_step},
                        {"oracle_n", oracle_n}};
  if (corrupted) r.resolved["task"]["corrupt_coordinate"] = r.task.at("corrupt_coordinate");
  report["config"] = r.resolved;
  report["tolerances"] = tolerances;
  report["pass"] = pass;
  write_report(r.output_path, report);
  return pass ? 0 : 4;
}

// ------------------------------------------------------------------- bench

int cmd_bench(Run& r) {
  check_keys(r.task, "task", {"sizes", "seed", "theta", "csv_out"});
  if (!r.task.contains("sizes") || !r.task.at("sizes").is_array() || r.task.at("sizes").empty())
    throw ConfigError("task.sizes must be a non-empty array of {n} entries");
  const std::uint64_t seed = r.task.value("seed", (std::uint64_t)0);
  ParameterVector theta = theta_from(r.task, *r.model, "theta");

  json rows = json::array();
  std::string csv = "n,K,d,forward_ms,baseline_ms,forward_state_bytes,baseline_stored_bytes\n";
  for (const auto& entry : r.task.at("sizes")) {
    check_keys(entry, "task.sizes[]", {"n"});
    const int n = entry.value("n", 0);
    if (n <= 0) throw ConfigError("bench size entries need a positive n");

    InitialDistribution nu = initial_from(r, theta, 1);
    SimulationResult sim = simulate(*r.model, theta, n, seed, nu);

    auto run_forward = [&]() {
      return loglik_score_hessian(*r.model, theta, sim.data, nu, 1, Algorithm::hybrid, r.hybrid);
    };
    auto run_baseline = [&](std::size_t* bytes) {
      FilterOutput f = hamilton_filter(*r.model, theta, sim.data, nu);
      SmootherOutput s = kim_smoother(f, *r.model, theta, sim.data);
      if (bytes) *bytes = f.stored_bytes() + s.stored_bytes();
      return smoothed_score(s, *r.model, theta, sim.data, nu);
    };

    // warmup + median of 5
    ScoreHessianResult fwd = run_forward();
    std::vector<double> fwd_ms(5), base_ms(5);
    for (int rep = 0; rep < 5; ++rep) {
      auto t0 = Clock::now();
      fwd = run_forward();
      fwd_ms[rep] = ms_since(t0);
    }
    std::size_t base_bytes = 0;
    Vec bscore = run_baseline(&base_bytes);
    for (int rep = 0; rep < 5; ++rep) {
      auto t0 = Clock::now();
      bscore = run_baseline(nullptr);
      base_ms[rep] = ms_since(t0);
    }
    std::sort(fwd_ms.begin(), fwd_ms.end());
    std::sort(base_ms.begin(), base_ms.end());

    if (max_rel_err(bscore, fwd.score) > 1e-9)
      throw InternalConsistencyError("bench: forward and baseline scores disagree at n=" +
                                     std::to_string(n));

    RecursionState st = init_state(*r.model, theta, sim.data, nu, 1, Algorithm::hybrid, r.hybrid);
    const std::size_t fwd_bytes = st.state_bytes();

    json row = {{"n", n},
                {"K", r.model->num_regimes()},
                {"d", r.model->param_dim()},
                {"forward_ms", fwd_ms[2]},
                {"baseline_ms", base_ms[2]},
                {"forward_state_bytes", fwd_bytes},
                {"baseline_stored_bytes", base_bytes},
                {"scores_match", true}};
    rows.push_back(row);
    csv += std::to_string(n) + "," + std::to_string(r.model->num_regimes()) + "," +
           std::to_string(r.model->param_dim()) + "," + std::to_string(fwd_ms[2]) + "," +
           std::to_string(base_ms[2]) + "," + std::to_string(fwd_bytes) + "," +
           std::to_string(base_bytes) + "\n";
  }

  r.resolved["task"] = {{"command", "bench"}, {"seed", seed}, {"theta", theta.theta},
                        {"sizes", r.task.at("sizes")}};
  json report;
  report["config"] = r.resolved;
  report["results"] = rows;
  write_report(r.output_path, report);
  if (r.task.contains("csv_out")) {
    std::ofstream out(r.task.at("csv_out").get<std::string>());
    if (!out) throw ConfigError("cannot open bench CSV output");
    out << csv;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Exact score/Hessian and EM for Markov regime-switching models"};
  app.require_subcommand(1);

  std::string config_path;
  int order_override = -1;
  auto add = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    return sub;
  };
  CLI::App* s_sim = add("simulate", "draw data and a latent path from a model");
  CLI::App* s_eval = add("eval", "log-likelihood, score, and Hessian in one forward pass");
  s_eval->add_option("--order", order_override, "derivative order (0, 1, or 2)");
  CLI::App* s_fit = add("fit", "maximum likelihood by Newton or forward-only EM");
  CLI::App* s_check = add("check", "oracle / finite-difference / baseline validation suite");
  CLI::App* s_bench = add("bench", "forward recursion vs filter+smoother timings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    json cfg = load_config(config_path);
    Run run = build_run(cfg);
    if (s_sim->parsed()) return cmd_simulate(run);
    if (s_eval->parsed()) return cmd_eval(run, order_override);
    if (s_fit->parsed()) return cmd_fit(run);
    if (s_check->parsed()) return cmd_check(run);
    if (s_bench->parsed()) return cmd_bench(run);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SizeGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace msf
