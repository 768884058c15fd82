// Structural validation of CLI reports against the shipped schemas, using a
// small validator covering the subset of JSON Schema the schemas use
// (type, required, properties, items, enum, additionalProperties).

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "msf/cli_app.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool type_matches(const json& value, const std::string& t) {
  if (t == "object") return value.is_object();
  if (t == "array") return value.is_array();
  if (t == "string") return value.is_string();
  if (t == "boolean") return value.is_boolean();
  if (t == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (t == "number") return value.is_number();
  if (t == "null") return value.is_null();
  return false;
}

bool validate(const json& value, const json& schema, std::string& err, std::string path = "$") {
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) ok = type_matches(value, t.get<std::string>());
    else
      for (const auto& alt : t) ok = ok || type_matches(value, alt.get<std::string>());
    if (!ok) {
      err = path + ": wrong type";
      return false;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok = ok || e == value;
    if (!ok) {
      err = path + ": not in enum";
      return false;
    }
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& k : schema["required"])
        if (!value.contains(k.get<std::string>())) {
          err = path + ": missing required key " + k.get<std::string>();
          return false;
        }
    const json props = schema.value("properties", json::object());
    for (auto it = value.begin(); it != value.end(); ++it) {
      if (props.contains(it.key())) {
        if (!validate(it.value(), props[it.key()], err, path + "." + it.key())) return false;
      } else if (schema.value("additionalProperties", json(true)) == json(false)) {
        err = path + ": unexpected key " + it.key();
        return false;
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    int i = 0;
    for (const auto& e : value) {
      if (!validate(e, schema["items"], err, path + "[" + std::to_string(i) + "]")) return false;
      ++i;
    }
  }
  return true;
}

json load(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return json::parse(in);
}

int run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"msfwd"};
  argv.insert(argv.end(), args.begin(), args.end());
  return msf::run_cli((int)argv.size(), argv.data());
}

const fs::path kSourceDir = MSF_SOURCE_DIR;

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("msfwd_schema_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("shipped configs validate against the config schema") {
  json schema = load(kSourceDir / "schemas/run_config.schema.json");
  std::string err;
  for (const char* name :
       {"demo_check.json", "demo_eval.json", "demo_fit.json", "demo_bench.json"}) {
    json cfg = load(kSourceDir / "configs" / name);
    CHECK_MESSAGE(validate(cfg, schema, err), name, ": ", err);
  }
}

TEST_CASE("every CLI report validates against its schema") {
  Sandbox sb;
  const auto cwd = fs::current_path();
  fs::current_path(kSourceDir);  // demo configs use repo-relative paths

  std::string err;

  // simulate
  json sim_cfg = load(kSourceDir / "configs/demo_eval.json");
  sim_cfg["data"]["csv"] = (sb.dir / "sim.csv").string();
  sim_cfg["task"] = {{"seed", 1}, {"n", 12}, {"theta", sim_cfg["task"]["theta"]}};
  sim_cfg["output"] = (sb.dir / "sim.json").string();
  std::ofstream(sb.dir / "sim_cfg.json") << sim_cfg.dump();
  REQUIRE(run({"simulate", "-c", (sb.dir / "sim_cfg.json").c_str()}) == 0);
  CHECK_MESSAGE(validate(load(sb.dir / "sim.json"),
                         load(kSourceDir / "schemas/simulate_report.schema.json"), err),
                "simulate: ", err);

  // eval / check / fit / bench against the shipped demo data
  auto run_demo = [&](const char* cmd, const char* cfg_name, const char* schema_name,
                      json patch = {}) {
    json cfg = load(kSourceDir / "configs" / cfg_name);
    cfg["output"] = (sb.dir / "out.json").string();
    for (auto it = patch.begin(); it != patch.end(); ++it) cfg["task"][it.key()] = it.value();
    std::ofstream(sb.dir / "cfg.json") << cfg.dump();
    REQUIRE(run({cmd, "-c", (sb.dir / "cfg.json").c_str()}) == 0);
    CHECK_MESSAGE(validate(load(sb.dir / "out.json"),
                           load(kSourceDir / "schemas" / schema_name), err),
                  cmd, ": ", err);
  };
  run_demo("eval", "demo_eval.json", "eval_report.schema.json");
  run_demo("check", "demo_check.json", "check_report.schema.json");
  run_demo("fit", "demo_fit.json", "fit_report.schema.json");
  run_demo("bench", "demo_bench.json", "bench_report.schema.json",
           {{"sizes", json::array({json{{"n", 200}}, json{{"n", 400}}})},
            {"csv_out", (sb.dir / "bench.csv").string()}});

  fs::current_path(cwd);
}

TEST_CASE("shipped demo check config passes the full suite") {
  const auto cwd = fs::current_path();
  fs::current_path(kSourceDir);
  Sandbox sb;
  json cfg = load(kSourceDir / "configs/demo_check.json");
  cfg["output"] = (sb.dir / "check.json").string();
  std::ofstream(sb.dir / "cfg.json") << cfg.dump();
  CHECK(run({"check", "-c", (sb.dir / "cfg.json").c_str()}) == 0);
  CHECK(load(sb.dir / "check.json")["pass"] == true);
  fs::current_path(cwd);
}
