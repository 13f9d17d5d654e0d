#include "config.hpp"

#include <fstream>

#include "dlambert/field_json.hpp"
#include "json_schema.hpp"
#include "schema_text.hpp"

namespace dlambert::cli {

using nlohmann::json;

std::vector<double> SweepSpec::grid() const {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(count == 1 ? from : from + (to - from) * i / (count - 1));
  return g;
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.integrator = integrator;
  return o;
}

const json& config_schema() {
  static const json schema = json::parse(kConfigSchemaText);
  return schema;
}

namespace {

Vec2 point(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

}  // namespace

RunConfig parse_config(const json& j) {
  validate_schema(config_schema(), j);
  RunConfig cfg;
  const json& p = j.at("problem");
  cfg.problem.A = point(p.at("A"));
  cfg.problem.B = point(p.at("B"));
  cfg.problem.T = p.at("T").get<double>();
  if (p.contains("field")) cfg.problem.field = field_from_json(p.at("field"));
  if (p.contains("direction")) cfg.problem.direction = direction_from_string(p.at("direction").get<std::string>());
  try {
    cfg.problem.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  if (j.contains("integrator")) {
    const json& in = j.at("integrator");
    IntegratorConfig& ic = cfg.integrator;
    ic.rtol = in.value("rtol", ic.rtol);
    ic.atol = in.value("atol", ic.atol);
    ic.h_init = in.value("h_init", ic.h_init);
    ic.h_min = in.value("h_min", ic.h_min);
    if (in.contains("max_steps")) ic.max_steps = static_cast<long>(in.at("max_steps").get<double>());
    ic.r_collision = in.value("r_collision", ic.r_collision);
  }
  cfg.integrator.validate();

  if (j.contains("mode")) cfg.mode = j.at("mode") == "seed" ? Mode::kSeed : Mode::kSolve;
  if (j.contains("output")) {
    const json& o = j.at("output");
    cfg.out_dir = o.value("dir", cfg.out_dir);
    cfg.trajectory_csv = o.value("trajectory_csv", cfg.trajectory_csv);
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    SweepSpec sw;
    sw.param = s.at("param") == "angle" ? SweepParam::kAngle : SweepParam::kT;
    sw.from = s.at("from").get<double>();
    sw.to = s.at("to").get<double>();
    sw.count = static_cast<int>(s.at("count").get<double>());
    cfg.sweep = sw;
  }
  if (j.contains("diagnose")) {
    const json& d = j.at("diagnose");
    if (d.contains("trajectory")) cfg.diagnose_trajectory = d.at("trajectory").get<std::string>();
    cfg.diagnose_r_min = d.value("r_min", cfg.diagnose_r_min);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  json j;
  const LambertProblem& p = cfg.problem;
  j["problem"] = {{"A", {p.A.x, p.A.y}},
                  {"B", {p.B.x, p.B.y}},
                  {"T", p.T},
                  {"field", field_to_json(p.field)},
                  {"direction", to_string(p.direction)}};
  const IntegratorConfig& ic = cfg.integrator;
  j["integrator"] = {{"rtol", ic.rtol},     {"atol", ic.atol},           {"h_init", ic.h_init},
                     {"h_min", ic.h_min},   {"max_steps", ic.max_steps}, {"r_collision", ic.r_collision}};
  j["mode"] = cfg.mode == Mode::kSeed ? "seed" : "solve";
  j["output"] = {{"dir", cfg.out_dir}, {"trajectory_csv", cfg.trajectory_csv}};
  if (cfg.sweep) {
    j["sweep"] = {{"param", cfg.sweep->param == SweepParam::kAngle ? "angle" : "T"},
                  {"from", cfg.sweep->from},
                  {"to", cfg.sweep->to},
                  {"count", cfg.sweep->count}};
  }
  j["diagnose"] = {{"r_min", cfg.diagnose_r_min}};
  if (cfg.diagnose_trajectory) j["diagnose"]["trajectory"] = *cfg.diagnose_trajectory;
  return j;
}

}  // namespace dlambert::cli
