#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dlambert/lambert.hpp"

namespace dlambert::cli {

enum class Mode { kSolve, kSeed };
enum class SweepParam { kT, kAngle };

// Grid of `count` evenly spaced values in [from, to]. For the angle sweep the
// value is the counterclockwise angle from A to B, keeping |B| fixed.
struct SweepSpec {
  SweepParam param = SweepParam::kT;
  double from = 0.0;
  double to = 0.0;
  int count = 0;

  std::vector<double> grid() const;
};

struct RunConfig {
  LambertProblem problem;
  IntegratorConfig integrator;
  Mode mode = Mode::kSolve;
  std::string out_dir = ".";
  bool trajectory_csv = true;
  std::optional<SweepSpec> sweep;
  std::optional<std::string> diagnose_trajectory;
  double diagnose_r_min = 1e-6;

  SolverOptions solver_options() const;
};

// The JSON Schema shipped in docs/config.schema.json.
const nlohmann::json& config_schema();

// Schema validation first, then semantic checks. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Fully explicit form: every default is written out, so that parsing the
// result gives back the same effective configuration.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace dlambert::cli
