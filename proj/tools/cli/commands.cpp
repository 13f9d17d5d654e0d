#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "csv.hpp"
#include "dlambert/field_json.hpp"

namespace dlambert::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec_json(const Vec2& v) { return {v.x, v.y}; }

json trace_json(const ContinuationTrace& trace) {
  json arr = json::array();
  for (const auto& n : trace) {
    arr.push_back({{"lambda", n.lambda},
                   {"v0", vec_json(n.v0)},
                   {"residual", n.residual},
                   {"step", n.step},
                   {"newton_iterations", n.newton_iterations}});
  }
  return arr;
}

void print_trace_tail(std::ostream& err, const ContinuationTrace& trace, std::size_t n = 5) {
  if (trace.empty()) {
    err << "  (no continuation nodes)\n";
    return;
  }
  const std::size_t first = trace.size() > n ? trace.size() - n : 0;
  for (std::size_t i = first; i < trace.size(); ++i) {
    const auto& node = trace[i];
    err << "  lambda=" << format_short(node.lambda) << " v0=(" << format_short(node.v0.x) << ", "
        << format_short(node.v0.y) << ") residual=" << node.residual << " step=" << node.step
        << " newton=" << node.newton_iterations << '\n';
  }
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

json arc_json(const ArcSolution& arc) {
  const auto& s = arc.trajectory.samples;
  json j{{"kind", to_string(arc.kind)},
         {"v0", vec_json(arc.v0)},
         {"residual", arc.residual_position},
         {"swept_angle", arc.swept},
         {"sign_c", arc.sign_c},
         {"energy_start_end", {s.back().diag.h, s.front().diag.h}},
         {"trace", trace_json(arc.trace)},
         {"rectilinear", arc.kind == ArcKind::kRectilinear},
         {"near_ray", arc.near_ray},
         {"verification_residual", arc.verification_residual},
         {"newton_total", arc.newton_total}};
  return j;
}

std::vector<double> trajectory_column(const CsvTable& t, const std::string& name) {
  const std::size_t c = t.column(name);
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& row : t.rows) v.push_back(row[c]);
  return v;
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir = prepare_out_dir(cfg);
  json summary{{"config", to_json(cfg)}};

  if (cfg.mode == Mode::kSeed) {
    const Vec2 seed = seed_from_rectilinear(cfg.problem, cfg.integrator);
    summary["seed_v0"] = vec_json(seed);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    out << "rectilinear seed v0 = (" << format_short(seed.x) << ", " << format_short(seed.y) << ")\n";
    return kExitOk;
  }

  const SolveReport report = solve(cfg.problem, cfg.solver_options());
  summary["same_ray"] = report.same_ray;
  summary["near_ray"] = report.near_ray;
  summary["converged"] = report.all_converged();
  summary["arcs"] = json::array();
  for (const auto& arc : report.arcs) {
    json a = arc_json(arc);
    if (cfg.trajectory_csv) {
      const std::string name = std::string("arc_") + to_string(arc.kind) + ".csv";
      std::ofstream f(dir / name);
      if (!f) throw ConfigError("cannot write " + (dir / name).string());
      write_trajectory_csv(f, arc.trajectory);
      a["trajectory_csv"] = name;
    }
    summary["arcs"].push_back(std::move(a));
    out << to_string(arc.kind) << ": v0 = (" << format_short(arc.v0.x) << ", " << format_short(arc.v0.y)
        << ")  residual " << arc.residual_position << "  swept " << arc.swept << '\n';
  }
  summary["failures"] = json::array();
  for (const auto& f : report.failures) {
    summary["failures"].push_back({{"kind", to_string(f.kind)}, {"message", f.message}, {"trace", trace_json(f.trace)}});
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");

  if (report.all_converged()) return kExitOk;
  if (report.failures.empty()) err << "solver failure: no arc found\n";
  for (const auto& f : report.failures) {
    err << "solver failure (" << to_string(f.kind) << "): " << f.message << "\n  continuation trace tail:\n";
    print_trace_tail(err, f.trace);
  }
  return kExitSolver;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.sweep) throw ConfigError("config has no \"sweep\" section");
  const std::vector<double> grid = cfg.sweep->grid();
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  const bool over_T = cfg.sweep->param == SweepParam::kT;
  if (over_T) {
    for (double T : grid) {
      if (!(T > 0.0)) throw ConfigError("T must be positive");
    }
  }
  const fs::path dir = prepare_out_dir(cfg);
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw ConfigError("cannot write " + (dir / "sweep.csv").string());
  csv << "sweep_param,converged,v0x,v0y,residual,swept_angle,newton_total,direction,regime\n";

  const SolverOptions opts = cfg.solver_options();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  WarmStart warm;
  int rows = 0, converged = 0;
  for (double value : grid) {
    LambertProblem p = cfg.problem;
    if (over_T) {
      p.T = value;
    } else {
      p.B = norm(p.B) * rotate(p.A / norm(p.A), value);
    }
    const SolveReport rep = solve(p, opts, warm);
    const char* regime = rep.same_ray ? "same_ray" : (rep.near_ray ? "near_ray" : "generic");

    std::vector<ArcKind> kinds;
    if (rep.same_ray || rep.near_ray) kinds.push_back(ArcKind::kRectilinear);
    if (!rep.same_ray) {
      if (p.direction != Direction::kCW) kinds.push_back(ArcKind::kCCW);
      if (p.direction != Direction::kCCW) kinds.push_back(ArcKind::kCW);
    }
    for (ArcKind k : kinds) {
      const auto it = std::find_if(rep.arcs.begin(), rep.arcs.end(), [&](const ArcSolution& a) { return a.kind == k; });
      const bool ok = it != rep.arcs.end();
      const double row[] = {ok ? it->v0.x : nan, ok ? it->v0.y : nan, ok ? it->residual_position : nan,
                            ok ? it->swept : nan};
      csv << format_double(value) << ',' << (ok ? 1 : 0);
      for (double v : row) csv << ',' << format_double(v);
      csv << ',' << (ok ? it->newton_total : 0) << ',' << to_string(k) << ',' << regime << '\n';
      ++rows;
      if (ok) {
        ++converged;
        if (k == ArcKind::kCCW) warm.ccw = it->v0;
        if (k == ArcKind::kCW) warm.cw = it->v0;
      } else {
        err << "sweep " << format_short(value) << " (" << to_string(k) << ") did not converge\n";
      }
    }
  }
  out << "sweep: " << converged << " of " << rows << " rows converged -> " << (dir / "sweep.csv").string() << '\n';
  return converged > 0 ? kExitOk : kExitSolver;
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const FrictionField& field = cfg.problem.field;
  const D2Report d2 = check_d2(field, cfg.diagnose_r_min);
  out << "field: " << field.describe() << '\n';
  out << "d_star = " << format_short(field.d_star()) << '\n';
  out << "D2 check over r in [" << d2.r_min << ", 1]: max sqrt(r)|grad D| = " << d2.max_value
      << ", at r_min = " << d2.tail_value << ", decade ratio = " << d2.decade_ratio << '\n';
  out << "D2: " << (d2.flagged ? "flagged" : "pass") << '\n';
  if (!cfg.diagnose_trajectory) return kExitOk;

  std::ifstream in(*cfg.diagnose_trajectory);
  if (!in) throw ConfigError("cannot open trajectory " + *cfg.diagnose_trajectory);
  const CsvTable table = read_numeric_csv(in);
  if (table.rows.size() < 2) throw ConfigError("trajectory needs at least two rows");
  const auto t = trajectory_column(table, "t"), x1 = trajectory_column(table, "x1"),
             x2 = trajectory_column(table, "x2"), v1 = trajectory_column(table, "xdot1"),
             v2 = trajectory_column(table, "xdot2"), p = trajectory_column(table, "p");
  const std::size_t n = t.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t[i] > t[i - 1])) throw ConfigError("trajectory rows must be strictly increasing in t");
  }

  // p(t) = exp(-int_t^0 D) recomputed from the positions by the trapezoid rule.
  std::vector<double> q(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double da = field.eval({x1[i], x2[i]}), db = field.eval({x1[i + 1], x2[i + 1]});
    q[i] = q[i + 1] + 0.5 * (da + db) * (t[i + 1] - t[i]);
  }
  bool p_ok = true;
  double p_dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lower = std::exp(field.d_star() * t[i]);
    if (p[i] > 1.0 + 1e-12 || p[i] < lower * (1.0 - 1e-12)) p_ok = false;
    p_dev = std::max(p_dev, std::abs(p[i] - std::exp(-q[i])));
  }
  bool h_ok = true;
  double h_prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::hypot(x1[i], x2[i]);
    const double h = 0.5 * (v1[i] * v1[i] + v2[i] * v2[i]) - 1.0 / r;
    if (i > 0 && h > h_prev + 1e-9 * (1.0 + std::abs(h_prev))) h_ok = false;
    h_prev = h;
  }
  out << "trajectory: " << n << " rows over t in [" << format_short(t.front()) << ", " << format_short(t.back())
      << "]\n";
  out << "p-bound exp(d_star t) <= p <= 1: " << (p_ok ? "pass" : "FAIL") << '\n';
  out << "p recomputed from D along the path: max deviation " << p_dev << '\n';
  out << "energy nonincreasing in t: " << (h_ok ? "pass" : "FAIL") << '\n';
  return p_ok && h_ok ? kExitOk : kExitSolver;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-point boundary value solver for the damped Kepler problem"};
  app.require_subcommand(1);

  std::string config_path, out_dir, direction, trajectory;
  double rtol = 0.0, atol = 0.0;
  bool dump = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--direction", direction, "sense of rotation")->check(CLI::IsMember({"cw", "ccw", "auto"}));
    sub->add_option("--rtol", rtol, "integrator relative tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--atol", atol, "integrator absolute tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-config", dump, "print the effective configuration and exit");
  };
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve the configured problem");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "solve over a grid of T or endpoint angles");
  CLI::App* diag_cmd = app.add_subcommand("diagnose", "check the friction field and a trajectory");
  for (CLI::App* sub : {solve_cmd, sweep_cmd, diag_cmd}) add_common(sub);
  diag_cmd->add_option("--trajectory", trajectory, "trajectory CSV written by solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!direction.empty()) cfg.problem.direction = direction_from_string(direction);
    if (rtol > 0.0) cfg.integrator.rtol = rtol;
    if (atol > 0.0) cfg.integrator.atol = atol;
    if (!trajectory.empty()) cfg.diagnose_trajectory = trajectory;
    cfg.integrator.validate();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (dump) {
    out << to_json(cfg).dump(2) << '\n';
    return kExitOk;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(cfg, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, out, err);
    return cmd_diagnose(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace dlambert::cli
