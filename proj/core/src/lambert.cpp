#include "dlambert/lambert.hpp"

#include <algorithm>
#include <cmath>

#include "dlambert/rectilinear.hpp"

namespace dlambert {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::kCW:
      return "cw";
    case Direction::kCCW:
      return "ccw";
    case Direction::kAuto:
      return "auto";
  }
  return "auto";
}

const char* to_string(ArcKind k) {
  switch (k) {
    case ArcKind::kRectilinear:
      return "rectilinear";
    case ArcKind::kCW:
      return "cw";
    case ArcKind::kCCW:
      return "ccw";
  }
  return "ccw";
}

Direction direction_from_string(const std::string& s) {
  if (s == "cw") return Direction::kCW;
  if (s == "ccw") return Direction::kCCW;
  if (s == "auto") return Direction::kAuto;
  throw ConfigError("direction must be one of cw, ccw, auto (got '" + s + "')");
}

void LambertProblem::validate() const {
  if (!(norm(A) > 0.0) || !(norm(B) > 0.0)) throw DomainError("A and B must differ from the origin");
  if (!std::isfinite(A.x) || !std::isfinite(A.y) || !std::isfinite(B.x) || !std::isfinite(B.y)) {
    throw DomainError("A and B must be finite");
  }
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("T must be positive");
}

double speed_ceiling(const LambertProblem& problem, double multiple) {
  const double a = norm(problem.A), b = norm(problem.B);
  return multiple * std::sqrt(2.0 / std::min(a, b) + (a + b) * (a + b) / (problem.T * problem.T));
}

namespace {

Mat2 polar_jacobian(const Vec2& x, const Mat2& dx_dv) {
  const double r = norm(x);
  const Vec2 c0 = dx_dv.col(0), c1 = dx_dv.col(1);
  return {dot(x, c0) / r, dot(x, c1) / r, cross(x, c0) / (r * r), cross(x, c1) / (r * r)};
}

bool collinear(const State& s) {
  return std::abs(cross(s.x, s.xdot)) <= 1e-14 * norm(s.x) * std::max(norm(s.xdot), 1e-300);
}

void append_sample(const LambertProblem& p, Trajectory& traj, const State& s, double q) {
  const double prev = traj.samples.back().diag.theta;
  Diagnostics d = diagnostics(p.field, s, arg(s.x), std::exp(-q));
  d.theta = lift_angle(prev, arg(s.x));
  traj.samples.push_back({s, d});
}

// Completes a shot that went below r_collision. Returns (x(-T), theta(-T)).
std::pair<Vec2, double> finish_regularized(const LambertProblem& p, Trajectory& traj, const IntegratorConfig& cfg) {
  const State sh = traj.terminal.state;
  const double th = traj.terminal.t;
  const double theta_h = traj.samples.back().diag.theta;
  const double q_h = -std::log(traj.samples.back().diag.p);

  if (collinear(sh)) {
    // Radial fall: it collides unless -T comes first.
    const double r = norm(sh.x), rdot = dot(sh.x, sh.xdot) / r;
    LCState1D lc0 = goursat_1d(r, rdot, 0.5 * rdot * rdot - 1.0 / r);
    lc0.t_accum = th;
    lc0.q = q_h;
    LCOptions opts;
    opts.stop_at_collision = true;
    const LC1DRun run = integrate_lc_1d_backward(p.field, sh.x, lc0, p.T, cfg, opts);
    if (run.stop == LCStop::kCollision) throw CollisionBeforeT("backward solution collides before -T", run.final.t_accum);
    if (run.stop != LCStop::kReachedTime) throw SolverError("regularized radial continuation failed");
    const Vec2 e = sh.x / r;
    for (std::size_t i = 1; i < run.nodes.size(); ++i) {
      const LCState1D n = project_to_manifold(run.nodes[i]);
      if (n.u == 0.0) continue;
      append_sample(p, traj, {n.u * n.u * e, (2.0 * n.u_prime / n.u) * e, n.t_accum}, n.q);
    }
    const Vec2 x_end = run.final.u * run.final.u * e;
    traj.terminal = {TerminalKind::kReachedTarget, -p.T, traj.samples.back().state, "reached target"};
    return {x_end, theta_h};
  }

  LCStatePlanar lc0 = goursat_planar(sh.x, sh.xdot);
  lc0.t_accum = th;
  lc0.q = q_h;
  LCOptions opts;
  opts.guard_angle = true;
  LCPlanarRun run;
  try {
    run = integrate_lc_planar_backward(p.field, lc0, p.T, cfg, opts);
  } catch (const RegularizationRefused&) {
    // Stay Cartesian and accept the stiffness near the pericentre.
    IntegratorConfig fine = cfg;
    fine.r_collision = 1e-10;
    const Trajectory rest = integrate_backward(p.field, sh, p.T + th, fine);
    if (rest.terminal.kind == TerminalKind::kCollisionHandoff) {
      throw CollisionBeforeT("backward solution reaches the origin", th + rest.terminal.t);
    }
    if (!rest.reached_target()) throw SolverError("near-collision continuation failed: " + rest.terminal.message);
    double theta = theta_h;
    for (std::size_t i = 1; i < rest.samples.size(); ++i) {
      State s = rest.samples[i].state;
      s.t += th;
      theta = lift_angle(theta, arg(s.x));
      append_sample(p, traj, s, q_h - std::log(rest.samples[i].diag.p));
    }
    traj.terminal = {TerminalKind::kReachedTarget, -p.T, traj.samples.back().state, "reached target"};
    return {rest.terminal.state.x, theta};
  }
  if (run.stop != LCStop::kReachedTime) throw SolverError("regularized continuation did not reach -T");
  for (std::size_t i = 1; i < run.nodes.size(); ++i) {
    try {
      append_sample(p, traj, lc_to_physical(project_to_manifold(run.nodes[i])), run.nodes[i].q);
    } catch (const VelocityUndefined&) {
    }
  }
  const double theta_end = theta_h + 2.0 * run.arg_w_change;
  traj.samples.back().diag.theta = theta_end;
  traj.terminal = {TerminalKind::kReachedTarget, -p.T, traj.samples.back().state, "reached target"};
  return {csquare(run.final.w), theta_end};
}

}  // namespace

ShootResult shoot(const LambertProblem& problem, const Vec2& v0, const IntegratorConfig& cfg, bool want_jacobian) {
  problem.validate();
  const State s0{problem.B, v0, 0.0};
  const std::vector<EventKind> events{EventKind::angle_sweep_exceeds(kTwoPi)};
  ShootResult out;
  Mat2 dx_dv;
  if (want_jacobian) {
    VariationalRun run = integrate_variational_backward(problem.field, s0, Mat2::identity(), problem.T, cfg, events);
    out.trajectory = std::move(run.trajectory);
    dx_dv = run.position_jacobian;
  } else {
    out.trajectory = integrate_backward(problem.field, s0, problem.T, cfg, events);
  }
  Trajectory& traj = out.trajectory;
  const double theta_B = arg(problem.B);

  switch (traj.terminal.kind) {
    case TerminalKind::kReachedTarget:
      out.x_minus_T = traj.terminal.state.x;
      out.theta_minus_T = traj.samples.back().diag.theta;
      break;
    case TerminalKind::kSweepExceeded:
      throw SweepExceeded("trial solution sweeps a full turn before -T");
    case TerminalKind::kStepFailure:
      throw SolverError("integration failed: " + traj.terminal.message);
    case TerminalKind::kCollisionHandoff: {
      out.regularized = true;
      const auto [x, theta] = finish_regularized(problem, traj, cfg);
      out.x_minus_T = x;
      out.theta_minus_T = theta;
      break;
    }
  }
  out.r_minus_T = norm(out.x_minus_T);
  out.swept = theta_B - out.theta_minus_T;
  if (std::abs(out.swept) >= kTwoPi) throw SweepExceeded("trial solution sweeps a full turn before -T");

  if (want_jacobian) {
    if (!out.regularized) {
      out.jacobian = polar_jacobian(out.x_minus_T, dx_dv);
    } else {
      // No variational flow through the regularized part: central differences.
      const double h = 1e-6 * (1.0 + norm(v0));
      double cols[2][2];
      for (int j = 0; j < 2; ++j) {
        const Vec2 e = j == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
        const ShootResult plus = shoot(problem, v0 + e, cfg, false);
        const ShootResult minus = shoot(problem, v0 - e, cfg, false);
        cols[j][0] = (plus.r_minus_T - minus.r_minus_T) / (2.0 * h);
        cols[j][1] = (plus.theta_minus_T - minus.theta_minus_T) / (2.0 * h);
      }
      out.jacobian = {cols[0][0], cols[1][0], cols[0][1], cols[1][1]};
    }
  }
  return out;
}

Vec2 seed_from_rectilinear(const LambertProblem& problem, const IntegratorConfig& cfg) {
  problem.validate();
  RadialProblem rp;
  rp.field = problem.field;
  rp.direction = problem.B;
  rp.r_A = norm(problem.A);
  rp.r_B = norm(problem.B);
  rp.T = problem.T;
  const RadialSolution sol = solve_rectilinear(rp, 1e-12, cfg);
  return sol.v_final * rp.unit();
}

double target_theta(const LambertProblem& problem, ArcKind kind) {
  const double theta_B = arg(problem.B);
  double sweep = angle_between(problem.A, problem.B);
  if (sweep <= 0.0) sweep += kTwoPi;
  if (kind == ArcKind::kCW) sweep -= kTwoPi;
  if (kind == ArcKind::kRectilinear) sweep = 0.0;
  return theta_B - sweep;
}

namespace {

// Damped Newton on Phi(lambda, .) = 0 with the theta row weighted by r_A.
class Corrector {
 public:
  Corrector(const LambertProblem& problem, ArcKind kind, const SolverOptions& opts)
      : problem_(problem),
        opts_(opts),
        r_A_(norm(problem.A)),
        theta_B_(arg(problem.B)),
        theta_A_(target_theta(problem, kind)),
        guard_(speed_ceiling(problem, opts.guard_multiple)) {}

  struct Result {
    Vec2 v;
    ShootResult shot;
    double residual = 0.0;
    int iterations = 0;
  };

  std::optional<Result> correct(double lambda, Vec2 v) const {
    std::optional<ShootResult> cur = evaluate(v);
    if (!cur) return std::nullopt;
    Vec2 f = residual(lambda, *cur);
    for (int it = 0; it <= opts_.max_newton; ++it) {
      if (size(f) <= opts_.corrector_tol) return Result{v, std::move(*cur), size(f), it};
      if (it == opts_.max_newton) break;
      const Mat2 J{cur->jacobian.a, cur->jacobian.b, r_A_ * cur->jacobian.c, r_A_ * cur->jacobian.d};
      Vec2 dv;
      if (!solve2(J, -1.0 * f, dv)) return std::nullopt;
      bool moved = false;
      for (double damping = 1.0; damping >= 1.0 / 256.0; damping *= 0.5) {
        const Vec2 trial_v = v + damping * dv;
        std::optional<ShootResult> trial = evaluate(trial_v);
        if (!trial) continue;
        const Vec2 ft = residual(lambda, *trial);
        if (size(ft) < size(f)) {
          v = trial_v;
          cur = std::move(trial);
          f = ft;
          moved = true;
          break;
        }
      }
      if (!moved) return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  Vec2 residual(double lambda, const ShootResult& s) const {
    const double target = (1.0 - lambda) * theta_B_ + lambda * theta_A_;
    return Vec2{s.r_minus_T - r_A_, r_A_ * (s.theta_minus_T - target)};
  }
  static double size(const Vec2& f) { return std::max(std::abs(f.x), std::abs(f.y)); }

  std::optional<ShootResult> evaluate(const Vec2& v) const {
    if (!(norm(v) <= guard_)) return std::nullopt;
    try {
      return shoot(problem_, v, opts_.integrator, true);
    } catch (const SolverError&) {
      return std::nullopt;
    } catch (const DomainError&) {
      return std::nullopt;
    }
  }

  const LambertProblem& problem_;
  const SolverOptions& opts_;
  double r_A_, theta_B_, theta_A_, guard_;
};

ArcSolution make_arc(const LambertProblem& problem, ArcKind kind, Corrector::Result node, ContinuationTrace trace,
                     int newton_total) {
  ArcSolution arc;
  arc.v0 = node.v;
  arc.kind = kind;
  arc.residual_position = norm(node.shot.x_minus_T - problem.A);
  arc.swept = node.shot.swept;
  const double c0 = cross(problem.B, arc.v0);
  arc.sign_c = c0 > 0.0 ? 1 : (c0 < 0.0 ? -1 : 0);
  if (arc.sign_c != (kind == ArcKind::kCCW ? 1 : -1)) {
    throw ContinuationStalled("continuation ended on an arc rotating the wrong way", std::move(trace));
  }
  arc.trajectory = std::move(node.shot.trajectory);
  arc.trace = std::move(trace);
  arc.newton_total = newton_total;
  return arc;
}

}  // namespace

ArcSolution continue_to_target(const LambertProblem& problem, const Vec2& v0_seed, ArcKind kind,
                               const SolverOptions& opts) {
  problem.validate();
  if (kind == ArcKind::kRectilinear) throw DomainError("continuation needs a sense of rotation");
  const Corrector corrector(problem, kind, opts);

  ContinuationTrace trace;
  std::optional<Corrector::Result> first = corrector.correct(0.0, v0_seed);
  if (!first) throw ContinuationStalled("rectilinear seed does not solve the lambda = 0 problem", trace);
  Corrector::Result node = std::move(*first);
  int newton_total = node.iterations;
  trace.push_back({0.0, node.v, node.residual, 0.0, node.iterations});

  double lambda = 0.0, dl = std::clamp(opts.dlambda_init, opts.dlambda_min, opts.dlambda_max);
  double lambda_prev = 0.0;
  Vec2 v_prev = node.v;
  bool have_prev = false;
  while (lambda < 1.0) {
    const double next = std::min(1.0, lambda + dl);
    Vec2 guess = node.v;
    if (have_prev) guess = node.v + ((next - lambda) / (lambda - lambda_prev)) * (node.v - v_prev);
    std::optional<Corrector::Result> res = corrector.correct(next, guess);
    if (!res && have_prev) res = corrector.correct(next, node.v);
    if (!res) {
      dl *= 0.5;
      if (dl < opts.dlambda_min) {
        throw ContinuationStalled("continuation stalled at lambda = " + std::to_string(lambda) +
                                      " (swept " + std::to_string(node.shot.swept) + ")",
                                  trace);
      }
      continue;
    }
    newton_total += res->iterations;
    trace.push_back({next, res->v, res->residual, next - lambda, res->iterations});
    lambda_prev = lambda;
    v_prev = node.v;
    have_prev = true;
    lambda = next;
    node = std::move(*res);
    if (node.iterations <= 3) dl = std::min(2.0 * dl, opts.dlambda_max);
  }
  return make_arc(problem, kind, std::move(node), std::move(trace), newton_total);
}

ArcSolution refine_arc(const LambertProblem& problem, const Vec2& v0_guess, ArcKind kind, const SolverOptions& opts) {
  problem.validate();
  if (kind == ArcKind::kRectilinear) throw DomainError("refinement needs a sense of rotation");
  const Corrector corrector(problem, kind, opts);
  std::optional<Corrector::Result> res = corrector.correct(1.0, v0_guess);
  if (!res) throw ContinuationStalled("Newton from the supplied guess did not converge", {});
  ContinuationTrace trace{{1.0, res->v, res->residual, 0.0, res->iterations}};
  const int iterations = res->iterations;
  return make_arc(problem, kind, std::move(*res), std::move(trace), iterations);
}

namespace {

void verify(const LambertProblem& problem, const SolverOptions& opts, ArcSolution& arc, const Vec2& target) {
  ShootResult check = shoot(problem, arc.v0, opts.integrator.tightened(opts.verify_factor), false);
  arc.verification_residual = norm(check.x_minus_T - target);
  arc.verified = arc.verification_residual <= opts.verify_tol * (1.0 + norm(problem.A));
  if (arc.verified) arc.trajectory = std::move(check.trajectory);
}

}  // namespace

SolveReport solve(const LambertProblem& problem, const SolverOptions& opts, const WarmStart& warm) {
  problem.validate();
  opts.integrator.validate();
  SolveReport report;
  const double angle = std::abs(angle_between(problem.A, problem.B));
  report.same_ray = angle < opts.same_ray_tol;
  report.near_ray = !report.same_ray && angle < opts.near_ray_tol;

  if (report.same_ray || report.near_ray) {
    try {
      RadialProblem rp;
      rp.field = problem.field;
      rp.direction = problem.B;
      rp.r_A = norm(problem.A);
      rp.r_B = norm(problem.B);
      rp.T = problem.T;
      RadialSolution sol = solve_rectilinear(rp, 1e-12, opts.integrator);
      ArcSolution arc;
      arc.v0 = sol.v_final * rp.unit();
      arc.kind = ArcKind::kRectilinear;
      const Vec2 target = rp.r_A * rp.unit();
      arc.residual_position = norm(sol.trajectory.terminal.state.x - target);
      arc.trajectory = std::move(sol.trajectory);
      arc.near_ray = report.near_ray;
      arc.newton_total = sol.iterations;
      // A is replaced by its projection onto the ray of B.
      LambertProblem projected = problem;
      projected.A = target;
      verify(projected, opts, arc, target);
      if (arc.verified) {
        report.arcs.push_back(std::move(arc));
      } else {
        report.failures.push_back({ArcKind::kRectilinear, "verification re-integration missed A", {}});
      }
    } catch (const std::exception& e) {
      report.failures.push_back({ArcKind::kRectilinear, e.what(), {}});
    }
    if (report.same_ray) return report;
  }

  std::vector<ArcKind> kinds;
  if (problem.direction != Direction::kCW) kinds.push_back(ArcKind::kCCW);
  if (problem.direction != Direction::kCCW) kinds.push_back(ArcKind::kCW);

  Vec2 seed;
  bool have_seed = false;
  for (ArcKind k : kinds) {
    const std::optional<Vec2>& hint = k == ArcKind::kCCW ? warm.ccw : warm.cw;
    if (hint) {
      try {
        ArcSolution arc = refine_arc(problem, *hint, k, opts);
        arc.near_ray = report.near_ray;
        verify(problem, opts, arc, problem.A);
        if (arc.verified) {
          report.arcs.push_back(std::move(arc));
          continue;
        }
      } catch (const SolverError&) {
        // fall back to continuation from the rectilinear seed
      }
    }
    if (!have_seed) {
      try {
        seed = seed_from_rectilinear(problem, opts.integrator);
        have_seed = true;
      } catch (const std::exception& e) {
        report.failures.push_back({k, std::string("rectilinear seed failed: ") + e.what(), {}});
        continue;
      }
    }
    try {
      ArcSolution arc = continue_to_target(problem, seed, k, opts);
      arc.near_ray = report.near_ray;
      verify(problem, opts, arc, problem.A);
      if (arc.verified) {
        report.arcs.push_back(std::move(arc));
      } else {
        report.failures.push_back({k, "verification re-integration missed A", arc.trace});
      }
    } catch (const ContinuationStalled& e) {
      report.failures.push_back({k, e.what(), e.trace()});
    } catch (const std::exception& e) {
      report.failures.push_back({k, e.what(), {}});
    }
  }
  return report;
}

}  // namespace dlambert
