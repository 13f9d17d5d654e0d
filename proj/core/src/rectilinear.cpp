#include "dlambert/rectilinear.hpp"

#include <cmath>

#include "dlambert/levi_civita.hpp"

namespace dlambert {

void RadialProblem::validate() const {
  if (!(r_A > 0.0) || !(r_B > 0.0)) throw DomainError("radial problem needs r_A, r_B > 0");
  if (!(T > 0.0)) throw DomainError("T must be positive");
  if (!(norm(direction) > 0.0)) throw DomainError("radial direction must be nonzero");
}

namespace {

constexpr int kMaxDoublings = 200;

RadialOutcome collided(double t) {
  RadialOutcome out;
  out.t_collision = t;
  out.regularized = true;
  return out;
}

// Below r_collision the motion is finished in regularized variables. Fields
// that cannot be regularized are followed in Cartesian form down to a much
// smaller radius instead; the collision time error there is ~r^{3/2}.
RadialOutcome finish_near_origin(const RadialProblem& p, const State& handoff, double t_handoff,
                                 const IntegratorConfig& cfg) {
  const Vec2 e = p.unit();
  const double r = norm(handoff.x);
  const double rdot = dot(handoff.x, handoff.xdot) / r;
  try {
    LCState1D lc0 = goursat_1d(r, rdot, 0.5 * rdot * rdot - 1.0 / r);
    lc0.t_accum = t_handoff;
    LCOptions opts;
    opts.stop_at_collision = true;
    const LC1DRun run = integrate_lc_1d_backward(p.field, e, lc0, p.T, cfg, opts);
    if (run.stop == LCStop::kCollision) return collided(run.final.t_accum);
    if (run.stop != LCStop::kReachedTime) throw SolverError("regularized radial flow failed");
    RadialOutcome out;
    out.reached = true;
    out.regularized = true;
    out.r_at_minus_T = run.final.u * run.final.u;
    return out;
  } catch (const RegularizationRefused&) {
    IntegratorConfig fine = cfg;
    fine.r_collision = 1e-10;
    const State s{r * e, rdot * e, 0.0};
    const double remaining = p.T + t_handoff;
    const Trajectory traj = integrate_backward(p.field, s, remaining, fine);
    if (traj.terminal.kind == TerminalKind::kCollisionHandoff) return collided(t_handoff + traj.terminal.t);
    if (!traj.reached_target()) throw SolverError("radial flow failed near the origin: " + traj.terminal.message);
    RadialOutcome out;
    out.reached = true;
    out.regularized = true;
    out.r_at_minus_T = norm(traj.terminal.state.x);
    return out;
  }
}

RadialOutcome flow(const RadialProblem& p, double v, const IntegratorConfig& cfg, bool want_derivative) {
  p.validate();
  if (!std::isfinite(v)) throw DomainError("radial speed must be finite");
  const Vec2 e = p.unit();
  const State s0{p.r_B * e, v * e, 0.0};
  const VariationalRun run =
      integrate_variational_backward(p.field, s0, Mat2::from_columns(e, Vec2{}), p.T, cfg);
  const Terminal& term = run.trajectory.terminal;
  if (term.kind == TerminalKind::kReachedTarget) {
    RadialOutcome out;
    out.reached = true;
    out.r_at_minus_T = dot(term.state.x, e);
    out.dR_dv = dot(run.position_jacobian.col(0), e);
    return out;
  }
  if (term.kind != TerminalKind::kCollisionHandoff) throw SolverError("radial flow failed: " + term.message);

  RadialOutcome out = finish_near_origin(p, term.state, term.t, cfg);
  if (out.reached && want_derivative) {
    // The variational flow stops at the handoff; use central differences.
    const double h = 1e-6 * (1.0 + std::abs(v));
    const RadialOutcome plus = flow(p, v + h, cfg, false), minus = flow(p, v - h, cfg, false);
    if (plus.reached && minus.reached) {
      out.dR_dv = (plus.r_at_minus_T - minus.r_at_minus_T) / (2.0 * h);
    } else if (minus.reached) {
      out.dR_dv = (out.r_at_minus_T - minus.r_at_minus_T) / h;
    } else {
      out.dR_dv = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

}  // namespace

RadialOutcome radial_flow(const RadialProblem& problem, double v, const IntegratorConfig& cfg) {
  return flow(problem, v, cfg, true);
}

Interval find_beta(const RadialProblem& problem, double tol, const IntegratorConfig& cfg) {
  if (!(tol > 0.0)) throw DomainError("find_beta tolerance must be positive");
  auto survives = [&](double v) { return flow(problem, v, cfg, false).reached; };
  Interval b;
  if (survives(0.0)) {
    b.lo = 0.0;
    double step = 1.0;
    int n = 0;
    for (; n < kMaxDoublings && survives(step); ++n) {
      b.lo = step;
      step *= 2.0;
    }
    if (n == kMaxDoublings) throw SolverError("could not bracket beta: no collision found for large speeds");
    b.hi = step;
  } else {
    b.hi = 0.0;
    double step = -1.0;
    int n = 0;
    for (; n < kMaxDoublings && !survives(step); ++n) {
      b.hi = step;
      step *= 2.0;
    }
    if (n == kMaxDoublings) throw SolverError("could not bracket beta: every speed collides");
    b.lo = step;
  }
  while (b.width() > tol) {
    const double mid = 0.5 * (b.lo + b.hi);
    if (mid <= b.lo || mid >= b.hi) break;
    (survives(mid) ? b.lo : b.hi) = mid;
  }
  return b;
}

RadialSolution solve_rectilinear(const RadialProblem& problem, double tol, const IntegratorConfig& cfg,
                                 std::optional<Interval> bracket) {
  problem.validate();
  if (!(tol > 0.0)) throw DomainError("solve_rectilinear tolerance must be positive");

  RadialSolution sol;
  double collided_min = std::numeric_limits<double>::infinity();
  // f(v) = r(-T) - r_A, with collisions counted as negative.
  auto f = [&](double v, bool deriv) {
    const RadialOutcome o = flow(problem, v, cfg, deriv);
    if (!o.reached) collided_min = std::min(collided_min, v);
    return o;
  };
  auto value = [&](const RadialOutcome& o) { return o.reached ? o.r_at_minus_T - problem.r_A : -problem.r_A; };

  Interval b;
  if (bracket) {
    b = *bracket;
    if (!(b.lo < b.hi) || !(value(f(b.lo, false)) > 0.0) || !(value(f(b.hi, false)) < 0.0)) {
      throw DomainError("supplied bracket does not enclose the root");
    }
  } else if (value(f(0.0, false)) > 0.0) {
    b.lo = 0.0;
    double step = 1.0;
    int n = 0;
    for (; n < kMaxDoublings && value(f(step, false)) > 0.0; ++n) {
      b.lo = step;
      step *= 2.0;
    }
    if (n == kMaxDoublings) throw SolverError("internal error: radial root not bracketed");
    b.hi = step;
  } else {
    b.hi = 0.0;
    double step = -1.0;
    int n = 0;
    for (; n < kMaxDoublings && value(f(step, false)) <= 0.0; ++n) {
      b.hi = step;
      step *= 2.0;
    }
    if (n == kMaxDoublings) throw SolverError("internal error: radial root not bracketed");
    b.lo = step;
  }

  int iters = 0;
  while (b.width() > 1e-3 * (1.0 + std::abs(0.5 * (b.lo + b.hi)))) {
    const double mid = 0.5 * (b.lo + b.hi);
    (value(f(mid, false)) > 0.0 ? b.lo : b.hi) = mid;
    ++iters;
  }

  double v = 0.5 * (b.lo + b.hi);
  RadialOutcome o;
  for (int k = 0; k < 200; ++k, ++iters) {
    o = f(v, true);
    const double fv = value(o);
    if (o.reached && std::abs(fv) <= tol) break;
    (fv > 0.0 ? b.lo : b.hi) = v;
    if (b.width() <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(v))) break;
    double next = (o.reached && o.dR_dv < 0.0) ? v - fv / o.dR_dv : NAN;
    if (!(next > b.lo && next < b.hi)) next = 0.5 * (b.lo + b.hi);
    v = next;
  }
  if (!o.reached) throw SolverError("internal error: radial root finder ended on a colliding speed");

  sol.v_final = v;
  sol.residual = std::abs(o.r_at_minus_T - problem.r_A);
  sol.dR_dv = o.dR_dv;
  sol.nondegenerate = o.dR_dv < 0.0;
  sol.iterations = iters;
  sol.beta_bracket = {v, collided_min};
  const Vec2 e = problem.unit();
  sol.trajectory = integrate_backward(problem.field, {problem.r_B * e, v * e, 0.0}, problem.T, cfg);
  return sol;
}

}  // namespace dlambert
