#include "dlambert/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace dlambert {

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(h_min > 0.0) || !(h_init > h_min)) throw ConfigError("integrator requires 0 < h_min < h_init");
  if (max_steps <= 0) throw ConfigError("integrator max_steps must be positive");
  if (!(r_collision > 0.0)) throw ConfigError("integrator r_collision must be positive");
}

namespace {

template <std::size_t N>
State state_of(const Vec<N>& y, double tau) {
  return {{y[0], y[1]}, {y[2], y[3]}, -tau};
}

// Defining function of an event; positive before (in backward time) the event.
double event_value(const EventKind& kind, const State& s, double theta_prev, double theta0) {
  switch (kind.type) {
    case EventType::kRadiusBelow:
    case EventType::kRadiusEquals:
      return norm(s.x) - kind.value;
    case EventType::kRdotZero: {
      const double scale = norm(s.x) * norm(s.xdot);
      return scale > 0.0 ? dot(s.x, s.xdot) / scale : 0.0;
    }
    case EventType::kAngleSweepExceeds:
      return kind.value - std::abs(lift_angle(theta_prev, arg(s.x)) - theta0);
  }
  return 0.0;
}

// Relative noise band for the normalized radial-velocity event.
double event_floor(const EventKind& kind) { return kind.type == EventType::kRdotZero ? 1e-8 : 0.0; }

template <std::size_t N, class Rhs>
Trajectory run_backward(const FrictionField& field, const State& s0, double T, const IntegratorConfig& cfg,
                        const std::vector<EventKind>& events, const Vec<N>& y0, Rhs&& rhs, Vec<N>& y_final) {
  cfg.validate();
  if (!(T > 0.0)) throw DomainError("flight time must be positive");
  if (s0.x.x == 0.0 && s0.x.y == 0.0) throw DomainError("initial position at the origin");

  Trajectory traj;
  traj.d_star = field.d_star();
  const double theta0 = arg(s0.x);
  traj.samples.push_back({{s0.x, s0.xdot, 0.0}, diagnostics(field, {s0.x, s0.xdot, 0.0}, theta0, 1.0)});
  y_final = y0;

  const auto sweep_it = std::find_if(events.begin(), events.end(), [](const EventKind& e) {
    return e.type == EventType::kAngleSweepExceeds;
  });
  const EventKind collision = EventKind::radius_below(cfg.r_collision);

  auto on_step = [&](const DenseSegment<N>& seg) -> StepVerdict {
    const double theta_prev = traj.samples.back().diag.theta;
    DenseSegment<N> cut = seg;
    std::optional<Terminal> stop;

    auto g_of = [&](const EventKind& kind) {
      return [&, kind](double tau, const Vec<N>& y) {
        return event_value(kind, state_of<N>(y, tau), theta_prev, theta0);
      };
    };

    // The argument must be tracked unambiguously across the step.
    {
      double lifted = theta_prev;
      for (int k = 1; k <= 4; ++k) {
        const Vec<N> y = seg.eval(seg.t0 + (seg.t_end() - seg.t0) * k / 4.0);
        const double next = lift_angle(lifted, arg({y[0], y[1]}));
        if (std::abs(next - lifted) > 0.5 * kMaxAngleStep) return StepVerdict::kReject;
        lifted = next;
      }
      if (std::abs(lifted - theta_prev) > kMaxAngleStep) return StepVerdict::kReject;
    }

    std::optional<Vec<N>> y_handoff;
    if (auto hit = find_crossing(seg, g_of(collision))) {
      cut.t_stop = *hit;
      // The handoff state seeds the regularized run: take a real step to it.
      try {
        y_handoff = dopri5_single_step<N>(rhs, seg.t0, seg.eval(seg.t0), *hit - seg.t0);
      } catch (const DomainError&) {
        y_handoff = seg.eval(*hit);
      }
      stop = Terminal{TerminalKind::kCollisionHandoff, -*hit, state_of<N>(*y_handoff, *hit), "collision handoff"};
    }
    if (sweep_it != events.end()) {
      DenseSegment<N> probe = cut;
      if (auto hit = find_crossing(probe, g_of(*sweep_it))) {
        cut.t_stop = *hit;
        const Vec<N> y = seg.eval(*hit);
        stop = Terminal{TerminalKind::kSweepExceeded, -*hit, state_of<N>(y, *hit), "swept angle limit reached"};
      }
    }

    const double tau_end = cut.t_end();
    const bool at_handoff = stop && stop->kind == TerminalKind::kCollisionHandoff;
    const Vec<N> y_end = at_handoff ? *y_handoff : seg.eval(tau_end);
    const State s_end = state_of<N>(y_end, tau_end);
    Diagnostics d;
    try {
      d = diagnostics(field, s_end, theta_prev, std::exp(-y_end[4]));
    } catch (const AngleStepTooLarge&) {
      return StepVerdict::kReject;
    } catch (const DomainError&) {
      return StepVerdict::kReject;
    }

    for (const auto& ev : events) {
      if (ev.type == EventType::kAngleSweepExceeds) continue;
      if (auto hit = find_crossing(cut, g_of(ev), 1e-13, 4, false, event_floor(ev))) {
        traj.events.push_back({ev, -*hit, state_of<N>(seg.eval(*hit), *hit)});
      }
    }
    if (stop) {
      traj.events.push_back({stop->kind == TerminalKind::kCollisionHandoff ? collision : *sweep_it, stop->t, stop->state});
    }

    traj.segments.push_back(cut.template project<Trajectory::kDim>());
    traj.samples.push_back({s_end, d});
    y_final = y_end;
    if (stop) {
      traj.terminal = *stop;
      return StepVerdict::kStop;
    }
    return StepVerdict::kAccept;
  };

  const RunResult<N> res = dopri5<N>(rhs, 0.0, y0, T, cfg, on_step);
  switch (res.status) {
    case RunStatus::kCompleted:
      traj.terminal = {TerminalKind::kReachedTarget, -T, traj.samples.back().state, "reached target"};
      break;
    case RunStatus::kStopped:
      break;
    case RunStatus::kStepFailure:
      traj.terminal = {TerminalKind::kStepFailure, -res.t, state_of<N>(res.y, res.t),
                       "step size fell below h_min"};
      break;
    case RunStatus::kMaxSteps:
      throw SolverError("integrator exhausted max_steps at t = " + std::to_string(-res.t));
  }
  return traj;
}

}  // namespace

const DenseSegment<Trajectory::kDim>& Trajectory::segment_for(double tau) const {
  if (segments.empty()) throw DomainError("empty trajectory");
  auto it = std::lower_bound(segments.begin(), segments.end(), tau,
                             [](const DenseSegment<kDim>& s, double v) { return s.t_end() < v; });
  if (it == segments.end()) --it;
  return *it;
}

State Trajectory::state_at(double t) const {
  const double tau = -t;
  if (tau < -1e-14 || tau > -t_start() + 1e-14) throw DomainError("time outside trajectory range");
  const auto y = segment_for(tau).eval(tau);
  return {{y[0], y[1]}, {y[2], y[3]}, t};
}

double Trajectory::p_at(double t) const {
  const double tau = -t;
  return std::exp(-segment_for(tau).eval(tau)[4]);
}

std::optional<Event> Trajectory::locate(const EventKind& kind) const {
  if (segments.empty()) return std::nullopt;
  const double theta0 = samples.front().diag.theta;
  // Segments are ordered by increasing tau, so scan from the far end.
  for (std::size_t i = segments.size(); i-- > 0;) {
    const double theta_prev = samples[i].diag.theta;
    auto g = [&](double tau, const Vec<kDim>& y) {
      return event_value(kind, state_of<kDim>(y, tau), theta_prev, theta0);
    };
    if (auto hit = find_crossing(segments[i], g, 1e-13, 8, /*last=*/true, event_floor(kind))) {
      return Event{kind, -*hit, state_of<kDim>(segments[i].eval(*hit), *hit)};
    }
  }
  return std::nullopt;
}

std::optional<Event> locate_event(const Trajectory& traj, const EventKind& kind) { return traj.locate(kind); }

Trajectory integrate_backward(const FrictionField& field, const State& s0, double T, const IntegratorConfig& cfg,
                              const std::vector<EventKind>& events) {
  constexpr std::size_t N = 5;
  auto rhs = [&](double /*tau*/, const Vec<N>& y) {
    const State s{{y[0], y[1]}, {y[2], y[3]}, 0.0};
    const StateDerivative d = rhs_cartesian(field, s);
    return Vec<N>{-d.xdot.x, -d.xdot.y, -d.xddot.x, -d.xddot.y, field.eval(s.x)};
  };
  Vec<N> y_final{};
  return run_backward<N>(field, s0, T, cfg, events, Vec<N>{s0.x.x, s0.x.y, s0.xdot.x, s0.xdot.y, 0.0}, rhs,
                         y_final);
}

VariationalRun integrate_variational_backward(const FrictionField& field, const State& s0, const Mat2& V0,
                                              double T, const IntegratorConfig& cfg,
                                              const std::vector<EventKind>& events) {
  constexpr std::size_t N = 13;
  auto rhs = [&](double /*tau*/, const Vec<N>& y) {
    const State s{{y[0], y[1]}, {y[2], y[3]}, 0.0};
    const Mat2 w{y[5], y[6], y[7], y[8]};
    const Mat2 wd{y[9], y[10], y[11], y[12]};
    const VariationalDerivative d = rhs_with_variational(field, s, w, wd);
    return Vec<N>{-d.state.xdot.x, -d.state.xdot.y, -d.state.xddot.x, -d.state.xddot.y, field.eval(s.x),
                  -d.w_dot.a, -d.w_dot.b, -d.w_dot.c, -d.w_dot.d,
                  -d.w_ddot.a, -d.w_ddot.b, -d.w_ddot.c, -d.w_ddot.d};
  };
  const Vec<N> y0{s0.x.x, s0.x.y, s0.xdot.x, s0.xdot.y, 0.0, 0.0, 0.0, 0.0, 0.0, V0.a, V0.b, V0.c, V0.d};
  Vec<N> y_final{};
  VariationalRun out;
  out.trajectory = run_backward<N>(field, s0, T, cfg, events, y0, rhs, y_final);
  out.position_jacobian = {y_final[5], y_final[6], y_final[7], y_final[8]};
  out.velocity_jacobian = {y_final[9], y_final[10], y_final[11], y_final[12]};
  return out;
}

}  // namespace dlambert
