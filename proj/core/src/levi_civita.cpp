#include "dlambert/levi_civita.hpp"

#include <cmath>
#include <utility>

namespace dlambert {

LCState1D goursat_1d(double r, double rdot, double h) {
  if (!(r > 0.0)) throw DomainError("goursat_1d requires r > 0");
  const double u = std::sqrt(r);
  return {u, 0.5 * u * rdot, h, 0.0, 0.0, 0.0};
}

LCStatePlanar goursat_planar(const Vec2& x, const Vec2& xdot, int w0_choice) {
  if (x.x == 0.0 && x.y == 0.0) throw DomainError("goursat_planar requires x != 0");
  const int branch = w0_choice < 0 ? -1 : 1;
  const Vec2 w = static_cast<double>(branch) * csqrt(x);
  const double r = norm(x);
  LCStatePlanar lc;
  lc.w = w;
  lc.w_prime = cdiv(r * xdot, 2.0 * w);
  lc.E = 0.5 * norm2(xdot) - 1.0 / r;
  lc.branch = branch;
  return lc;
}

State lc_to_physical(const LCStatePlanar& lc) {
  const Vec2 x = csquare(lc.w);
  const double m = norm2(lc.w);
  if (m == 0.0) throw VelocityUndefined(x);
  return {x, (2.0 / m) * cmul(lc.w, lc.w_prime), lc.t_accum};
}

namespace {

double friction_at(const FrictionField& field, const Vec2& x) {
  if (x.x == 0.0 && x.y == 0.0) return field.limit_at_origin();
  return field.eval(x);
}

void check_start(const FrictionField& field, double residual) {
  if (field.d2_flagged()) {
    throw RegularizationRefused("friction gradient does not vanish fast enough near the origin; "
                                "refusing to regularize");
  }
  if (!(std::abs(residual) <= 1e-8)) throw DomainError("initial state is off the invariant manifold");
}

struct RunBookkeeping {
  double max_residual = 0.0;
  int projections = 0;
  int drift_warnings = 0;
};

// Shared driver. Index layout: [.., t_idx] = t, [.., t_idx + 1] = q; `zero_idx`
// (if >= 0) is the component whose sign change is a collision.
template <std::size_t N, class Rhs, class Residual, class Project, class Guard>
RunResult<N> drive(Rhs&& rhs, const Vec<N>& y0, double T, const IntegratorConfig& cfg, const LCOptions& opts,
                   std::size_t t_idx, int zero_idx, Residual&& residual, Project&& project, Guard&& guard,
                   std::vector<DenseSegment<N>>& segments, LCStop& stop, RunBookkeeping& book) {
  cfg.validate();
  auto on_step = [&](const DenseSegment<N>& seg) -> StepVerdict {
    if (!guard(seg)) return StepVerdict::kReject;
    DenseSegment<N> cut = seg;
    std::optional<LCStop> hit_kind;
    auto time_g = [&](double, const Vec<N>& y) { return y[t_idx] + T; };
    if (auto hit = find_crossing(seg, time_g)) {
      cut.t_stop = *hit;
      hit_kind = LCStop::kReachedTime;
    }
    if (zero_idx >= 0) {
      const double sign0 = y0[static_cast<std::size_t>(zero_idx)] < 0.0 ? -1.0 : 1.0;
      auto zero_g = [&](double, const Vec<N>& y) { return sign0 * y[static_cast<std::size_t>(zero_idx)]; };
      if (auto hit = find_crossing(cut, zero_g)) {
        cut.t_stop = *hit;
        hit_kind = LCStop::kCollision;
      }
    }
    segments.push_back(cut);
    if (hit_kind) {
      stop = *hit_kind;
      return StepVerdict::kStop;
    }
    return StepVerdict::kAccept;
  };
  auto on_project = [&](double, Vec<N>& y) {
    const double res = std::abs(residual(y));
    book.max_residual = std::max(book.max_residual, res);
    if (res > 1e-6) ++book.drift_warnings;
    if (res > 1e-10 && project(y)) {
      ++book.projections;
      return true;
    }
    return false;
  };
  const RunResult<N> r = dopri5<N>(rhs, 0.0, y0, opts.s_cap, cfg, on_step, on_project);
  switch (r.status) {
    case RunStatus::kStopped:
      break;
    case RunStatus::kCompleted:
      stop = LCStop::kSCap;
      break;
    case RunStatus::kStepFailure:
      stop = LCStop::kStepFailure;
      break;
    case RunStatus::kMaxSteps:
      throw SolverError("regularized integration exhausted max_steps");
  }
  return r;
}

// Scale factor for the velocity-like component that restores the manifold
// identity; when the velocity vanishes, E is adjusted instead (factor 1).
std::optional<double> manifold_scale(double w2, double& E, double v2) {
  const double target = 0.5 * (1.0 + E * w2);
  if (target > 0.0 && v2 > 0.0) return std::sqrt(target / v2);
  if (w2 > 0.0) {
    E = (2.0 * v2 - 1.0) / w2;
    return 1.0;
  }
  return std::nullopt;
}

}  // namespace

LCStatePlanar project_to_manifold(LCStatePlanar lc) {
  const double v2 = norm2(lc.w_prime);
  const double target = 0.5 * (1.0 + lc.E * norm2(lc.w));
  if (target > 0.0 && v2 > 0.0) lc.w_prime = std::sqrt(target / v2) * lc.w_prime;
  return lc;
}

LCState1D project_to_manifold(LCState1D lc) {
  const double v2 = lc.u_prime * lc.u_prime;
  const double target = 0.5 * (1.0 + lc.E * lc.u * lc.u);
  if (target > 0.0 && v2 > 0.0) lc.u_prime *= std::sqrt(target / v2);
  return lc;
}

LC1DRun integrate_lc_1d_backward(const FrictionField& field, const Vec2& direction, const LCState1D& lc0,
                                 double T, const IntegratorConfig& cfg, const LCOptions& opts) {
  if (!(T > 0.0)) throw DomainError("flight time must be positive");
  check_start(field, lc0.residual());
  const double dn = norm(direction);
  if (!(dn > 0.0)) throw DomainError("direction must be nonzero");
  const Vec2 e = direction / dn;

  LC1DRun run;
  run.nodes.push_back(lc0);
  if (lc0.t_accum <= -T) {
    run.final = lc0;
    return run;
  }
  constexpr std::size_t N = 5;
  auto rhs = [&](double, const Vec<N>& y) {
    const double u = y[0], up = y[1], E = y[2];
    const double d = friction_at(field, (u * u) * e);
    return Vec<N>{-up, -(0.5 * E * u - d * u * u * up), 4.0 * d * up * up, -u * u, d * u * u};
  };
  auto residual = [](const Vec<N>& y) { return 2.0 * y[1] * y[1] - y[2] * y[0] * y[0] - 1.0; };
  auto project = [](Vec<N>& y) {
    const auto scale = manifold_scale(y[0] * y[0], y[2], y[1] * y[1]);
    if (!scale) return false;
    y[1] *= *scale;
    return true;
  };
  auto no_guard = [](const DenseSegment<N>&) { return true; };
  const Vec<N> y0{lc0.u, lc0.u_prime, lc0.E, lc0.t_accum, lc0.q};
  RunBookkeeping book;
  drive<N>(rhs, y0, T, cfg, opts, 3, opts.stop_at_collision ? 0 : -1, residual, project, no_guard, run.segments,
           run.stop, book);
  auto to_state = [&](double sigma, const Vec<N>& y) {
    return LCState1D{y[0], y[1], y[2], lc0.s - sigma, y[3], y[4]};
  };
  for (const auto& seg : run.segments) run.nodes.push_back(to_state(seg.t_end(), seg.eval(seg.t_end())));
  run.final = run.nodes.back();
  if (run.stop == LCStop::kReachedTime) run.final.t_accum = -T;
  run.max_residual = book.max_residual;
  run.projections = book.projections;
  run.drift_warnings = book.drift_warnings;
  return run;
}

LCPlanarRun integrate_lc_planar_backward(const FrictionField& field, const LCStatePlanar& lc0, double T,
                                         const IntegratorConfig& cfg, const LCOptions& opts) {
  if (!(T > 0.0)) throw DomainError("flight time must be positive");
  check_start(field, lc0.residual());

  LCPlanarRun run;
  run.nodes.push_back(lc0);
  if (lc0.t_accum <= -T) {
    run.final = lc0;
    return run;
  }
  constexpr std::size_t N = 7;
  auto rhs = [&](double, const Vec<N>& y) {
    const Vec2 w{y[0], y[1]}, wp{y[2], y[3]};
    const double E = y[4];
    const double m = norm2(w);
    const double d = friction_at(field, csquare(w));
    const Vec2 wpp = (0.5 * E) * w - (d * m) * wp;
    return Vec<N>{-wp.x, -wp.y, -wpp.x, -wpp.y, 4.0 * d * norm2(wp), -m, d * m};
  };
  auto residual = [](const Vec<N>& y) {
    return 2.0 * (y[2] * y[2] + y[3] * y[3]) - y[4] * (y[0] * y[0] + y[1] * y[1]) - 1.0;
  };
  auto project = [](Vec<N>& y) {
    const auto scale = manifold_scale(y[0] * y[0] + y[1] * y[1], y[4], y[2] * y[2] + y[3] * y[3]);
    if (!scale) return false;
    y[2] *= *scale;
    y[3] *= *scale;
    return true;
  };

  double arg_lift = arg(lc0.w);
  const double arg_start = arg_lift;
  auto guard = [&](const DenseSegment<N>& seg) {
    if (!opts.guard_angle) return true;
    double lifted = arg_lift;
    for (int k = 1; k <= 4; ++k) {
      const Vec<N> y = seg.eval(seg.t0 + (seg.t_end() - seg.t0) * k / 4.0);
      if (y[0] == 0.0 && y[1] == 0.0) return false;
      const double next = lift_angle(lifted, std::atan2(y[1], y[0]));
      if (std::abs(next - lifted) > kPi / 16.0) return false;
      lifted = next;
    }
    arg_lift = lifted;
    return true;
  };

  const Vec<N> y0{lc0.w.x, lc0.w.y, lc0.w_prime.x, lc0.w_prime.y, lc0.E, lc0.t_accum, lc0.q};
  RunBookkeeping book;
  drive<N>(rhs, y0, T, cfg, opts, 5, -1, residual, project, guard, run.segments, run.stop, book);
  auto to_state = [&](double sigma, const Vec<N>& y) {
    LCStatePlanar s;
    s.w = {y[0], y[1]};
    s.w_prime = {y[2], y[3]};
    s.E = y[4];
    s.s = lc0.s - sigma;
    s.t_accum = y[5];
    s.q = y[6];
    s.branch = lc0.branch;
    return s;
  };
  for (const auto& seg : run.segments) run.nodes.push_back(to_state(seg.t_end(), seg.eval(seg.t_end())));
  run.final = run.nodes.back();
  if (run.stop == LCStop::kReachedTime) run.final.t_accum = -T;
  if (opts.guard_angle) {
    // The guard lifted through the last full step; the cut end may sit earlier.
    run.arg_w_change = lift_angle(arg_lift, arg(run.final.w)) - arg_start;
  }
  run.max_residual = book.max_residual;
  run.projections = book.projections;
  run.drift_warnings = book.drift_warnings;
  return run;
}

namespace {

// Segments are ordered by sigma and t decreases along them.
template <std::size_t N>
std::pair<double, Vec<N>> locate_time(const std::vector<DenseSegment<N>>& segments, std::size_t t_idx,
                                      double t) {
  for (const auto& seg : segments) {
    const double t_lo = seg.eval(seg.t_end())[t_idx];
    if (t_lo > t) continue;
    auto g = [&](double, const Vec<N>& y) { return y[t_idx] - t; };
    const double sigma = find_crossing(seg, g).value_or(seg.t_end());
    return {sigma, seg.eval(sigma)};
  }
  throw DomainError("time outside the regularized run");
}

}  // namespace

LCState1D state_at_time(const LC1DRun& run, double t) {
  if (run.segments.empty() || t > run.nodes.front().t_accum) throw DomainError("time outside the regularized run");
  const auto [sigma, y] = locate_time(run.segments, 3, t);
  return {y[0], y[1], y[2], run.nodes.front().s - sigma, t, y[4]};
}

LCStatePlanar state_at_time(const LCPlanarRun& run, double t) {
  if (run.segments.empty() || t > run.nodes.front().t_accum) throw DomainError("time outside the regularized run");
  const auto [sigma, y] = locate_time(run.segments, 5, t);
  LCStatePlanar s;
  s.w = {y[0], y[1]};
  s.w_prime = {y[2], y[3]};
  s.E = y[4];
  s.s = run.nodes.front().s - sigma;
  s.t_accum = t;
  s.q = y[6];
  s.branch = run.nodes.front().branch;
  return s;
}

Vec2 extended_position_map(const FrictionField& field, const Vec2& x0, const Vec2& v0, double T,
                           const IntegratorConfig& cfg, int w0_choice) {
  const LCStatePlanar lc0 = goursat_planar(x0, v0, w0_choice);
  const LCPlanarRun run = integrate_lc_planar_backward(field, lc0, T, cfg);
  if (run.stop != LCStop::kReachedTime) throw SolverError("regularized integration did not reach -T");
  return csquare(run.final.w);
}

}  // namespace dlambert
