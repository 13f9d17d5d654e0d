#pragma once

#include <limits>
#include <optional>

#include "dlambert/friction.hpp"
#include "dlambert/integrator.hpp"

namespace dlambert {

/// Radial motion r'' + delta(r) r' = -1/r^2 along a fixed ray, with
/// delta(r) = D(r e) for the unit vector e along `direction`.
struct RadialProblem {
  FrictionField field = FrictionField::zero();
  Vec2 direction{1.0, 0.0};
  double r_A = 1.0;
  double r_B = 1.0;
  double T = 1.0;

  void validate() const;
  Vec2 unit() const { return direction / norm(direction); }
};

struct RadialOutcome {
  bool reached = false;
  double r_at_minus_T = 0.0;  // valid when reached
  double dR_dv = 0.0;         // valid when reached; NaN if it could not be formed
  double t_collision = 0.0;   // valid when !reached
  bool regularized = false;   // the run went below r_collision
};

/// The map v -> r(-T) for the backward solution with r(0) = r_B, r'(0) = v.
RadialOutcome radial_flow(const RadialProblem& problem, double v, const IntegratorConfig& cfg = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Bracket of the supremum beta of final speeds that survive to -T:
/// radial_flow(lo) reaches -T and radial_flow(hi) collides.
Interval find_beta(const RadialProblem& problem, double tol, const IntegratorConfig& cfg = {});

struct RadialSolution {
  double v_final = 0.0;
  Trajectory trajectory;
  double residual = 0.0;  // |r(-T) - r_A|
  double dR_dv = 0.0;
  bool nondegenerate = false;  // dR_dv < 0
  /// lo reaches -T, hi is the smallest speed seen to collide (infinite if none).
  Interval beta_bracket{0.0, std::numeric_limits<double>::infinity()};
  int iterations = 0;
};

/// Unique final speed with r(-T) = r_A: bisection down to a bracket of width
/// 1e-3 (1 + |v|), then Newton kept inside the bracket. `bracket`, if given,
/// must satisfy r(-T) > r_A at lo and r(-T) < r_A (or collision) at hi.
RadialSolution solve_rectilinear(const RadialProblem& problem, double tol = 1e-12,
                                 const IntegratorConfig& cfg = {}, std::optional<Interval> bracket = std::nullopt);

}  // namespace dlambert
