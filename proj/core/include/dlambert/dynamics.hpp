#pragma once

#include "dlambert/errors.hpp"
#include "dlambert/friction.hpp"
#include "dlambert/vec2.hpp"

namespace dlambert {

/// Cartesian phase point of the damped Kepler system. Time runs over
/// [-T, 0] by convention.
struct State {
  Vec2 x;
  Vec2 xdot;
  double t = 0.0;
};

struct StateDerivative {
  Vec2 xdot;
  Vec2 xddot;
};

/// Scalar functionals along a trajectory.
struct Diagnostics {
  double r = 0.0;
  double rdot = 0.0;
  double theta = 0.0;  // lifted argument, continuous along the trajectory
  double c = 0.0;      // det(x, xdot)
  double v_pot = 0.0;  // -1/r + c^2 / (2 r^2)
  double h = 0.0;      // |xdot|^2/2 - 1/r
  double h_polar = 0.0;  // rdot^2/2 + v_pot
  double p = 1.0;      // exp(-int_t^0 D(x(s)) ds)
};

/// Raised when consecutive samples differ in argument by more than pi/2; the
/// integrator treats it as a step rejection.
class AngleStepTooLarge : public SolverError {
 public:
  using SolverError::SolverError;
};

inline constexpr double kMaxAngleStep = kPi / 2.0;

/// (xdot, xddot) with xddot = -D(x) xdot - x/|x|^3.
StateDerivative rhs_cartesian(const FrictionField& field, const State& s);

/// Columns of `w` / `wdot` are position / velocity variations.
struct VariationalDerivative {
  StateDerivative state;
  Mat2 w_dot;
  Mat2 w_ddot;
};

/// Flow plus its linearization: each variation column evolves by
///   w'' = -<grad D(x), w> xdot - D(x) w' - w/|x|^3 + 3 <x, w> x / |x|^5.
VariationalDerivative rhs_with_variational(const FrictionField& field, const State& s,
                                           const Mat2& w, const Mat2& wdot);

/// Lift of `raw_angle` (any branch) closest to `theta_prev`.
double lift_angle(double theta_prev, double raw_angle);

/// All diagnostic functionals at `s`. The argument is lifted next to
/// `theta_prev`; throws AngleStepTooLarge if it moved by more than pi/2.
Diagnostics diagnostics(const FrictionField& field, const State& s, double theta_prev,
                        double p = 1.0);

}  // namespace dlambert
