#include "dlambert/dynamics.hpp"

#include <cmath>

namespace dlambert {
namespace {

void require_nonzero(const Vec2& x) {
  if (x.x == 0.0 && x.y == 0.0) throw DomainError("state at the collision singularity x = 0");
}

}  // namespace

StateDerivative rhs_cartesian(const FrictionField& field, const State& s) {
  require_nonzero(s.x);
  const double r2 = norm2(s.x);
  const double r3 = r2 * std::sqrt(r2);
  const double d = field.eval(s.x);
  return {s.xdot, -d * s.xdot - s.x / r3};
}

VariationalDerivative rhs_with_variational(const FrictionField& field, const State& s,
                                           const Mat2& w, const Mat2& wdot) {
  require_nonzero(s.x);
  const double r2 = norm2(s.x);
  const double r = std::sqrt(r2);
  const double r3 = r2 * r;
  const double r5 = r3 * r2;
  const double d = field.eval(s.x);
  const Vec2 g = field.is_zero() ? Vec2{} : field.grad(s.x);

  VariationalDerivative out;
  out.state = {s.xdot, -d * s.xdot - s.x / r3};
  out.w_dot = wdot;
  Vec2 cols[2];
  for (int j = 0; j < 2; ++j) {
    const Vec2 wj = w.col(j);
    const Vec2 wdj = wdot.col(j);
    cols[j] = -dot(g, wj) * s.xdot - d * wdj - wj / r3 + (3.0 * dot(s.x, wj) / r5) * s.x;
  }
  out.w_ddot = Mat2::from_columns(cols[0], cols[1]);
  return out;
}

double lift_angle(double theta_prev, double raw_angle) {
  return theta_prev + std::remainder(raw_angle - theta_prev, kTwoPi);
}

Diagnostics diagnostics(const FrictionField& /*field*/, const State& s, double theta_prev, double p) {
  require_nonzero(s.x);
  Diagnostics d;
  d.r = norm(s.x);
  d.rdot = dot(s.x, s.xdot) / d.r;
  d.theta = lift_angle(theta_prev, arg(s.x));
  if (std::abs(d.theta - theta_prev) > kMaxAngleStep) {
    throw AngleStepTooLarge("angular increment between samples exceeds pi/2");
  }
  d.c = cross(s.x, s.xdot);
  d.v_pot = -1.0 / d.r + d.c * d.c / (2.0 * d.r * d.r);
  d.h = 0.5 * norm2(s.xdot) - 1.0 / d.r;
  d.h_polar = 0.5 * d.rdot * d.rdot + d.v_pot;
  d.p = p;
  return d;
}

}  // namespace dlambert
