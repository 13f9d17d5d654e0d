#include "dlambert/oracle.hpp"

#include <cmath>
#include <limits>

#include "dlambert/errors.hpp"

namespace dlambert {

KeplerElements kepler_elements(const Vec2& x, const Vec2& v) {
  const double r = norm(x);
  if (!(r > 0.0)) throw DomainError("kepler_elements at the origin");
  KeplerElements k;
  k.h_energy = 0.5 * norm2(v) - 1.0 / r;
  k.c_momentum = cross(x, v);
  const double scale = 1.0 / r;
  if (std::abs(k.c_momentum) <= 1e-14 * r * std::max(norm(v), 1e-300)) {
    k.conic = ConicClass::kRectilinear;
  } else if (std::abs(k.h_energy) <= 1e-14 * scale) {
    k.conic = ConicClass::kParabolic;
  } else {
    k.conic = k.h_energy < 0.0 ? ConicClass::kElliptic : ConicClass::kHyperbolic;
  }
  return k;
}

double stumpff_c(double z) {
  if (std::abs(z) < 1e-3) {
    return 0.5 - z / 24.0 + z * z / 720.0 - z * z * z / 40320.0 + z * z * z * z / 3628800.0;
  }
  if (z > 0.0) {
    const double h = std::sin(0.5 * std::sqrt(z));
    return 2.0 * h * h / z;
  }
  return (std::cosh(std::sqrt(-z)) - 1.0) / (-z);
}

double stumpff_s(double z) {
  if (std::abs(z) < 1e-3) {
    return 1.0 / 6.0 - z / 120.0 + z * z / 5040.0 - z * z * z / 362880.0 + z * z * z * z / 39916800.0;
  }
  if (z > 0.0) {
    const double s = std::sqrt(z);
    return (s - std::sin(s)) / (s * s * s);
  }
  const double s = std::sqrt(-z);
  return (std::sinh(s) - s) / (s * s * s);
}

PhaseState propagate_universal(const Vec2& x0, const Vec2& v0, double dt) {
  const double r0 = norm(x0);
  if (!(r0 > 0.0)) throw DomainError("propagate_universal from the origin");
  if (dt == 0.0) return {x0, v0};
  const double vr0 = dot(x0, v0) / r0;
  const double alpha = 2.0 / r0 - norm2(v0);

  // Universal Kepler equation F(chi) = 0; F' = r(chi) > 0, so F is increasing.
  auto F = [&](double chi, double& dF) {
    const double z = alpha * chi * chi;
    const double C = stumpff_c(z), S = stumpff_s(z);
    dF = r0 * vr0 * chi * (1.0 - z * S) + (1.0 - alpha * r0) * chi * chi * C + r0;
    return r0 * vr0 * chi * chi * C + (1.0 - alpha * r0) * chi * chi * chi * S + r0 * chi - dt;
  };

  double chi = dt / r0;
  if (alpha > 0.0) {
    chi = alpha * dt;
  } else if (alpha < 0.0) {
    // Hyperbolic starting guess (Vallado).
    const double a = 1.0 / alpha;
    const double sgn = dt > 0.0 ? 1.0 : -1.0;
    const double arg_log = -2.0 * alpha * dt / (dot(x0, v0) + sgn * std::sqrt(-a) * (1.0 - r0 * alpha));
    if (arg_log > 0.0 && std::isfinite(arg_log)) chi = sgn * std::sqrt(-a) * std::log(arg_log);
  }
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  double prev_abs_f = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    double dF = 0.0;
    const double f = F(chi, dF);
    if (f == 0.0) {
      converged = true;
      break;
    }
    if (f > 0.0) hi = std::min(hi, chi);
    if (f < 0.0) lo = std::max(lo, chi);
    double next = chi - f / dF;
    const bool bracketed = std::isfinite(lo) && std::isfinite(hi);
    // Newton inside the bracket while it keeps halving |F|; bisection otherwise.
    if (!(next > lo && next < hi) || !std::isfinite(next) || (bracketed && std::abs(f) > 0.5 * prev_abs_f)) {
      next = bracketed             ? 0.5 * (lo + hi)
             : std::isfinite(lo)   ? lo + 2.0 * (std::abs(lo) + 1.0)
             : std::isfinite(hi)   ? hi - 2.0 * (std::abs(hi) + 1.0)
                                   : next;
    }
    prev_abs_f = std::abs(f);
    const double step = std::abs(next - chi);
    chi = next;
    if (step <= 1e-13 * std::max(1.0, std::abs(chi))) {
      converged = true;
      break;
    }
  }
  if (!converged) throw SolverError("universal Kepler equation did not converge in 50 iterations");

  const double z = alpha * chi * chi;
  const double C = stumpff_c(z), S = stumpff_s(z);
  const double f = 1.0 - chi * chi / r0 * C;
  const double g = dt - chi * chi * chi * S;
  const Vec2 x = f * x0 + g * v0;
  const double r = norm(x);
  const double fdot = chi / (r * r0) * (z * S - 1.0);
  const double gdot = 1.0 - chi * chi / r * C;
  return {x, fdot * x0 + gdot * v0};
}

namespace {

// Counterclockwise transfer; dtheta in (0, 2 pi).
Vec2 lambert_ccw(const Vec2& A, const Vec2& B, double T, double dtheta) {
  const double r1 = norm(A), r2 = norm(B);
  const double a_par = std::sin(dtheta) * std::sqrt(r1 * r2 / (1.0 - std::cos(dtheta)));
  auto y_of = [&](double z) { return r1 + r2 + a_par * (z * stumpff_s(z) - 1.0) / std::sqrt(stumpff_c(z)); };
  // Time-of-flight mismatch; increasing in z where y > 0.
  auto F = [&](double z) {
    const double y = y_of(z);
    if (y < 0.0) return -std::numeric_limits<double>::infinity();
    const double C = stumpff_c(z), S = stumpff_s(z);
    return std::pow(y / C, 1.5) * S + a_par * std::sqrt(y) - T;
  };
  auto dF = [&](double z) {
    const double y = y_of(z);
    const double C = stumpff_c(z), S = stumpff_s(z);
    if (std::abs(z) < 1e-8) {
      return std::sqrt(2.0) / 40.0 * std::pow(y, 1.5) + a_par / 8.0 * (std::sqrt(y) + a_par * std::sqrt(0.5 / y));
    }
    return std::pow(y / C, 1.5) * (0.5 / z * (C - 1.5 * S / C) + 0.75 * S * S / C) +
           a_par / 8.0 * (3.0 * S / C * std::sqrt(y) + a_par * std::sqrt(C / y));
  };

  const double z_max = 4.0 * kPi * kPi;
  double hi = z_max * (1.0 - 1e-10);
  double lo = -1.0;
  for (int k = 0; k < 200 && F(lo) >= 0.0; ++k) lo *= 2.0;
  if (F(lo) >= 0.0 || F(hi) <= 0.0) throw SolverError("lambert_universal: time of flight not bracketed");

  while (hi - lo > 1e-4 * (1.0 + std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) < 0.0 ? lo : hi) = mid;
  }
  double z = 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const double f = F(z);
    if (f < 0.0) lo = z;
    if (f > 0.0) hi = z;
    double next = z - f / dF(z);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - z);
    z = next;
    if (step <= 1e-14 * (1.0 + std::abs(z)) || hi - lo <= 1e-15 * (1.0 + std::abs(z))) {
      converged = true;
      break;
    }
  }
  if (!converged) throw SolverError("lambert_universal did not converge");

  const double y = y_of(z);
  const double g = a_par * std::sqrt(y);
  const double gdot = 1.0 - y / r2;
  return (1.0 / g) * (gdot * B - A);
}

Vec2 mirror(const Vec2& v) { return {v.x, -v.y}; }

}  // namespace

Vec2 lambert_universal(const Vec2& A, const Vec2& B, double T, Rotation direction) {
  if (!(T > 0.0)) throw DomainError("T must be positive");
  if (!(norm(A) > 0.0) || !(norm(B) > 0.0)) throw DomainError("endpoints must differ from the origin");
  if (direction == Rotation::kCW) return mirror(lambert_universal(mirror(A), mirror(B), T, Rotation::kCCW));

  double dtheta = std::atan2(cross(A, B), dot(A, B));
  if (dtheta < 0.0) dtheta += kTwoPi;
  if (dtheta < 1e-10 || dtheta > kTwoPi - 1e-10) throw DomainError("endpoints on a common ray");
  if (std::abs(std::sin(dtheta)) > 1e-4) return lambert_ccw(A, B, T, dtheta);

  // Nearly antipodal: the Lagrange-coefficient formula degenerates. Solve a
  // slightly rotated problem and correct by Newton on the propagated endpoint.
  const double tilt = dtheta < kPi ? -1e-3 : 1e-3;
  Vec2 v = rotate(lambert_ccw(A, rotate(B, tilt), T, dtheta + tilt), -tilt);
  for (int it = 0; it < 50; ++it) {
    const Vec2 miss = propagate_universal(B, v, -T).x - A;
    if (norm(miss) <= 1e-13 * (1.0 + norm(A))) return v;
    const double h = 1e-7 * (1.0 + norm(v));
    const Vec2 c0 = (propagate_universal(B, v + Vec2{h, 0}, -T).x - propagate_universal(B, v - Vec2{h, 0}, -T).x) / (2 * h);
    const Vec2 c1 = (propagate_universal(B, v + Vec2{0, h}, -T).x - propagate_universal(B, v - Vec2{0, h}, -T).x) / (2 * h);
    Vec2 dv;
    if (!solve2(Mat2::from_columns(c0, c1), -1.0 * miss, dv)) break;
    v = v + dv;
  }
  const Vec2 miss = propagate_universal(B, v, -T).x - A;
  if (norm(miss) > 1e-9 * (1.0 + norm(A))) throw SolverError("lambert_universal did not converge near the antipodal case");
  return v;
}

}  // namespace dlambert
