#pragma once

#include "dlambert/vec2.hpp"

namespace dlambert {

// Frictionless two-body reference (mu = 1) in closed form. Shares no numerical
// code with the integrator.

enum class ConicClass { kElliptic, kParabolic, kHyperbolic, kRectilinear };

struct KeplerElements {
  double h_energy = 0.0;
  double c_momentum = 0.0;
  ConicClass conic = ConicClass::kElliptic;
};

KeplerElements kepler_elements(const Vec2& x, const Vec2& v);

double stumpff_c(double z);
double stumpff_s(double z);

struct PhaseState {
  Vec2 x;
  Vec2 v;
};

/// Kepler propagation by dt (either sign) in universal variables.
PhaseState propagate_universal(const Vec2& x0, const Vec2& v0, double dt);

enum class Rotation { kCW, kCCW };

/// Velocity at B of the single-revolution frictionless arc that leaves A and
/// reaches B after time T rotating in the given sense.
Vec2 lambert_universal(const Vec2& A, const Vec2& B, double T, Rotation direction);

}  // namespace dlambert
