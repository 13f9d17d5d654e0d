#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlambert/dynamics.hpp"
#include "dlambert/friction.hpp"
#include "dlambert/ode.hpp"

namespace dlambert {

// Regularized variables: r = u^2 (1-D) or x = w^2 (planar, complex square),
// fictitious time ds = dt / r, E the energy. On the invariant manifold
// 2 u'^2 - E u^2 = 1 (resp. 2 |w'|^2 - E |w|^2 = 1).

struct LCState1D {
  double u = 0.0;
  double u_prime = 0.0;
  double E = 0.0;
  double s = 0.0;
  double t_accum = 0.0;
  double q = 0.0;  // int D dt accumulated from t = 0

  double residual() const { return 2.0 * u_prime * u_prime - E * u * u - 1.0; }
};

struct LCStatePlanar {
  Vec2 w;
  Vec2 w_prime;
  double E = 0.0;
  double s = 0.0;
  double t_accum = 0.0;
  double q = 0.0;
  int branch = 1;  // +1 or -1: which square root of x(0) was taken

  double residual() const { return 2.0 * norm2(w_prime) - E * norm2(w) - 1.0; }
};

/// Thrown by lc_to_physical at w = 0; the position (the origin) is still known.
class VelocityUndefined : public DomainError {
 public:
  explicit VelocityUndefined(Vec2 position)
      : DomainError("velocity undefined at w = 0"), position_(position) {}
  Vec2 position() const { return position_; }

 private:
  Vec2 position_;
};

/// The field fails the small-radius gradient check; regularizing through the
/// origin is not supported for it.
class RegularizationRefused : public SolverError {
 public:
  using SolverError::SolverError;
};

LCState1D goursat_1d(double r, double rdot, double h);
LCStatePlanar goursat_planar(const Vec2& x, const Vec2& xdot, int w0_choice = 1);
State lc_to_physical(const LCStatePlanar& lc);

/// Same state with w' (or u') rescaled so the manifold residual vanishes; the
/// physical energy of the result then equals E up to roundoff. Unchanged if
/// the rescaling is undefined.
LCStatePlanar project_to_manifold(LCStatePlanar lc);
LCState1D project_to_manifold(LCState1D lc);

struct LCOptions {
  /// Upper bound on |s| before giving up on reaching the requested time.
  double s_cap = 1e7;
  /// Reject steps over which arg(w) moves by more than pi/16 per quarter step,
  /// so that 2 arg(w) can be lifted continuously. Only meaningful away from
  /// w = 0, i.e. for non-collinear motion.
  bool guard_angle = false;
  /// 1-D runs only: stop when u crosses zero (collision).
  bool stop_at_collision = false;
};

enum class LCStop { kReachedTime, kCollision, kStepFailure, kSCap };

struct LC1DRun {
  LCState1D final;
  LCStop stop = LCStop::kReachedTime;
  std::vector<DenseSegment<5>> segments;  // sigma = -s; (u, u', E, t, q)
  std::vector<LCState1D> nodes;
  double max_residual = 0.0;
  int projections = 0;
  int drift_warnings = 0;  // times the residual exceeded 1e-6 before projection
};

struct LCPlanarRun {
  LCStatePlanar final;
  LCStop stop = LCStop::kReachedTime;
  std::vector<DenseSegment<7>> segments;  // sigma = -s; (w1, w2, w1', w2', E, t, q)
  std::vector<LCStatePlanar> nodes;
  double max_residual = 0.0;
  int projections = 0;
  int drift_warnings = 0;
  double arg_w_change = 0.0;  // lifted change of arg(w) along the run (guarded runs)
};

/// Integrates (LC) backward in s for the radial profile delta(r) = D(r e),
/// starting at lc0 and stopping where t_accum reaches -T.
LC1DRun integrate_lc_1d_backward(const FrictionField& field, const Vec2& direction, const LCState1D& lc0,
                                 double T, const IntegratorConfig& cfg = {}, const LCOptions& opts = {});

/// Integrates the planar regularized system backward in s from lc0 until
/// t_accum reaches -T (absolute physical time; lc0.t_accum may already be
/// negative after a handoff).
LCPlanarRun integrate_lc_planar_backward(const FrictionField& field, const LCStatePlanar& lc0, double T,
                                         const IntegratorConfig& cfg = {}, const LCOptions& opts = {});

/// Regularized state at physical time t inside the span of a run.
LCState1D state_at_time(const LC1DRun& run, double t);
LCStatePlanar state_at_time(const LCPlanarRun& run, double t);

/// Position at t = -T of the backward solution from (x0, v0), continued
/// through collisions by bouncing; always computed in regularized variables.
Vec2 extended_position_map(const FrictionField& field, const Vec2& x0, const Vec2& v0, double T,
                           const IntegratorConfig& cfg = {}, int w0_choice = 1);

}  // namespace dlambert
