#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlambert/friction.hpp"
#include "dlambert/integrator.hpp"
#include "dlambert/levi_civita.hpp"

namespace dlambert {

enum class Direction { kCW, kCCW, kAuto };
enum class ArcKind { kRectilinear, kCW, kCCW };

const char* to_string(Direction d);
const char* to_string(ArcKind k);
Direction direction_from_string(const std::string& s);

struct LambertProblem {
  Vec2 A{1.0, 0.0};
  Vec2 B{0.0, 1.0};
  double T = 1.0;
  FrictionField field = FrictionField::zero();
  Direction direction = Direction::kAuto;

  void validate() const;
};

struct SolverOptions {
  IntegratorConfig integrator;
  double corrector_tol = 1e-10;  // on (r - r_A, r_A (theta - target))
  double dlambda_init = 0.1;
  double dlambda_min = 1e-6;
  double dlambda_max = 0.25;
  int max_newton = 12;
  double guard_multiple = 1e3;
  double same_ray_tol = 1e-12;   // radians
  double near_ray_tol = 1e-6;    // radians
  double verify_factor = 100.0;  // tolerance tightening for the verification run
  double verify_tol = 1e-7;      // relative to 1 + |A|
};

/// Backward solution from B hits the origin before -T.
class CollisionBeforeT : public SolverError {
 public:
  CollisionBeforeT(const std::string& what, double t_col) : SolverError(what), t_col_(t_col) {}
  double t_collision() const { return t_col_; }

 private:
  double t_col_;
};

/// The trial solution sweeps a full turn or more before -T.
class SweepExceeded : public SolverError {
 public:
  using SolverError::SolverError;
};

struct ShootResult {
  double r_minus_T = 0.0;
  double theta_minus_T = 0.0;  // lift anchored at theta(0) = arg(B)
  Mat2 jacobian;               // d(r, theta)(-T) / d v0
  double swept = 0.0;          // theta(0) - theta(-T)
  Vec2 x_minus_T;
  /// Cartesian part with dense output. When the run went below r_collision
  /// the rest was done in regularized variables: `samples` and `terminal`
  /// still cover the whole interval, but `segments` stop at the handoff.
  Trajectory trajectory;
  bool regularized = false;
};

/// Psi: integrates backward from (B, v0) over [-T, 0]. Throws
/// CollisionBeforeT, SweepExceeded or SolverError (step failure).
ShootResult shoot(const LambertProblem& problem, const Vec2& v0, const IntegratorConfig& cfg = {},
                  bool want_jacobian = true);

struct ContinuationNode {
  double lambda = 0.0;
  Vec2 v0;
  double residual = 0.0;
  double step = 0.0;
  int newton_iterations = 0;
};

using ContinuationTrace = std::vector<ContinuationNode>;

class ContinuationStalled : public SolverError {
 public:
  ContinuationStalled(const std::string& what, ContinuationTrace trace)
      : SolverError(what), trace_(std::move(trace)) {}
  const ContinuationTrace& trace() const { return trace_; }

 private:
  ContinuationTrace trace_;
};

struct ArcSolution {
  Vec2 v0;
  Trajectory trajectory;  // from the verification run once verified
  ArcKind kind = ArcKind::kCCW;
  double residual_position = 0.0;  // |x(-T) - A|
  double swept = 0.0;
  int sign_c = 0;
  ContinuationTrace trace;
  bool near_ray = false;
  bool verified = false;
  double verification_residual = 0.0;
  int newton_total = 0;
};

/// Final speed of the rectilinear arc from (r_A / r_B) B to B.
Vec2 seed_from_rectilinear(const LambertProblem& problem, const IntegratorConfig& cfg = {});

/// Target argument at -T for the chosen sense of rotation: theta_B minus a
/// sweep in (0, 2 pi) (CCW) or (-2 pi, 0) (CW).
double target_theta(const LambertProblem& problem, ArcKind kind);

/// Follows the zero set of Psi(v0) - (r_A, (1 - lambda) theta_B + lambda theta_A)
/// from lambda = 0 (rectilinear seed) to lambda = 1.
ArcSolution continue_to_target(const LambertProblem& problem, const Vec2& v0_seed, ArcKind kind,
                               const SolverOptions& opts = {});

/// Newton on the full problem (lambda = 1) from a nearby guess, e.g. the
/// solution at a neighbouring parameter value. Throws ContinuationStalled.
ArcSolution refine_arc(const LambertProblem& problem, const Vec2& v0_guess, ArcKind kind,
                       const SolverOptions& opts = {});

struct ArcFailure {
  ArcKind kind = ArcKind::kCCW;
  std::string message;
  ContinuationTrace trace;
};

struct SolveReport {
  std::vector<ArcSolution> arcs;
  std::vector<ArcFailure> failures;
  bool same_ray = false;
  bool near_ray = false;
  bool all_converged() const { return failures.empty() && !arcs.empty(); }
};

/// Optional starting guesses per direction; a failed warm start falls back to
/// continuation from the rectilinear seed.
struct WarmStart {
  std::optional<Vec2> ccw;
  std::optional<Vec2> cw;
};

/// All requested arcs, each verified by re-integration at tightened tolerance.
SolveReport solve(const LambertProblem& problem, const SolverOptions& opts = {}, const WarmStart& warm = {});

/// Runtime bound on |v0| for corrector iterates.
double speed_ceiling(const LambertProblem& problem, double multiple = 1e3);

}  // namespace dlambert
