#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlambert/dynamics.hpp"
#include "dlambert/friction.hpp"
#include "dlambert/ode.hpp"

namespace dlambert {

enum class EventType { kRadiusBelow, kRdotZero, kRadiusEquals, kAngleSweepExceeds };

struct EventKind {
  EventType type = EventType::kRdotZero;
  double value = 0.0;

  static EventKind radius_below(double r) { return {EventType::kRadiusBelow, r}; }
  static EventKind rdot_zero() { return {EventType::kRdotZero, 0.0}; }
  static EventKind radius_equals(double r) { return {EventType::kRadiusEquals, r}; }
  static EventKind angle_sweep_exceeds(double angle) { return {EventType::kAngleSweepExceeds, angle}; }
};

struct Event {
  EventKind kind;
  double t = 0.0;
  State state;
};

struct Sample {
  State state;
  Diagnostics diag;
};

enum class TerminalKind { kReachedTarget, kCollisionHandoff, kSweepExceeded, kStepFailure };

struct Terminal {
  TerminalKind kind = TerminalKind::kReachedTarget;
  double t = 0.0;
  State state;
  std::string message;
};

/// Backward solution on [t_start, 0] with dense output.
///
/// Internally segments are parameterized by tau = -t and carry
/// (x1, x2, xdot1, xdot2, q) where q(tau) = int_{-tau}^0 D(x(s)) ds, so that
/// the damping factor is p = exp(-q).
class Trajectory {
 public:
  static constexpr std::size_t kDim = 5;

  std::vector<DenseSegment<kDim>> segments;
  std::vector<Event> events;
  std::vector<Sample> samples;  // t = 0 first, then one per accepted step
  Terminal terminal;
  double d_star = 0.0;

  /// Most negative time covered.
  double t_start() const { return segments.empty() ? 0.0 : -segments.back().t_end(); }
  bool reached_target() const { return terminal.kind == TerminalKind::kReachedTarget; }

  State state_at(double t) const;
  double p_at(double t) const;
  /// Earliest (most negative time) crossing of `kind`, bisected on the dense
  /// output. Absent if the defining function never changes sign.
  std::optional<Event> locate(const EventKind& kind) const;

 private:
  const DenseSegment<kDim>& segment_for(double tau) const;
};

/// Integrates from s0 (at t = 0) down to t = -T.
///
/// Stops early with kCollisionHandoff when |x| < cfg.r_collision and with
/// kSweepExceeded if an AngleSweepExceeds event is requested and fires.
/// Other requested events are recorded in `Trajectory::events`. A step-size
/// collapse ends the run with kStepFailure; exhausting max_steps throws
/// SolverError.
Trajectory integrate_backward(const FrictionField& field, const State& s0, double T,
                              const IntegratorConfig& cfg = {}, const std::vector<EventKind>& events = {});

struct VariationalRun {
  Trajectory trajectory;
  Mat2 position_jacobian;  // d x(t_end) / d xdot(0) applied to V0
  Mat2 velocity_jacobian;  // d xdot(t_end) / d xdot(0) applied to V0
};

/// Same as integrate_backward, also carrying the variational flow with
/// initial data W(0) = 0, Wdot(0) = V0. The Jacobians refer to the final time
/// actually reached (t = -T unless the run terminated early).
VariationalRun integrate_variational_backward(const FrictionField& field, const State& s0,
                                              const Mat2& V0, double T, const IntegratorConfig& cfg,
                                              const std::vector<EventKind>& events = {});

std::optional<Event> locate_event(const Trajectory& traj, const EventKind& kind);

}  // namespace dlambert
