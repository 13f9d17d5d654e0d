#include <cmath>
#include <random>

#include "doctest.h"
#include "dlambert/integrator.hpp"

using namespace dlambert;
using doctest::Approx;

namespace {

const double kCbrt92 = std::cbrt(4.5);  // (9/2)^(1/3)

State parabolic_seed() { return {{kCbrt92, 0.0}, {2.0 / 3.0 * kCbrt92, 0.0}}; }

Vec2 position_at(const FrictionField& f, const State& s0, Vec2 v0, double T, const IntegratorConfig& cfg) {
  State s = s0;
  s.xdot = v0;
  return integrate_backward(f, s, T, cfg).terminal.state.x;
}

}  // namespace

TEST_CASE("unit circular orbit backward a quarter turn") {
  const auto traj = integrate_backward(FrictionField::zero(), {{0, 1}, {-1, 0}}, kPi / 2, {});
  REQUIRE(traj.reached_target());
  const State end = traj.terminal.state;
  CHECK(std::abs(end.x.x - 1.0) < 1e-8);
  CHECK(std::abs(end.x.y) < 1e-8);
  CHECK(std::abs(end.xdot.x) < 1e-8);
  CHECK(std::abs(end.xdot.y - 1.0) < 1e-8);
  CHECK(traj.terminal.t == Approx(-kPi / 2));
}

TEST_CASE("zero-energy radial motion") {
  const auto traj = integrate_backward(FrictionField::zero(), parabolic_seed(), 0.5, {});
  REQUIRE(traj.reached_target());
  const double expected = kCbrt92 * std::pow(0.5, 2.0 / 3.0);
  CHECK(expected == Approx(1.040042).epsilon(1e-6));
  CHECK(std::abs(norm(traj.terminal.state.x) - expected) < 1e-8);
  CHECK(std::abs(traj.terminal.state.x.y) == 0.0);
}

TEST_CASE("angular momentum decays as exp(-D t) under constant drag") {
  const auto traj = integrate_backward(FrictionField::constant(0.1), {{1, 0}, {0, 1}}, 1.0, {});
  REQUIRE(traj.reached_target());
  const double c1 = cross(traj.terminal.state.x, traj.terminal.state.xdot);
  CHECK(std::abs(c1 - std::exp(0.1)) < 1e-8);
  CHECK(c1 == Approx(1.105171).epsilon(1e-6));
  // p(-1) = exp(-0.1) exactly for constant D.
  CHECK(std::abs(traj.p_at(-1.0) - std::exp(-0.1)) < 1e-10);
}

TEST_CASE("variational Jacobian for short flights") {
  const double T = 1e-3;
  const auto run = integrate_variational_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, Mat2::identity(), T, {});
  const Mat2& J = run.position_jacobian;
  CHECK(std::abs(J.a + T) < 5 * T * T);
  CHECK(std::abs(J.d + T) < 5 * T * T);
  CHECK(std::abs(J.b) < 5 * T * T);
  CHECK(std::abs(J.c) < 5 * T * T);
}

TEST_CASE("variational Jacobian matches finite differences") {
  const auto field = FrictionField::constant(0.1);
  const State s0{{1, 0}, {0, 1}};
  const IntegratorConfig cfg;
  const auto run = integrate_variational_backward(field, s0, Mat2::identity(), 1.0, cfg);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    const Vec2 e = j == 0 ? Vec2{h, 0} : Vec2{0, h};
    const Vec2 fd = (position_at(field, s0, s0.xdot + e, 1.0, cfg) - position_at(field, s0, s0.xdot - e, 1.0, cfg)) /
                    (2 * h);
    const Vec2 col = run.position_jacobian.col(j);
    CHECK(std::abs(col.x - fd.x) < 1e-5);
    CHECK(std::abs(col.y - fd.y) < 1e-5);
  }
}

TEST_CASE("radial seed Jacobian keeps radial variations on the axis") {
  const IntegratorConfig cfg;
  const auto run = integrate_variational_backward(FrictionField::zero(), parabolic_seed(), Mat2::identity(), 0.5, cfg);
  CHECK(std::abs(run.position_jacobian.col(0).y) < 1e-8);
  // Finite-difference oracle for the radial column.
  const double h = 1e-6;
  const State s0 = parabolic_seed();
  const Vec2 fd = (position_at(FrictionField::zero(), s0, s0.xdot + Vec2{h, 0}, 0.5, cfg) -
                   position_at(FrictionField::zero(), s0, s0.xdot - Vec2{h, 0}, 0.5, cfg)) /
                  (2 * h);
  CHECK(std::abs(fd.y) < 1e-8);
  CHECK(run.position_jacobian.col(0).x == Approx(fd.x).epsilon(1e-5));
}

TEST_CASE("locate_event") {
  SUBCASE("no rdot crossing on a circular orbit") {
    const auto traj = integrate_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, 3.0, {});
    CHECK_FALSE(locate_event(traj, EventKind::rdot_zero()).has_value());
  }
  SUBCASE("radius crossing on the parabolic seed") {
    const auto traj = integrate_backward(FrictionField::zero(), parabolic_seed(), 1.0 - 1e-3, {});
    const auto ev = locate_event(traj, EventKind::radius_equals(1.0));
    REQUIRE(ev.has_value());
    CHECK(ev->t == Approx(std::sqrt(2.0 / 9.0) - 1.0).epsilon(1e-10));
    CHECK(ev->t == Approx(-0.528595).epsilon(1e-6));
    CHECK(std::abs(norm(ev->state.x) - 1.0) < 1e-10);
  }
  SUBCASE("apex of a falling radial orbit") {
    // r(0) = 1 falling at rdot = -1/2: backward in time it rises to the apex.
    const State s0{{1, 0}, {-0.5, 0}};
    const double h = 0.125 - 1.0;
    const double a = -1.0 / (2.0 * h);  // radial ellipse r = a (1 - cos E)
    const double e0 = std::acos(1.0 - 1.0 / a);
    const double e1 = 2.0 * kPi - e0;
    const double t_apex = -std::sqrt(a * a * a) * (e1 - kPi - std::sin(e1));
    const auto traj = integrate_backward(FrictionField::zero(), s0, 1.0, {}, {EventKind::rdot_zero()});
    const auto ev = locate_event(traj, EventKind::rdot_zero());
    REQUIRE(ev.has_value());
    CHECK(ev->t == Approx(t_apex).epsilon(1e-9));
    CHECK(norm(ev->state.x) == Approx(2.0 * a).epsilon(1e-9));
    CHECK(std::abs(dot(ev->state.x, ev->state.xdot)) < 1e-10);
    REQUIRE(traj.events.size() == 1);
    CHECK(traj.events.front().t == Approx(t_apex).epsilon(1e-9));
  }
}

TEST_CASE("dense output and segment tiling") {
  const IntegratorConfig cfg;
  const auto traj = integrate_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, kTwoPi, cfg);
  REQUIRE(traj.reached_target());
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const auto& seg = traj.segments[i];
    if (i > 0) CHECK(seg.t0 == traj.segments[i - 1].t_end());
    const double tau = seg.t0 + 0.5 * (seg.t_end() - seg.t0);
    const auto y = seg.eval(tau);
    // x(t) = (cos t, sin t), t = -tau
    worst = std::max(worst, std::hypot(y[0] - std::cos(tau), y[1] + std::sin(tau)));
    if (i > 0) {
      const auto prev_end = traj.segments[i - 1].eval(seg.t0);
      const auto start = seg.eval(seg.t0);
      for (int k = 0; k < 4; ++k) CHECK(std::abs(prev_end[k] - start[k]) <= 10 * cfg.rtol);
    }
  }
  CHECK(traj.segments.front().t0 == 0.0);
  CHECK(traj.segments.back().t_end() == kTwoPi);
  CHECK(worst < 100 * cfg.rtol);
}

TEST_CASE("tolerance study shows fifth-order convergence") {
  auto run = [](double tol) {
    IntegratorConfig cfg;
    cfg.rtol = tol;
    cfg.atol = tol;
    const auto traj = integrate_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, kTwoPi, cfg);
    const Vec2 x = traj.terminal.state.x;
    return std::pair{std::hypot(x.x - 1.0, x.y), static_cast<double>(traj.segments.size())};
  };
  const auto [e1, n1] = run(1e-6);
  const auto [e2, n2] = run(5e-7);
  CHECK(e2 < e1);
  const auto [e3, n3] = run(1e-10);
  const double order = std::log(e1 / e3) / std::log(n3 / n1);
  MESSAGE("observed order " << order);
  CHECK(order >= 4.5);
}

TEST_CASE("energy is conserved without drag and nonincreasing with drag") {
  const auto traj = integrate_backward(FrictionField::zero(), {{1, 0}, {0.2, 1.1}}, kTwoPi, {});
  const double h0 = traj.samples.front().diag.h;
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.diag.h - h0) <= 1e-9);
    CHECK(std::abs(s.diag.h - s.diag.h_polar) <= 1e-10 * std::max(1.0, std::abs(s.diag.h)));
  }

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0.0, 0.5), v(-0.8, 0.8);
  for (int k = 0; k < 10; ++k) {
    const auto field = FrictionField::constant(d(rng));
    const auto t2 = integrate_backward(field, {{1.2, 0.3}, {v(rng), 1.0 + v(rng)}}, 3.0, {});
    REQUIRE(t2.reached_target());
    for (std::size_t i = 1; i < t2.samples.size(); ++i) {
      // Going backward in time the energy can only grow.
      const double prev = t2.samples[i - 1].diag.h;
      CHECK(t2.samples[i].diag.h >= prev - 1e-9 * (1 + std::abs(prev)));
      const double t = t2.samples[i].state.t;
      const double p = t2.samples[i].diag.p;
      CHECK(p <= 1.0);
      CHECK(p >= std::exp(field.d_star() * t) * (1 - 1e-12));
    }
  }
}

TEST_CASE("collision handoff below r_collision") {
  // Strongly outgoing at t = 0: the past comes out of the origin.
  IntegratorConfig cfg;
  const auto traj = integrate_backward(FrictionField::zero(), {{1, 0}, {10, 0}}, 1.0, cfg);
  CHECK(traj.terminal.kind == TerminalKind::kCollisionHandoff);
  CHECK(norm(traj.terminal.state.x) == Approx(cfg.r_collision).epsilon(1e-9));
  CHECK(traj.terminal.t > -1.0);
  CHECK(traj.terminal.t < 0.0);
}

TEST_CASE("handoff state keeps the energy of the run") {
  // Near-miss with a tiny angular momentum: |xdot|^2 ~ 2 / r_collision at the
  // handoff, so interpolation errors would show up strongly in h.
  IntegratorConfig cfg;
  cfg.rtol = 1e-12;
  cfg.atol = 1e-14;
  const State s0{{1, 0}, {1.6, 1e-4}};
  const auto traj = integrate_backward(FrictionField::zero(), s0, 3.0, cfg);
  REQUIRE(traj.terminal.kind == TerminalKind::kCollisionHandoff);
  auto energy = [](const State& s) { return 0.5 * dot(s.xdot, s.xdot) - 1.0 / norm(s.x); };
  const State& s = traj.terminal.state;
  const auto& samples = traj.samples;
  // The jump across the last step is far below the drift accumulated on the way in.
  const double drift = std::abs(energy(s) - energy(s0));
  const double jump = std::abs(energy(s) - energy(samples[samples.size() - 2].state));
  CHECK(drift < 1e-9);
  CHECK(jump < 1e-11);
  CHECK(samples.back().state.x == s.x);
}

TEST_CASE("angle sweep guard terminates the run") {
  const auto traj = integrate_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, 10.0, {},
                                       {EventKind::angle_sweep_exceeds(kTwoPi)});
  CHECK(traj.terminal.kind == TerminalKind::kSweepExceeded);
  CHECK(traj.terminal.t == Approx(-kTwoPi).epsilon(1e-9));
}

TEST_CASE("integration is deterministic") {
  const auto field = FrictionField::radial_exp(0.3, 0.5);
  const auto a = integrate_backward(field, {{1.3, -0.2}, {0.1, 0.9}}, 4.0, {});
  const auto b = integrate_backward(field, {{1.3, -0.2}, {0.1, 0.9}}, 4.0, {});
  REQUIRE(a.segments.size() == b.segments.size());
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    CHECK(a.segments[i].rc == b.segments[i].rc);
    CHECK(a.segments[i].t0 == b.segments[i].t0);
  }
}

TEST_CASE("invalid configuration is rejected") {
  IntegratorConfig cfg;
  cfg.rtol = 0.0;
  CHECK_THROWS_AS(integrate_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, 1.0, cfg), ConfigError);
  CHECK_THROWS_AS(integrate_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, -1.0, {}), DomainError);
  IntegratorConfig tiny;
  tiny.max_steps = 3;
  CHECK_THROWS_AS(integrate_backward(FrictionField::zero(), {{1, 0}, {0, 1}}, 10.0, tiny), SolverError);
}
