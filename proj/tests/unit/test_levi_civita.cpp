#include <cmath>
#include <random>

#include "doctest.h"
#include "dlambert/integrator.hpp"
#include "dlambert/levi_civita.hpp"

using namespace dlambert;
using doctest::Approx;

namespace {

const double kCbrt92 = std::cbrt(4.5);

// r(t) = (9/2)^(1/3) |t - alpha|^(2/3): zero-energy radial motion bouncing at alpha.
double parabolic_r(double t, double alpha) { return kCbrt92 * std::pow(std::abs(t - alpha), 2.0 / 3.0); }

FrictionField sqrt_table() {
  std::vector<std::pair<double, double>> knots;
  for (int i = 0; i <= 90; ++i) {
    const double r = std::pow(10.0, -10.0 + 11.0 * i / 90.0);
    knots.emplace_back(r, std::sqrt(r));
  }
  return FrictionField::radial_table(knots);
}

}  // namespace

TEST_CASE("goursat_1d examples") {
  auto lc = goursat_1d(1.0, 0.0, -1.0);
  CHECK(lc.u == 1.0);
  CHECK(lc.u_prime == 0.0);
  CHECK(lc.E == -1.0);
  CHECK(lc.residual() == 0.0);

  const double r = kCbrt92, rdot = 2.0 / 3.0 * kCbrt92;
  lc = goursat_1d(r, rdot, 0.5 * rdot * rdot - 1.0 / r);
  CHECK(lc.u == Approx(std::pow(4.5, 1.0 / 6.0)).epsilon(1e-14));
  CHECK(lc.u == Approx(1.2849).epsilon(1e-4));
  CHECK(lc.u_prime == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(lc.residual()) < 1e-14);

  lc = goursat_1d(2.0, 1.0, 0.0);
  CHECK(lc.u == Approx(std::sqrt(2.0)));
  CHECK(lc.u_prime == Approx(std::sqrt(2.0) / 2));
  CHECK(std::abs(lc.residual()) < 1e-15);

  CHECK_THROWS_AS(goursat_1d(0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("goursat_planar examples") {
  auto lc = goursat_planar({1, 0}, {0, 1});
  CHECK(lc.w == Vec2{1, 0});
  CHECK(lc.w_prime.x == Approx(0.0));
  CHECK(lc.w_prime.y == Approx(0.5));
  CHECK(lc.E == Approx(-0.5));
  CHECK(std::abs(lc.residual()) < 1e-15);

  lc = goursat_planar({0, 1}, {-1, 0});
  CHECK(lc.w.x == Approx(std::sqrt(0.5)));
  CHECK(lc.w.y == Approx(std::sqrt(0.5)));
  CHECK(norm(csquare(lc.w) - Vec2{0, 1}) < 1e-15);
  // w' = |x| xdot / (2w) by complex division, checked through multiplication.
  CHECK(norm(2.0 * cmul(lc.w, lc.w_prime) - Vec2{-1, 0}) < 1e-15);
  CHECK(std::abs(lc.residual()) < 1e-12);

  lc = goursat_planar({4, 0}, {0, 0});
  CHECK(lc.w == Vec2{2, 0});
  CHECK(lc.w_prime == Vec2{0, 0});
  CHECK(lc.E == Approx(-0.25));
  CHECK(std::abs(lc.residual()) < 1e-15);

  const auto minus = goursat_planar({4, 0}, {0, 1}, -1);
  CHECK(minus.w == Vec2{-2, 0});
  CHECK(minus.branch == -1);
  CHECK_THROWS_AS(goursat_planar({0, 0}, {1, 0}), DomainError);
}

TEST_CASE("lc_to_physical examples and round trip") {
  LCStatePlanar lc;
  lc.w = {1, 0};
  lc.w_prime = {0, 0.5};
  auto s = lc_to_physical(lc);
  CHECK(s.x == Vec2{1, 0});
  CHECK(s.xdot.x == Approx(0.0));
  CHECK(s.xdot.y == Approx(1.0));

  lc.w = {0, 1};
  lc.w_prime = {0, 0};
  s = lc_to_physical(lc);
  CHECK(s.x.x == Approx(-1.0));
  CHECK(s.xdot == Vec2{0, 0});

  lc.w = {0, 0};
  try {
    lc_to_physical(lc);
    FAIL("expected VelocityUndefined");
  } catch (const VelocityUndefined& e) {
    CHECK(e.position() == Vec2{0, 0});
  }

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const State s0{{u(rng), u(rng)}, {u(rng), u(rng)}};
    for (int branch : {1, -1}) {
      const State back = lc_to_physical(goursat_planar(s0.x, s0.xdot, branch));
      CHECK(norm(back.x - s0.x) <= 1e-12 * (1 + norm(s0.x)));
      CHECK(norm(back.xdot - s0.xdot) <= 1e-12 * (1 + norm(s0.xdot)));
    }
  }
}

TEST_CASE("planar regularized circular orbit") {
  const auto lc0 = goursat_planar({1, 0}, {0, 1});
  const auto run = integrate_lc_planar_backward(FrictionField::zero(), lc0, kPi);
  REQUIRE(run.stop == LCStop::kReachedTime);
  const Vec2 x = csquare(run.final.w);
  CHECK(norm(x - Vec2{-1, 0}) < 1e-8);
  // On the unit circle t = s, and w(s) = exp(i s / 2).
  CHECK(run.final.s == Approx(-kPi).epsilon(1e-9));
  CHECK(norm(run.final.w - Vec2{0, -1}) < 1e-8);
  CHECK(run.final.t_accum == -kPi);
}

TEST_CASE("zero-energy radial motion through the collision") {
  // r = 1 outgoing at sqrt(2): backward it falls into the origin at
  // alpha = -sqrt(2/9) and comes back out.
  const double alpha = -std::sqrt(2.0 / 9.0);
  const auto lc0 = goursat_1d(1.0, std::sqrt(2.0), 0.0);
  CHECK(std::abs(lc0.residual()) < 1e-15);
  const auto run = integrate_lc_1d_backward(FrictionField::zero(), {1, 0}, lc0, 1.5);
  REQUIRE(run.stop == LCStop::kReachedTime);
  for (const auto& n : run.nodes) {
    // u'' = 0: u is linear in s.
    CHECK(n.u_prime == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(n.u == Approx(1.0 + n.s / std::sqrt(2.0)).epsilon(1e-9).scale(1.0));
    CHECK(n.u * n.u == Approx(parabolic_r(n.t_accum, alpha)).epsilon(1e-8).scale(1.0));
  }
  CHECK(run.final.u < 0.0);
  LCOptions opts;
  opts.stop_at_collision = true;
  const auto to_col = integrate_lc_1d_backward(FrictionField::zero(), {1, 0}, lc0, 1.5, {}, opts);
  REQUIRE(to_col.stop == LCStop::kCollision);
  CHECK(to_col.final.t_accum == Approx(alpha).epsilon(1e-10));
  CHECK(to_col.final.s == Approx(-std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("regularized and Cartesian flows agree") {
  const auto field = FrictionField::constant(0.05);
  const State s0{{1, 0}, {0, 1}};
  const auto run = integrate_lc_planar_backward(field, goursat_planar(s0.x, s0.xdot), 1.0);
  REQUIRE(run.stop == LCStop::kReachedTime);
  const auto traj = integrate_backward(field, s0, 1.0);
  REQUIRE(traj.reached_target());
  const State lc_end = lc_to_physical(run.final);
  CHECK(norm(lc_end.x - traj.terminal.state.x) < 1e-7);
  CHECK(norm(lc_end.xdot - traj.terminal.state.xdot) < 1e-7);
  // q accumulates int D dt = 0.05 T.
  CHECK(run.final.q == Approx(0.05).epsilon(1e-9));

  // A damped eccentric orbit, compared along the way.
  const auto field2 = FrictionField::radial_exp(0.3, 0.5);
  const State s1{{0.4, 1.1}, {-0.9, 0.2}};
  const auto run2 = integrate_lc_planar_backward(field2, goursat_planar(s1.x, s1.xdot), 3.0);
  const auto traj2 = integrate_backward(field2, s1, 3.0);
  for (double t : {-0.5, -1.3, -2.2, -3.0}) {
    const State a = lc_to_physical(state_at_time(run2, t));
    const State b = traj2.state_at(t);
    CHECK(norm(a.x - b.x) < 1e-7);
  }
}

TEST_CASE("manifold residual and energy along regularized runs") {
  SUBCASE("circular, |s| up to 50") {
    const auto run = integrate_lc_planar_backward(FrictionField::zero(), goursat_planar({1, 0}, {0, 1}), 50.0);
    CHECK(run.final.s == Approx(-50.0).epsilon(1e-8));
    CHECK(run.max_residual < 1e-8);
    for (const auto& n : run.nodes) {
      CHECK(std::abs(n.residual()) < 1e-8);
      CHECK(n.E == Approx(-0.5).epsilon(1e-10));
    }
  }
  SUBCASE("bounce, |s| up to 50") {
    const auto run = integrate_lc_planar_backward(FrictionField::zero(), goursat_planar({1, 0}, {std::sqrt(2.0), 0}),
                                                  19000.0);
    REQUIRE(run.stop == LCStop::kReachedTime);
    CHECK(run.final.s < -49.0);
    CHECK(run.max_residual < 1e-8);
    for (const auto& n : run.nodes) CHECK(std::abs(n.residual()) < 1e-8);
  }
  SUBCASE("E grows backward under drag") {
    const auto run = integrate_lc_planar_backward(FrictionField::constant(0.2), goursat_planar({1, 0}, {0.3, 0.8}),
                                                  10.0);
    REQUIRE(run.stop == LCStop::kReachedTime);
    for (std::size_t i = 1; i < run.nodes.size(); ++i) {
      CHECK(run.nodes[i].E >= run.nodes[i - 1].E - 1e-12);
      CHECK(std::abs(run.nodes[i].residual()) < 1e-8);
    }
  }
}

TEST_CASE("extended position map") {
  const auto zero = FrictionField::zero();
  const Vec2 quarter = extended_position_map(zero, {1, 0}, {0, 1}, kPi / 2);
  CHECK(norm(quarter - Vec2{0, -1}) < 1e-8);

  // Symmetric bounce: out and back in twice the collision time.
  const double T = 2.0 * std::sqrt(2.0 / 9.0);
  CHECK(T == Approx(0.942809).epsilon(1e-6));
  const Vec2 back = extended_position_map(zero, {1, 0}, {std::sqrt(2.0), 0}, T);
  CHECK(norm(back - Vec2{1, 0}) < 1e-8);

  const auto field = FrictionField::constant(0.1);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ang(-kPi, kPi), rad(0.3, 2.0), speed(-2.0, 2.0), dur(0.1, 4.0);
  for (int i = 0; i < 50; ++i) {
    const double phi = ang(rng);
    const Vec2 e = polar(1.0, phi);
    const Vec2 x0 = rad(rng) * e;
    const Vec2 v0 = speed(rng) * e;
    const double Ti = dur(rng);
    const Vec2 a = extended_position_map(field, x0, v0, Ti, {}, 1);
    const Vec2 b = extended_position_map(field, x0, v0, Ti, {}, -1);
    CHECK(std::abs(cross(e, a)) < 1e-9);
    CHECK(dot(e, a) >= -1e-12);
    CHECK(norm(a - b) < 1e-10);
  }
}

TEST_CASE("collision asymptotics of radial motion") {
  for (const auto& field : {FrictionField::zero(), FrictionField::constant(0.2)}) {
    const auto lc0 = goursat_1d(1.0, 1.3, 0.5 * 1.3 * 1.3 - 1.0);
    LCOptions opts;
    opts.stop_at_collision = true;
    const auto run = integrate_lc_1d_backward(field, {1, 0}, lc0, 10.0, {}, opts);
    REQUIRE(run.stop == LCStop::kCollision);
    const double alpha = run.final.t_accum;
    CHECK(alpha < 0.0);
    double prev_err = INFINITY;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
      const auto s = state_at_time(run, alpha + dt);
      const double ratio = s.u * s.u / std::pow(dt, 2.0 / 3.0);
      const double err = std::abs(ratio - kCbrt92);
      CHECK(err < prev_err);
      prev_err = err;
    }
    CHECK(prev_err < 1e-3);
  }
}

TEST_CASE("requested time is reached before the fictitious-time cap") {
  for (double rdot : {-1.0, 0.0, 0.5, 1.2}) {
    const auto lc0 = goursat_1d(1.0, rdot, 0.5 * rdot * rdot - 1.0);
    LCOptions opts;
    opts.s_cap = 1e4;
    const auto run = integrate_lc_1d_backward(FrictionField::constant(0.05), {0, 1}, lc0, 100.0, {}, opts);
    CHECK(run.stop == LCStop::kReachedTime);
    CHECK(run.final.t_accum == -100.0);
  }
}

TEST_CASE("regularization refuses fields with a flagged small-radius gradient") {
  const auto f = sqrt_table();
  REQUIRE(f.d2_flagged());
  CHECK_THROWS_AS(extended_position_map(f, {1, 0}, {0, 1}, 1.0), RegularizationRefused);
  CHECK_THROWS_AS(integrate_lc_planar_backward(FrictionField::zero(), LCStatePlanar{{1, 0}, {0, 1}}, 1.0),
                  DomainError);
}

TEST_CASE("projection onto the manifold") {
  LCStatePlanar lc = goursat_planar({0.3, -0.2}, {1.4, 2.1});
  lc.w_prime = 1.001 * lc.w_prime;
  CHECK(std::abs(lc.residual()) > 1e-4);
  const LCStatePlanar p = project_to_manifold(lc);
  CHECK(std::abs(p.residual()) < 1e-14);
  CHECK(cross(p.w_prime, lc.w_prime) == Approx(0.0).scale(1.0));
  const State s = lc_to_physical(p);
  CHECK(0.5 * dot(s.xdot, s.xdot) - 1.0 / norm(s.x) == Approx(p.E).epsilon(1e-13));

  LCState1D u = goursat_1d(0.01, -3.0, 4.5 - 100.0);
  u.u_prime *= 0.999;
  CHECK(std::abs(project_to_manifold(u).residual()) < 1e-14);
}
