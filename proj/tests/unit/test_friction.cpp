#include <cmath>
#include <random>

#include "doctest.h"
#include "dlambert/errors.hpp"
#include "dlambert/field_json.hpp"
#include "dlambert/friction.hpp"

using namespace dlambert;
using doctest::Approx;

namespace {

FrictionField sqrt_table() {
  std::vector<std::pair<double, double>> knots;
  for (int i = 0; i <= 180; ++i) {
    const double r = std::pow(10.0, -8.0 + 9.0 * i / 180.0);
    knots.emplace_back(r, std::sqrt(r));
  }
  return FrictionField::radial_table(knots);
}

}  // namespace

TEST_CASE("eval matches closed forms") {
  CHECK(FrictionField::constant(0.1).eval({1, 0}) == 0.1);
  CHECK(FrictionField::zero().eval({3, 4}) == 0.0);
  CHECK(FrictionField::radial_exp(0.2, 1.0).eval({1, 0}) == Approx(0.2 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(FrictionField::radial_exp(0.2, 1.0).eval({1, 0}) == Approx(0.073576).epsilon(1e-5));
}

TEST_CASE("eval and grad reject the origin") {
  const auto f = FrictionField::constant(0.3);
  CHECK_THROWS_AS(f.eval({0, 0}), DomainError);
  CHECK_THROWS_AS(f.grad({0, 0}), DomainError);
}

TEST_CASE("grad closed forms") {
  const Vec2 g0 = FrictionField::constant(0.1).grad({2, 0});
  CHECK(g0.x == 0.0);
  CHECK(g0.y == 0.0);
  const Vec2 g1 = FrictionField::radial_exp(1.0, 1.0).grad({1, 0});
  CHECK(g1.x == Approx(-std::exp(-1.0)).epsilon(1e-14));
  CHECK(g1.y == 0.0);
}

TEST_CASE("finite-difference gradient of a flat table vanishes") {
  const auto flat = FrictionField::radial_table({{0.1, 0.1}, {1.0, 0.1}, {2.0, 0.1}, {5.0, 0.1}});
  const auto fd = flat.without_analytic_gradient();
  CHECK_FALSE(fd.grad_available());
  for (const Vec2 x : {Vec2{0.5, 0.2}, Vec2{-1.3, 2.0}, Vec2{3.0, -0.1}}) {
    const Vec2 g = fd.grad(x);
    CHECK(std::abs(g.x) < 1e-6);
    CHECK(std::abs(g.y) < 1e-6);
  }
}

TEST_CASE("bounds hold on a random grid") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(1e-6, 20.0), angle(-kPi, kPi);
  const std::vector<FrictionField> fields{
      FrictionField::zero(), FrictionField::constant(0.4), FrictionField::radial_exp(0.7, 2.0),
      FrictionField::radial_table({{0.2, 0.5}, {1.0, 0.05}, {2.0, 0.3}, {4.0, 0.0}, {9.0, 0.8}}), sqrt_table()};
  for (const auto& f : fields) {
    for (int i = 0; i < 2000; ++i) {
      const double d = f.eval(polar(radius(rng), angle(rng)));
      CHECK(d >= 0.0);
      CHECK(d <= f.d_star());
    }
  }
}

TEST_CASE("analytic gradients agree with finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> radius(0.1, 10.0), angle(-kPi, kPi);
  const std::vector<FrictionField> fields{
      FrictionField::radial_exp(0.7, 0.9),
      FrictionField::radial_table({{0.05, 0.5}, {1.0, 0.05}, {2.0, 0.3}, {4.0, 0.1}, {12.0, 0.8}})};
  for (const auto& f : fields) {
    const auto fd = f.without_analytic_gradient();
    for (int i = 0; i < 500; ++i) {
      const Vec2 x = polar(radius(rng), angle(rng));
      const Vec2 ga = f.grad(x), gf = fd.grad(x);
      const double scale = std::max(norm(ga), 1e-3);
      CHECK(norm(ga - gf) <= 1e-5 * scale);
    }
  }
}

TEST_CASE("table interpolant is C1 at interior knots") {
  const auto f = FrictionField::radial_table({{0.2, 0.5}, {1.0, 0.05}, {2.0, 0.3}, {4.0, 0.1}, {9.0, 0.8}});
  for (const double r : {1.0, 2.0, 4.0}) {
    const double eps = 1e-9;
    const double left = f.grad({r - eps, 0}).x;
    const double right = f.grad({r + eps, 0}).x;
    CHECK(left == Approx(right).epsilon(1e-6));
    CHECK(f.eval({r - eps, 0}) == Approx(f.eval({r + eps, 0})).epsilon(1e-8));
  }
}

TEST_CASE("zero field is exactly zero") {
  const auto z = FrictionField::zero();
  for (const Vec2 x : {Vec2{1e-9, 0}, Vec2{3, 4}, Vec2{-7, 1e3}}) {
    CHECK(z.eval(x) == 0.0);
    CHECK(z.grad(x) == Vec2{});
  }
}

TEST_CASE("check_d2 examples") {
  const auto c = check_d2(FrictionField::constant(0.5), 1e-6);
  CHECK(c.max_value == 0.0);
  CHECK_FALSE(c.flagged);

  const auto e = check_d2(FrictionField::radial_exp(1.0, 1.0), 1e-6);
  CHECK(e.tail_value == Approx(1e-3 * std::exp(-1e-6)).epsilon(1e-9));
  // sqrt(r) e^{-r} peaks at r = 1/2 inside the probed range.
  CHECK(e.max_value == Approx(std::sqrt(0.5) * std::exp(-0.5)).epsilon(1e-3));
  CHECK_FALSE(e.flagged);
  CHECK(e.decreasing_to_zero);

  const auto s = check_d2(sqrt_table(), 1e-6);
  CHECK(s.flagged);
  CHECK(s.tail_value == Approx(0.5).epsilon(0.05));
  CHECK(sqrt_table().d2_flagged());
  CHECK_FALSE(FrictionField::radial_exp(1.0, 1.0).d2_flagged());
}

TEST_CASE("JSON round trip and validation") {
  const auto j = nlohmann::json::parse(R"({"kind":"radial_table","table":[[0.5,0.1],[1.0,0.2],[3.0,0.05]]})");
  const auto f = field_from_json(j);
  CHECK(f.d_star() == 0.2);
  CHECK(field_to_json(f) == j);
  CHECK(field_from_json(nlohmann::json::parse(R"({"kind":"constant","D0":0.1})")).eval({1, 0}) == 0.1);
  CHECK(field_from_json(nlohmann::json::parse(R"({"kind":"radial_exp","D0":0.2,"k":1})")).d_star() == 0.2);
  CHECK(field_from_json(nlohmann::json::parse(R"({"kind":"zero"})")).is_zero());

  CHECK_THROWS_AS(field_from_json(nlohmann::json::parse(R"({"kind":"quadratic"})")), ConfigError);
  CHECK_THROWS_AS(field_from_json(nlohmann::json::parse(R"({"kind":"constant","D0":-1})")), ConfigError);
  CHECK_THROWS_AS(field_from_json(nlohmann::json::parse(R"({"kind":"constant"})")), ConfigError);
  CHECK_THROWS_AS(field_from_json(nlohmann::json::parse(R"({"kind":"radial_table","table":[[1,0.1],[0.5,0.2]]})")),
                  ConfigError);
  CHECK_THROWS_AS(field_from_json(nlohmann::json::parse(R"({"kind":"constant","D0":0.1,"extra":1})")), ConfigError);
}
