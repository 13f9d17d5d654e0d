#include "dlambert/friction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dlambert/errors.hpp"

namespace dlambert {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_nonzero(const Vec2& x) {
  if (x.x == 0.0 && x.y == 0.0) throw DomainError("friction field evaluated at the origin");
}

// Endpoint slope of a shape-preserving cubic Hermite interpolant.
double pchip_edge(double h0, double h1, double m0, double m1) {
  double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (std::signbit(d) != std::signbit(m0)) {
    d = 0.0;
  } else if (std::signbit(m0) != std::signbit(m1) && std::abs(d) > 3.0 * std::abs(m0)) {
    d = 3.0 * m0;
  }
  return d;
}

std::vector<double> pchip_slopes(const std::vector<double>& r, const std::vector<double>& d) {
  const std::size_t n = r.size();
  std::vector<double> slope(n, 0.0);
  if (n < 2) return slope;
  std::vector<double> h(n - 1), m(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = r[i + 1] - r[i];
    m[i] = (d[i + 1] - d[i]) / h[i];
  }
  if (n == 2) {
    slope[0] = slope[1] = m[0];
    return slope;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (m[k - 1] == 0.0 || m[k] == 0.0 || std::signbit(m[k - 1]) != std::signbit(m[k])) {
      slope[k] = 0.0;
      continue;
    }
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    slope[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
  }
  slope[0] = pchip_edge(h[0], h[1], m[0], m[1]);
  slope[n - 1] = pchip_edge(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  return slope;
}

// Returns (value, d/dr) of the table interpolant.
std::pair<double, double> table_eval(const FrictionField::RadialTable& t, double r) {
  const auto& rs = t.r;
  if (rs.size() == 1 || r <= rs.front()) return {t.d.front(), 0.0};
  if (r >= rs.back()) return {t.d.back(), 0.0};
  const auto it = std::upper_bound(rs.begin(), rs.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - rs.begin()) - 1;
  const double h = rs[i + 1] - rs[i];
  const double s = (r - rs[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double value = h00 * t.d[i] + h10 * h * t.slope[i] + h01 * t.d[i + 1] + h11 * h * t.slope[i + 1];
  const double dh00 = 6 * s2 - 6 * s, dh10 = 3 * s2 - 4 * s + 1;
  const double dh01 = -6 * s2 + 6 * s, dh11 = 3 * s2 - 2 * s;
  const double deriv =
      (dh00 * t.d[i] + dh01 * t.d[i + 1]) / h + dh10 * t.slope[i] + dh11 * t.slope[i + 1];
  return {value, deriv};
}

}  // namespace

FrictionField::FrictionField(Kind kind, double d_star, bool grad_available)
    : kind_(std::move(kind)), d_star_(d_star), grad_available_(grad_available) {
  refresh_d2_flag();
}

void FrictionField::refresh_d2_flag() { d2_flagged_ = check_d2(*this, kDefaultD2Radius).flagged; }

FrictionField FrictionField::zero() { return FrictionField(Zero{}, 0.0, true); }

FrictionField FrictionField::constant(double d0) {
  if (!(d0 >= 0.0) || !std::isfinite(d0)) throw ConfigError("constant friction must be finite and >= 0");
  if (d0 == 0.0) return zero();
  return FrictionField(Constant{d0}, d0, true);
}

FrictionField FrictionField::radial_exp(double d0, double k) {
  if (!(d0 >= 0.0) || !std::isfinite(d0)) throw ConfigError("radial_exp D0 must be finite and >= 0");
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("radial_exp k must be finite and >= 0");
  return FrictionField(RadialExp{d0, k}, d0, true);
}

FrictionField FrictionField::radial_table(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw ConfigError("radial_table needs at least one knot");
  RadialTable t;
  double prev = 0.0;
  for (const auto& [r, d] : knots) {
    if (!(r > prev) || !std::isfinite(r)) throw ConfigError("radial_table radii must be positive and strictly increasing");
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("radial_table values must be finite and >= 0");
    t.r.push_back(r);
    t.d.push_back(d);
    prev = r;
  }
  t.slope = pchip_slopes(t.r, t.d);
  const double d_star = *std::max_element(t.d.begin(), t.d.end());
  return FrictionField(std::move(t), d_star, true);
}

FrictionField FrictionField::custom(std::function<double(const Vec2&)> fn, double d_star,
                                    std::string label) {
  if (!fn) throw ConfigError("custom friction needs a callable");
  if (!(d_star >= 0.0)) throw ConfigError("custom friction bound must be >= 0");
  return FrictionField(Custom{std::move(fn), d_star, std::move(label)}, d_star, false);
}

FrictionField FrictionField::without_analytic_gradient() const {
  FrictionField copy = *this;
  copy.grad_available_ = false;
  copy.refresh_d2_flag();
  return copy;
}

double FrictionField::eval(const Vec2& x) const {
  require_nonzero(x);
  return std::visit(
      Overloaded{
          [](const Zero&) { return 0.0; },
          [](const Constant& c) { return c.d0; },
          [&](const RadialExp& e) { return e.d0 * std::exp(-e.k * norm(x)); },
          [&](const RadialTable& t) { return table_eval(t, norm(x)).first; },
          [&](const Custom& c) { return c.fn(x); },
      },
      kind_);
}

Vec2 FrictionField::grad_fd(const Vec2& x) const {
  const double h = 1e-6 * norm(x);
  const Vec2 ex{h, 0.0}, ey{0.0, h};
  return {(eval(x + ex) - eval(x - ex)) / (2.0 * h), (eval(x + ey) - eval(x - ey)) / (2.0 * h)};
}

Vec2 FrictionField::grad(const Vec2& x) const {
  require_nonzero(x);
  if (!grad_available_) return grad_fd(x);
  const double r = norm(x);
  const double d_dr = std::visit(
      Overloaded{
          [](const Zero&) { return 0.0; },
          [](const Constant&) { return 0.0; },
          [&](const RadialExp& e) { return -e.k * e.d0 * std::exp(-e.k * r); },
          [&](const RadialTable& t) { return table_eval(t, r).second; },
          [](const Custom&) { return 0.0; },
      },
      kind_);
  return (d_dr / r) * x;
}

double FrictionField::limit_at_origin() const {
  return std::visit(
      Overloaded{
          [](const Zero&) { return 0.0; },
          [](const Constant& c) { return c.d0; },
          [](const RadialExp& e) { return e.d0; },
          [](const RadialTable& t) { return t.d.front(); },
          [](const Custom& c) { return c.fn(Vec2{1e-12, 0.0}); },
      },
      kind_);
}

std::string FrictionField::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Zero&) { os << "zero"; },
                 [&](const Constant& c) { os << "constant(D0=" << c.d0 << ")"; },
                 [&](const RadialExp& e) { os << "radial_exp(D0=" << e.d0 << ", k=" << e.k << ")"; },
                 [&](const RadialTable& t) { os << "radial_table(" << t.r.size() << " knots)"; },
                 [&](const Custom& c) { os << c.label; },
             },
             kind_);
  return os.str();
}

D2Report check_d2(const FrictionField& field, double r_min) {
  D2Report rep;
  rep.r_min = r_min;
  if (!(r_min > 0.0) || r_min >= 1.0) {
    rep.decreasing_to_zero = true;
    return rep;
  }
  constexpr int kPerDecade = 20;
  constexpr int kDirections = 8;
  const double decades = -std::log10(r_min);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * kPerDecade)) + 1);
  auto probe = [&](double r) {
    double best = 0.0;
    for (int k = 0; k < kDirections; ++k) {
      const double phi = kTwoPi * k / kDirections;
      best = std::max(best, std::sqrt(r) * norm(field.grad(polar(r, phi))));
    }
    return best;
  };
  rep.samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = std::pow(10.0, std::log10(r_min) * (1.0 - static_cast<double>(i) / (n - 1)));
    const double v = probe(r);
    rep.samples.emplace_back(r, v);
    rep.max_value = std::max(rep.max_value, v);
  }
  rep.tail_value = rep.samples.front().second;
  // Compare the lowest probed decade against the one above it; a single point can sit on a flat stretch.
  auto decade_max = [&](double lo) {
    double best = 0.0;
    for (const auto& [r, v] : rep.samples) {
      if (r >= lo * (1 - 1e-12) && r <= 10.0 * lo * (1 + 1e-12)) best = std::max(best, v);
    }
    if (10.0 * lo > 1.0) best = std::max(best, probe(std::min(1.0, 10.0 * lo)));
    return best;
  };
  const double lowest = decade_max(r_min);
  const double upper = decade_max(std::min(1.0, 10.0 * r_min));
  rep.decade_ratio = upper > 0.0 ? lowest / upper : (lowest > 0.0 ? INFINITY : 0.0);
  // sqrt(r)*|grad D| falls by sqrt(10) per decade when grad D stays bounded.
  constexpr double kFloor = 1e-9;
  rep.decreasing_to_zero = lowest <= kFloor || rep.decade_ratio <= 0.5;
  rep.flagged = !rep.decreasing_to_zero;
  return rep;
}

}  // namespace dlambert
