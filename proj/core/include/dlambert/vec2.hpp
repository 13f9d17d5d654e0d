#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace dlambert {

// Planar vector. Also doubles as a complex number (re = x, im = y) for the
// Levi-Civita square-root chart, see `cmul` / `cdiv` / `csqrt`.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
// det(a, b) = a x b; for (x, xdot) this is the angular momentum.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline double arg(const Vec2& a) { return std::atan2(a.y, a.x); }
inline Vec2 polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }
inline Vec2 rotate(const Vec2& a, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

constexpr Vec2 cmul(const Vec2& a, const Vec2& b) {
  return {a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x};
}
constexpr Vec2 conj(const Vec2& a) { return {a.x, -a.y}; }
constexpr Vec2 cdiv(const Vec2& a, const Vec2& b) { return cmul(a, conj(b)) / norm2(b); }
constexpr Vec2 csquare(const Vec2& a) { return cmul(a, a); }

// Principal complex square root (non-negative real part).
inline Vec2 csqrt(const Vec2& z) {
  const double r = norm(z);
  if (r == 0.0) return {};
  if (z.x >= 0.0) {
    const double re = std::sqrt(0.5 * (r + z.x));
    return {re, z.y / (2.0 * re)};
  }
  const double im = std::copysign(std::sqrt(0.5 * (r - z.x)), z.y);
  return {z.y / (2.0 * im), im};
}

// Signed angle from a to b in (-pi, pi].
inline double angle_between(const Vec2& a, const Vec2& b) {
  return std::atan2(cross(a, b), dot(a, b));
}

// Row-major 2x2 matrix.
struct Mat2 {
  double a = 0.0, b = 0.0;
  double c = 0.0, d = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 from_columns(const Vec2& c0, const Vec2& c1) {
    return {c0.x, c1.x, c0.y, c1.y};
  }
  constexpr Vec2 col(int j) const { return j == 0 ? Vec2{a, c} : Vec2{b, d}; }
  constexpr double det() const { return a * d - b * c; }
  constexpr Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  constexpr Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

// Solves m * x = rhs by Cramer's rule; returns false when m is singular.
inline bool solve2(const Mat2& m, const Vec2& rhs, Vec2& out) {
  const double det = m.det();
  const double scale = std::abs(m.a) + std::abs(m.b) + std::abs(m.c) + std::abs(m.d);
  if (!(std::abs(det) > 1e-300) || std::abs(det) < 1e-15 * scale * scale) return false;
  out = {(rhs.x * m.d - m.b * rhs.y) / det, (m.a * rhs.y - rhs.x * m.c) / det};
  return true;
}

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace dlambert
