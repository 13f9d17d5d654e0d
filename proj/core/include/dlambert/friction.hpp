#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dlambert/vec2.hpp"

namespace dlambert {

/// Position-dependent drag coefficient D(x) of the damped Kepler system
///
///     x'' + D(x) x' = -x / |x|^3.
///
/// D must be nonnegative and bounded by `d_star()`. The field is immutable
/// after construction and may be shared across concurrent solves.
class FrictionField {
 public:
  struct Zero {};
  struct Constant {
    double d0 = 0.0;
  };
  /// D(x) = d0 * exp(-k |x|)
  struct RadialExp {
    double d0 = 0.0;
    double k = 0.0;
  };
  /// D(x) = interpolant of (r, D) knots at r = |x|. Monotone piecewise cubic
  /// Hermite (C1 at interior knots, never overshoots the knot values);
  /// constant extension outside the knot range.
  struct RadialTable {
    std::vector<double> r;
    std::vector<double> d;
    std::vector<double> slope;  // Hermite derivative at each knot
  };
  /// Arbitrary user-supplied field; gradient by finite differences.
  struct Custom {
    std::function<double(const Vec2&)> fn;
    double d_star = 0.0;
    std::string label;
  };
  using Kind = std::variant<Zero, Constant, RadialExp, RadialTable, Custom>;

  static FrictionField zero();
  static FrictionField constant(double d0);
  static FrictionField radial_exp(double d0, double k);
  /// Knots must have strictly increasing r > 0 and nonnegative D.
  static FrictionField radial_table(std::vector<std::pair<double, double>> knots);
  static FrictionField custom(std::function<double(const Vec2&)> fn, double d_star,
                              std::string label = "custom");

  /// Same field with the analytic gradient disabled (forces finite differences).
  FrictionField without_analytic_gradient() const;

  double eval(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;

  /// Limit of D at the origin, used by the regularized flow where x = w^2 may
  /// vanish. Radial kinds are exact; custom fields probe a tiny radius.
  double limit_at_origin() const;

  double d_star() const { return d_star_; }
  bool grad_available() const { return grad_available_; }
  bool is_zero() const { return std::holds_alternative<Zero>(kind_); }
  const Kind& kind() const { return kind_; }
  std::string describe() const;

  /// Cached outcome of `check_d2(*this, kDefaultD2Radius)`.
  bool d2_flagged() const { return d2_flagged_; }
  static constexpr double kDefaultD2Radius = 1e-8;

 private:
  explicit FrictionField(Kind kind, double d_star, bool grad_available);
  Vec2 grad_fd(const Vec2& x) const;
  void refresh_d2_flag();

  Kind kind_;
  double d_star_ = 0.0;
  bool grad_available_ = true;
  bool d2_flagged_ = false;
};

/// Advisory probe of the collision-regularity condition
/// lim_{x->0} sqrt|x| grad D(x) = 0.
struct D2Report {
  double r_min = 0.0;
  double max_value = 0.0;    // max of sqrt(r) |grad D| over the grid
  double tail_value = 0.0;   // value at r_min (max over probe directions)
  double decade_ratio = 0.0; // max over [r_min, 10 r_min] / max over the decade above
  bool decreasing_to_zero = true;
  bool flagged = false;      // limit does not appear to vanish
  std::vector<std::pair<double, double>> samples;  // (r, sqrt(r)|grad D|)
};

/// Samples sqrt(r)|grad D| on a log-spaced grid r in [r_min, 1] along several
/// directions. Never throws for r_min > 0.
D2Report check_d2(const FrictionField& field, double r_min);

}  // namespace dlambert
