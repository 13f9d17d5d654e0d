#pragma once

// Dormand-Prince 5(4) with Shampine's 4th-order continuous extension.
// Integrates forward in an internal variable; callers map physical backward
// time onto it (tau = -t, sigma = -s).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>

#include "dlambert/errors.hpp"

namespace dlambert {

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.1;        // upper bound for the first step
  double h_min = 1e-14;
  long max_steps = 1'000'000;
  double r_collision = 1e-3;  // Cartesian -> regularized handoff radius

  /// Throws ConfigError when the invariants (positive tolerances,
  /// h_min < h_init) do not hold.
  void validate() const;
  IntegratorConfig tightened(double factor) const {
    IntegratorConfig c = *this;
    c.rtol /= factor;
    c.atol /= factor;
    return c;
  }
};

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  double t_stop = 0.0;  // valid range is [t0, t_stop], t_stop <= t0 + h
  std::array<Vec<N>, 5> rc{};

  double t_end() const { return t_stop; }

  Vec<N> eval(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = rc[0][i] + s * (rc[1][i] + s1 * (rc[2][i] + s * (rc[3][i] + s1 * rc[4][i])));
    }
    return out;
  }

  Vec<N> derivative(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      // d/ds of rc0 + s(rc1 + s1(rc2 + s(rc3 + s1 rc4)))
      const double inner = rc[3][i] + s1 * rc[4][i];
      const double mid = rc[2][i] + s * inner;
      const double d_inner = -rc[4][i];
      const double d_mid = inner + s * d_inner;
      const double d_outer = -mid + s1 * d_mid;
      out[i] = (rc[1][i] + s1 * mid + s * d_outer) / h;
    }
    return out;
  }

  template <std::size_t M>
  DenseSegment<M> project() const {
    static_assert(M <= N);
    DenseSegment<M> out;
    out.t0 = t0;
    out.h = h;
    out.t_stop = t_stop;
    for (std::size_t k = 0; k < 5; ++k) std::copy_n(rc[k].begin(), M, out.rc[k].begin());
    return out;
  }
};

enum class StepVerdict { kAccept, kReject, kStop };
enum class RunStatus { kCompleted, kStopped, kStepFailure, kMaxSteps };

template <std::size_t N>
struct RunResult {
  RunStatus status = RunStatus::kCompleted;
  double t = 0.0;
  Vec<N> y{};
  long steps = 0;
  long rejected = 0;
};

namespace detail {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, double rtol, double atol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / sc);
  }
  return worst;
}

}  // namespace detail

/// One fifth-order Dormand-Prince step of size h from (t, y), without error
/// control. More accurate than the dense interpolant for a landing point
/// inside an accepted step.
template <std::size_t N, class Rhs>
Vec<N> dopri5_single_step(Rhs&& f, double t, const Vec<N>& y, double h) {
  using namespace detail;
  Vec<N> k1 = f(t, y), k2, k3, k4, k5, k6, tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  k2 = f(t + c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = f(t + c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = f(t + c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = f(t + c5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) {
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  }
  k6 = f(t + h, tmp);
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  }
  return out;
}

/// Adaptive integration of y' = f(t, y) from (t0, y0) to t_end > t0.
///
/// `f(t, y)` returns y'. It may throw DomainError (e.g. a stage landing on a
/// singularity); the step is then rejected and retried with a smaller size.
/// `on_step(segment)` is called for every step that passes the error test and
/// may reject it (retry smaller) or stop the run. The final state reported for
/// a stopped run is the end of the last accepted segment.
/// `project(t, y)` may adjust the state after each accepted step (returning
/// true when it changed anything); the stored segment is not modified.
template <std::size_t N, class Rhs, class Observer, class Projector>
RunResult<N> dopri5(Rhs&& f, double t0, const Vec<N>& y0, double t_end, const IntegratorConfig& cfg,
                    Observer&& on_step, Projector&& project) {
  using namespace detail;
  RunResult<N> res;
  res.t = t0;
  res.y = y0;
  if (!(t_end > t0)) return res;

  Vec<N> k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, ytmp{}, y1{}, err{};
  k1 = f(t0, y0);

  // Initial step: Hairer-Wanner heuristic capped by h_init.
  double h;
  {
    double d0 = 0.0, d1n = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = cfg.atol + cfg.rtol * std::abs(y0[i]);
      d0 = std::max(d0, std::abs(y0[i]) / sc);
      d1n = std::max(d1n, std::abs(k1[i]) / sc);
    }
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, t_end - t0);
    Vec<N> yp;
    for (std::size_t i = 0; i < N; ++i) yp[i] = y0[i] + h0 * k1[i];
    double d2 = 0.0;
    try {
      const Vec<N> fp = f(t0 + h0, yp);
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = cfg.atol + cfg.rtol * std::abs(y0[i]);
        d2 = std::max(d2, std::abs(fp[i] - k1[i]) / sc / h0);
      }
    } catch (const DomainError&) {
      d2 = 1e30;
    }
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, cfg.h_init, t_end - t0});
    h = std::max(h, cfg.h_min);
  }

  double t = t0;
  Vec<N> y = y0;
  bool last_rejected = false;
  const double span = t_end - t0;

  while (true) {
    if (res.steps + res.rejected >= cfg.max_steps) {
      res.status = RunStatus::kMaxSteps;
      break;
    }
    bool final_step = false;
    if (t + h >= t_end - 1e-15 * span) {
      h = t_end - t;
      final_step = true;
    }

    bool ok = true;
    try {
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
      k2 = f(t + c2 * h, ytmp);
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = f(t + c3 * h, ytmp);
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = f(t + c4 * h, ytmp);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = f(t + c5 * h, ytmp);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      k6 = f(t + h, ytmp);
      for (std::size_t i = 0; i < N; ++i)
        y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      k7 = f(t + h, y1);
    } catch (const DomainError&) {
      ok = false;
    }

    double en = std::numeric_limits<double>::infinity();
    if (ok) {
      for (std::size_t i = 0; i < N; ++i) {
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      }
      en = error_norm<N>(err, y, y1, cfg.rtol, cfg.atol);
      if (!std::isfinite(en)) en = std::numeric_limits<double>::infinity();
    }

    if (en <= 1.0) {
      DenseSegment<N> seg;
      seg.t0 = t;
      seg.h = h;
      seg.t_stop = final_step ? t_end : t + h;
      for (std::size_t i = 0; i < N; ++i) {
        const double dy = y1[i] - y[i];
        const double bspl = h * k1[i] - dy;
        seg.rc[0][i] = y[i];
        seg.rc[1][i] = dy;
        seg.rc[2][i] = bspl;
        seg.rc[3][i] = dy - h * k7[i] - bspl;
        seg.rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      const StepVerdict verdict = on_step(static_cast<const DenseSegment<N>&>(seg));
      if (verdict == StepVerdict::kReject) {
        ++res.rejected;
        h *= 0.5;
        last_rejected = true;
        if (h < cfg.h_min) {
          res.status = RunStatus::kStepFailure;
          break;
        }
        continue;
      }
      ++res.steps;
      t = final_step ? t_end : t + h;
      y = y1;
      k1 = k7;
      if (verdict != StepVerdict::kStop && project(t, y)) k1 = f(t, y);
      res.t = t;
      res.y = y;
      if (verdict == StepVerdict::kStop) {
        res.status = RunStatus::kStopped;
        break;
      }
      if (final_step) {
        res.status = RunStatus::kCompleted;
        break;
      }
      double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++res.rejected;
      const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.25;
      h *= fac;
      last_rejected = true;
      if (h < cfg.h_min) {
        res.status = RunStatus::kStepFailure;
        break;
      }
    }
  }
  return res;
}

template <std::size_t N, class Rhs, class Observer>
RunResult<N> dopri5(Rhs&& f, double t0, const Vec<N>& y0, double t_end, const IntegratorConfig& cfg,
                    Observer&& on_step) {
  return dopri5<N>(std::forward<Rhs>(f), t0, y0, t_end, cfg, std::forward<Observer>(on_step),
                   [](double, Vec<N>&) { return false; });
}

/// Root of g(t, seg.eval(t)) on [lo, hi] given a sign change, by bisection
/// to `tol` followed by a secant polish.
template <std::size_t N, class G>
double bisect_root(const DenseSegment<N>& seg, G&& g, double lo, double hi, double tol = 1e-13) {
  double glo = g(lo, seg.eval(lo));
  if (glo == 0.0) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid, seg.eval(mid));
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  const double ghi = g(hi, seg.eval(hi));
  double root = 0.5 * (lo + hi);
  if (ghi != glo) {
    const double sec = lo - glo * (hi - lo) / (ghi - glo);
    if (sec >= lo && sec <= hi) root = sec;
  }
  return root;
}

/// First (`last == false`) or last crossing of g(t, y(t)) through zero inside
/// `seg`, located by probing `probes` sub-intervals and bisecting on the dense
/// output.
template <std::size_t N, class G>
std::optional<double> find_crossing(const DenseSegment<N>& seg, G&& g, double tol = 1e-13, int probes = 4,
                                    bool last = false, double floor = 0.0) {
  constexpr int kMaxProbes = 16;
  probes = std::clamp(probes, 1, kMaxProbes);
  std::array<double, kMaxProbes + 1> ts{}, gs{};
  for (int k = 0; k <= probes; ++k) {
    ts[k] = (k == probes) ? seg.t_end() : seg.t0 + (seg.t_end() - seg.t0) * k / probes;
    gs[k] = g(ts[k], seg.eval(ts[k]));
  }
  // Sign flips of a function that never leaves the noise band are not crossings.
  if (floor > 0.0) {
    bool signal = false;
    for (int k = 0; k <= probes; ++k) signal = signal || std::abs(gs[k]) > floor;
    if (!signal) return std::nullopt;
  }
  auto changes = [&](int k) { return gs[k] == 0.0 || (gs[k] < 0.0) != (gs[k + 1] < 0.0); };
  if (!last) {
    if (gs[0] == 0.0) return ts[0];
    for (int k = 0; k < probes; ++k) {
      if (gs[k + 1] == 0.0 || (gs[k] < 0.0) != (gs[k + 1] < 0.0)) return bisect_root(seg, g, ts[k], ts[k + 1], tol);
    }
  } else {
    for (int k = probes - 1; k >= 0; --k) {
      if (changes(k) && gs[k + 1] != 0.0) return bisect_root(seg, g, ts[k], ts[k + 1], tol);
      if (gs[k + 1] == 0.0 && k + 1 < probes) return ts[k + 1];
    }
  }
  return std::nullopt;
}

}  // namespace dlambert
