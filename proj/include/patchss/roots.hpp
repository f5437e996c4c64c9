#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "patchss/errors.hpp"

namespace patchss::roots {

struct Root {
  double x;
  int iterations;
};

/// Bisection on [lo, hi]. `g` must change sign over the bracket; a sign is
/// all that is needed, so g may return +-inf for "far above"/"far below".
template <class G>
Root bisect(G&& g, double lo, double hi, double x_tol, int max_iter = 200) {
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (g_lo == 0.0) return {lo, 0};
  if (g_hi == 0.0) return {hi, 0};
  if (std::signbit(g_lo) == std::signbit(g_hi)) {
    throw BracketError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  int it = 0;
  while (hi - lo > x_tol && it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = g(mid);
    ++it;
    if (g_mid == 0.0) return {mid, it};
    if (std::signbit(g_mid) == std::signbit(g_lo)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), it};
}

/// Newton iteration kept inside a shrinking bracket; falls back to bisection
/// whenever the Newton step leaves the bracket or the derivative vanishes.
/// `gd(x)` returns the pair {g(x), g'(x)}.
template <class GD>
Root safeguarded_newton(GD&& gd, double lo, double hi, double x_tol, int max_iter = 200) {
  auto [g_lo, d_lo] = gd(lo);
  auto [g_hi, d_hi] = gd(hi);
  (void)d_lo;
  (void)d_hi;
  if (g_lo == 0.0) return {lo, 0};
  if (g_hi == 0.0) return {hi, 0};
  if (std::signbit(g_lo) == std::signbit(g_hi)) {
    throw BracketError("safeguarded_newton: no sign change on [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]");
  }
  const bool increasing = g_hi > 0.0;
  double x = 0.5 * (lo + hi);
  for (int it = 1; it <= max_iter; ++it) {
    auto [gx, dx] = gd(x);
    if (gx == 0.0) return {x, it};
    if ((gx > 0.0) == increasing) {
      hi = x;
    } else {
      lo = x;
    }
    double next = (dx != 0.0 && std::isfinite(dx)) ? x - gx / dx
                                                   : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= x_tol || hi - lo <= x_tol) return {x, it};
  }
  return {x, max_iter};
}

}  // namespace patchss::roots
