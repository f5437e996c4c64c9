#pragma once

#include <vector>

#include "patchss/reaction.hpp"

namespace patchss {

enum class AnchorKind { ULine, VLine };

/// A family of orbits crossing a transversal segment, parameterized by energy.
///   Right/ULine: u0 in (K-, K+), E in (F+(u0), F+(K+)), time from (u0, v>0) to v = 0.
///   Right/VLine: v0 > 0,         E in (v0^2/2 + F+(K-), F+(K+)), from (u0(E), v0) to v = 0.
///   Left/ULine:  u0 in (K-, K+), E in (F-(u0), F-(K-)), from (alpha(E), 0) to u = u0.
///   Left/VLine:  v0 > 0,         E in (v0^2/2 + F-(K+), F-(K-)), from (alpha(E), 0) to v = v0.
struct TimeMapSpec {
  Side side;
  AnchorKind anchor;
  double value;  // u0 or v0
  double E_lo;
  double E_hi;
};

const char* anchor_name(AnchorKind a);

/// Validates the anchor against the potential's landmarks and computes the
/// admissible energy interval. Throws DomainError for anchors outside range
/// or an empty interval.
TimeMapSpec make_time_map_spec(const Potential& pot, AnchorKind anchor, double value);

struct TimeMapOptions {
  int initial_order = 64;
  int max_order = 8192;
  /// successive Gauss-Legendre estimates must agree to tol * max(1, T)
  double tol = 1e-10;
  /// relative margin (to the interval width) inside which E counts as degenerate
  double degenerate_margin = 1e-9;
  /// central-difference step relative to |E|
  double fd_relative_step = 1e-6;
};

/// T(E) through the substitutions r = h(u), r = sqrt(E - c) sin(theta), with
/// h = sqrt(F+) on the right and h = sqrt(G-) = sqrt(F- - F-(K+)) on the left.
double timemap_eval(const TimeMapSpec& spec, const Potential& pot, double E,
                    const TimeMapOptions& options = {});

/// Central difference of timemap_eval with relative step fd_relative_step.
double timemap_derivative(const TimeMapSpec& spec, const Potential& pot, double E,
                          const TimeMapOptions& options = {});

/// (g(x + step) - g(x - step)) / (2 step).
template <class G>
double central_difference(G&& g, double x, double step) {
  return (g(x + step) - g(x - step)) / (2.0 * step);
}

/// Lower endpoint u of the integration range and upper endpoint (orbit end)
/// for energy E, in increasing-u order: Right {u0 or u0(E), beta(E)};
/// Left {alpha(E), u0 or u0(E)}.
std::pair<double, double> timemap_u_range(const TimeMapSpec& spec, const Potential& pot, double E);

struct MonotonicitySample {
  double E;
  double T;
  double dTdE;
};

struct MonotonicityReport {
  std::vector<MonotonicitySample> samples;  // ascending E
  bool strictly_increasing = false;
  bool derivative_positive = false;
  double min_gap = 0.0;  // min over adjacent T differences
};

/// Samples T(E) and dT/dE at n Chebyshev-distributed interior energies.
MonotonicityReport monotonicity_scan(const TimeMapSpec& spec, const Potential& pot, int n,
                                     const TimeMapOptions& options = {}, int jobs = 1);

}  // namespace patchss
