#pragma once

#include <functional>
#include <span>
#include <vector>

namespace patchss::quad {

struct Estimate {
  double value;
  double error;
  int evaluations;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration. Subdivides the interval
/// with the largest error estimate until the summed estimate drops below
/// max(abs_tol, rel_tol*|value|). Throws NumericError (carrying the achieved
/// error) when the subdivision limit is hit first.
Estimate adaptive_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                double abs_tol, double rel_tol = 0.0, int max_intervals = 4000);

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached, thread-safe; the returned reference stays valid for the program lifetime.
const GaussLegendreRule& gauss_legendre(int order);

/// Applies an n-point Gauss-Legendre rule on [a, b].
double gauss_legendre_integrate(const std::function<double(double)>& f, double a, double b,
                                int order);

}  // namespace patchss::quad
