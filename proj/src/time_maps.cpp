#include "patchss/time_maps.hpp"

#include <cmath>
#include <numbers>
#include <algorithm>
#include <limits>
#include <sstream>

#include "patchss/errors.hpp"
#include "patchss/parallel.hpp"
#include "patchss/quadrature.hpp"

namespace patchss {

namespace {

// Energy offset of the square-root substitution: 0 on the right (h = sqrt F+),
// F-(K+) on the left (h = sqrt G-).
double energy_offset(const Potential& pot) {
  return pot.side() == Side::Right ? 0.0 : pot.E_K_right();
}

Branch orbit_branch(const Potential& pot) {
  return pot.side() == Side::Right ? Branch::IncreasingOnZeroK : Branch::DecreasingPastK;
}

void check_energy(const TimeMapSpec& spec, double E, const TimeMapOptions& opt) {
  const double margin = opt.degenerate_margin * std::max(1.0, spec.E_hi - spec.E_lo);
  if (!(E > spec.E_lo + margin && E < spec.E_hi - margin)) {
    std::ostringstream os;
    os.precision(17);
    os << "time map energy " << E << " outside the admissible interval (" << spec.E_lo << ", "
       << spec.E_hi << ") or within the degenerate margin";
    throw DomainError(os.str());
  }
}

}  // namespace

const char* anchor_name(AnchorKind a) { return a == AnchorKind::ULine ? "u0" : "v0"; }

TimeMapSpec make_time_map_spec(const Potential& pot, AnchorKind anchor, double value) {
  const double Km = pot.K_left();
  const double Kp = pot.K_right();
  TimeMapSpec spec{pot.side(), anchor, value, 0.0, 0.0};
  if (anchor == AnchorKind::ULine) {
    if (!(value > Km && value < Kp)) {
      throw DomainError("u0 anchor must lie strictly between K_left and K_right");
    }
    spec.E_lo = pot.value(value);
    spec.E_hi = pot.side() == Side::Right ? pot.E_K_right() : pot.E_K_left();
  } else {
    if (!(value > 0.0)) throw DomainError("v0 anchor must be positive");
    if (pot.side() == Side::Right) {
      if (!(value < std::sqrt(2.0 * pot.E_K_right()))) {
        throw DomainError("v0 anchor must be below sqrt(2 F+(K+))");
      }
      spec.E_lo = 0.5 * value * value + pot.E_K_left();
      spec.E_hi = pot.E_K_right();
    } else {
      // F-_inf is replaced by F- at the blow-up search limit.
      const double F_inf = pot.value(pot.search_limit());
      if (!(value < std::sqrt(2.0 * (pot.E_K_left() - F_inf)))) {
        throw DomainError("v0 anchor must be below sqrt(2 (F-(K-) - F-_inf))");
      }
      spec.E_lo = 0.5 * value * value + pot.E_K_right();
      spec.E_hi = pot.E_K_left();
    }
  }
  if (!(spec.E_lo < spec.E_hi)) {
    throw DomainError("time map anchor leaves an empty energy interval");
  }
  return spec;
}

double timemap_eval(const TimeMapSpec& spec, const Potential& pot, double E,
                    const TimeMapOptions& opt) {
  if (spec.side != pot.side()) throw DomainError("time map spec and potential sides differ");
  check_energy(spec, E, opt);
  const double c = energy_offset(pot);
  const double Ebar = E - c;
  const double anchor_energy = spec.anchor == AnchorKind::ULine
                                   ? pot.value(spec.value) - c
                                   : E - 0.5 * spec.value * spec.value - c;
  const double ratio = std::clamp(anchor_energy / Ebar, 0.0, 1.0);
  const double phi = std::asin(std::sqrt(ratio));
  const double root_E = std::sqrt(Ebar);
  const Branch branch = orbit_branch(pot);

  // 1/|h'(h^-1(r))| with r = sqrt(Ebar) sin(theta); h' = F'/(2h) and h = r.
  auto integrand = [&](double theta) {
    const double r = root_E * std::sin(theta);
    const double u = pot.invert(c + r * r, branch);
    const double slope = std::abs(pot.derivative(u, 1));
    if (!(slope > 0.0)) {
      throw NumericError("timemap_eval: h' vanished inside the integration range");
    }
    return 2.0 * r / slope;
  };

  int order = opt.initial_order;
  double prev = quad::gauss_legendre_integrate(integrand, phi, 0.5 * std::numbers::pi, order);
  while (true) {
    order *= 2;
    const double next = quad::gauss_legendre_integrate(integrand, phi, 0.5 * std::numbers::pi, order);
    const double diff = std::abs(next - prev);
    if (diff <= opt.tol * std::max(1.0, std::abs(next))) return next / std::numbers::sqrt2;
    if (order >= opt.max_order) {
      throw NumericError("timemap_eval: Gauss-Legendre estimates did not settle", diff);
    }
    prev = next;
  }
}

double timemap_derivative(const TimeMapSpec& spec, const Potential& pot, double E,
                          const TimeMapOptions& opt) {
  const double width = spec.E_hi - spec.E_lo;
  const double step = opt.fd_relative_step * std::max(std::abs(E), width);
  if (E - 2.0 * step <= spec.E_lo || E + 2.0 * step >= spec.E_hi) {
    throw DomainError("timemap_derivative: energy closer than two steps to the interval ends");
  }
  return central_difference([&](double e) { return timemap_eval(spec, pot, e, opt); }, E, step);
}

std::pair<double, double> timemap_u_range(const TimeMapSpec& spec, const Potential& pot,
                                          double E) {
  const Branch branch = orbit_branch(pot);
  const double orbit_end = pot.invert(E, branch);
  const double anchor_u = spec.anchor == AnchorKind::ULine
                              ? spec.value
                              : pot.invert(E - 0.5 * spec.value * spec.value, branch);
  if (spec.side == Side::Right) return {anchor_u, orbit_end};
  return {orbit_end, anchor_u};
}

MonotonicityReport monotonicity_scan(const TimeMapSpec& spec, const Potential& pot, int n,
                                     const TimeMapOptions& opt, int jobs) {
  if (n < 3) throw DomainError("monotonicity_scan needs at least 3 samples");
  const double mid = 0.5 * (spec.E_lo + spec.E_hi);
  const double half = 0.5 * (spec.E_hi - spec.E_lo);
  std::vector<double> energies(n);
  for (int k = 0; k < n; ++k) {
    // ascending order: k = 0 takes the node nearest E_lo
    energies[k] = mid - half * std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * n));
  }
  auto samples = parallel_map(energies.size(), jobs, [&](std::size_t i) {
    const double E = energies[i];
    try {
      return MonotonicitySample{E, timemap_eval(spec, pot, E, opt),
                                timemap_derivative(spec, pot, E, opt)};
    } catch (const std::exception& ex) {
      std::ostringstream os;
      os.precision(17);
      os << "time map scan failed at E = " << E << ": " << ex.what();
      throw NumericError(os.str());
    }
  });
  MonotonicityReport report;
  report.samples = std::move(samples);
  report.strictly_increasing = true;
  report.derivative_positive = true;
  report.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    if (!(report.samples[i].dTdE > 0.0)) report.derivative_positive = false;
    if (i == 0) continue;
    const double gap = report.samples[i].T - report.samples[i - 1].T;
    report.min_gap = std::min(report.min_gap, gap);
    if (!(gap > 0.0)) report.strictly_increasing = false;
  }
  return report;
}

}  // namespace patchss
