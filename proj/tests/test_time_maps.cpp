#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "patchss/errors.hpp"
#include "patchss/flow.hpp"
#include "patchss/time_maps.hpp"

using namespace patchss;

namespace {

const PatchProblem& ref() {
  static const PatchProblem p = reference_problem();
  return p;
}

// Event time of the orbit family by the RK4 oracle, entirely in test code.
double ode_time(Side side, AnchorKind anchor, double value, double E) {
  const auto o = side == Side::Right ? oracle::right_reference() : oracle::left_reference();
  const oracle::Rk4 rk([&](double u) { return o.f(u); }, o.d);
  auto vzero = [](const oracle::State& y) { return y[1]; };
  if (side == Side::Right) {
    double u0 = value, v0;
    if (anchor == AnchorKind::ULine) {
      v0 = std::sqrt(2 * (E - o.F(u0)));
    } else {
      v0 = value;
      u0 = oracle::bisect([&](double u) { return o.F(u) - (E - 0.5 * v0 * v0); }, 0.0, o.K);
    }
    return rk.time_to_event({u0, v0}, vzero, 100.0);
  }
  const double alpha = oracle::bisect([&](double u) { return o.F(u) - E; }, o.K, 2.2);
  if (anchor == AnchorKind::ULine) {
    return rk.time_to_event({alpha, 0.0}, [&](const oracle::State& y) { return y[0] - value; },
                            100.0);
  }
  return rk.time_to_event({alpha, 0.0}, [&](const oracle::State& y) { return y[1] - value; },
                          100.0);
}

}  // namespace

TEST_CASE("admissible intervals") {
  const Potential right(ref(), Side::Right), left(ref(), Side::Left);
  const auto a = make_time_map_spec(right, AnchorKind::ULine, 1.1);
  CHECK(a.E_lo == doctest::Approx(right.value(1.1)));
  CHECK(a.E_hi == doctest::Approx(right.value(2.2)));
  const auto b = make_time_map_spec(right, AnchorKind::VLine, 0.4491);
  CHECK(b.E_lo == doctest::Approx(0.5 * 0.4491 * 0.4491 + right.value(1.0)));
  const auto c = make_time_map_spec(left, AnchorKind::ULine, 1.75);
  CHECK(c.E_lo == doctest::Approx(left.value(1.75)));
  CHECK(c.E_hi == doctest::Approx(left.value(1.0)));
  const auto d = make_time_map_spec(left, AnchorKind::VLine, 0.7348);
  CHECK(d.E_lo == doctest::Approx(0.5 * 0.7348 * 0.7348 + left.value(2.2)));
  CHECK(d.E_hi == doctest::Approx(left.value(1.0)));

  CHECK_THROWS_AS(make_time_map_spec(right, AnchorKind::ULine, 0.9), DomainError);
  CHECK_THROWS_AS(make_time_map_spec(right, AnchorKind::ULine, 2.2), DomainError);
  CHECK_THROWS_AS(make_time_map_spec(right, AnchorKind::VLine, -0.1), DomainError);
  CHECK_THROWS_AS(make_time_map_spec(right, AnchorKind::VLine, 0.9), DomainError);
  // v0 large enough that v0^2/2 + F+(K-) exceeds F+(K+)
  CHECK_THROWS_AS(make_time_map_spec(right, AnchorKind::VLine, 0.7), DomainError);
  CHECK_THROWS_AS(timemap_eval(a, right, a.E_lo - 0.01), DomainError);
  CHECK_THROWS_AS(timemap_eval(a, right, a.E_hi), DomainError);
  CHECK_THROWS_AS(timemap_eval(a, left, 0.5 * (a.E_lo + a.E_hi)), DomainError);
}

TEST_CASE("right u0 = 1.1 time map equals the flow transit time") {
  const Potential right(ref(), Side::Right);
  const auto spec = make_time_map_spec(right, AnchorKind::ULine, 1.1);
  const double E = right.value(1.8);
  const double T = timemap_eval(spec, right, E);
  CHECK(T > 0.0);
  const auto run = flow_until(right, make_state(right, 1.1, level_curve_v(right, E, 1.1)),
                              {EventKind::VZero}, 50.0, Direction::Forward);
  CHECK(std::abs(run.x_end - T) <= 1e-6);
  CHECK(run.final.u == doctest::Approx(1.8).epsilon(1e-9));
  const auto range = timemap_u_range(spec, right, E);
  CHECK(range.first == 1.1);
  CHECK(range.second == doctest::Approx(1.8).epsilon(1e-12));
}

TEST_CASE("theta form agrees with direct quadrature of the transit integral") {
  for (Side side : {Side::Left, Side::Right}) {
    const Potential pot(ref(), side);
    for (AnchorKind anchor : {AnchorKind::ULine, AnchorKind::VLine}) {
      const double value = side == Side::Right ? (anchor == AnchorKind::ULine ? 1.1 : 0.4491)
                                               : (anchor == AnchorKind::ULine ? 1.75 : 0.7348);
      const auto spec = make_time_map_spec(pot, anchor, value);
      for (double t : {0.1, 0.4, 0.7, 0.95}) {
        const double E = spec.E_lo + t * (spec.E_hi - spec.E_lo);
        const auto [a, b] = timemap_u_range(spec, pot, E);
        const double direct = transit_time_quadrature(pot, a, b, E);
        CHECK(std::abs(timemap_eval(spec, pot, E) - direct) <= 1e-8);
      }
    }
  }
}

TEST_CASE("time maps match the RK4 oracle on 20 random (anchor, E) pairs per variant") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Side side : {Side::Right, Side::Left}) {
    const Potential pot(ref(), side);
    for (AnchorKind anchor : {AnchorKind::ULine, AnchorKind::VLine}) {
      for (int i = 0; i < 20; ++i) {
        double value;
        if (anchor == AnchorKind::ULine) {
          value = 1.0 + 1.2 * (0.05 + 0.9 * unit(rng));
        } else if (side == Side::Right) {
          const double vmax = std::sqrt(2 * (pot.E_K_right() - pot.E_K_left()));
          value = vmax * (0.05 + 0.9 * unit(rng));
        } else {
          const double vmax = std::sqrt(2 * (pot.E_K_left() - pot.E_K_right()));
          value = vmax * (0.05 + 0.9 * unit(rng));
        }
        const auto spec = make_time_map_spec(pot, anchor, value);
        const double E = spec.E_lo + (spec.E_hi - spec.E_lo) * (0.01 + 0.98 * unit(rng));
        CAPTURE(side_name(side));
        CAPTURE(anchor_name(anchor));
        CAPTURE(value);
        CAPTURE(E);
        CHECK(std::abs(timemap_eval(spec, pot, E) - ode_time(side, anchor, value, E)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("time map near the lower end of the interval stays finite and continuous") {
  const Potential right(ref(), Side::Right);
  const auto spec = make_time_map_spec(right, AnchorKind::ULine, 1.1);
  double prev = -1.0;
  for (int k = 6; k >= 2; --k) {
    const double T = timemap_eval(spec, right, spec.E_lo + std::pow(10.0, -k));
    CHECK(std::isfinite(T));
    CHECK(T > prev);
    prev = T;
  }
  // T tends to zero as the chord degenerates
  CHECK(timemap_eval(spec, right, spec.E_lo + 1e-8) < 1e-2);
}

TEST_CASE("left time map increases between two energies") {
  const Potential left(ref(), Side::Left);
  const auto spec = make_time_map_spec(left, AnchorKind::ULine, 1.75);
  const double E1 = spec.E_lo + 0.3 * (spec.E_hi - spec.E_lo);
  const double E2 = spec.E_lo + 0.6 * (spec.E_hi - spec.E_lo);
  CHECK(timemap_eval(spec, left, E1) < timemap_eval(spec, left, E2));
}

TEST_CASE("time map derivative") {
  const Potential right(ref(), Side::Right);
  const auto spec = make_time_map_spec(right, AnchorKind::ULine, 1.1);
  const double E = 0.5 * (spec.E_lo + spec.E_hi);
  const double dT = timemap_derivative(spec, right, E);
  CHECK(dT > 0.0);
  // least-squares slope through 5 nearby samples
  const double h = 1e-3 * (spec.E_hi - spec.E_lo);
  double sxy = 0.0, sxx = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double T = timemap_eval(spec, right, E + k * h);
    sxy += k * h * T;
    sxx += k * h * k * h;
  }
  CHECK(std::abs(sxy / sxx - dT) <= 0.05 * std::abs(dT));
  CHECK(central_difference([](double) { return 3.0; }, 0.2, 1e-6) == 0.0);
  CHECK_THROWS_AS(timemap_derivative(spec, right, spec.E_lo + 1e-9), DomainError);
}

TEST_CASE("monotonicity scans") {
  const Potential right(ref(), Side::Right), left(ref(), Side::Left);
  const auto spec = make_time_map_spec(right, AnchorKind::ULine, 1.1);
  const auto small = monotonicity_scan(spec, right, 3);
  REQUIRE(small.samples.size() == 3);
  CHECK(small.samples[0].E < small.samples[1].E);
  CHECK(small.samples[1].E < small.samples[2].E);
  CHECK(small.samples[0].E > spec.E_lo);
  CHECK(small.samples[2].E < spec.E_hi);
  CHECK_THROWS_AS(monotonicity_scan(spec, right, 2), DomainError);

  const auto serial = monotonicity_scan(spec, right, 20, {}, 1);
  const auto parallel = monotonicity_scan(spec, right, 20, {}, 4);
  CHECK(serial.strictly_increasing);
  for (std::size_t i = 0; i < serial.samples.size(); ++i) {
    CHECK(serial.samples[i].E == parallel.samples[i].E);
    CHECK(serial.samples[i].T == parallel.samples[i].T);
  }
  const auto lv = make_time_map_spec(left, AnchorKind::VLine, 0.7348);
  const auto rep = monotonicity_scan(lv, left, 50, {}, 4);
  CHECK(rep.strictly_increasing);
  CHECK(rep.derivative_positive);
  CHECK(rep.min_gap > 0.0);
}
