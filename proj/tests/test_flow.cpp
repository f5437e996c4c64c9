#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "patchss/errors.hpp"
#include "patchss/flow.hpp"

using namespace patchss;

namespace {

const PatchProblem& ref() {
  static const PatchProblem p = reference_problem();
  return p;
}

}  // namespace

TEST_CASE("equilibria are fixed by the flow") {
  const Potential left(ref(), Side::Left), right(ref(), Side::Right);
  for (double dur : {0.1, 1.0349, 5.0}) {
    const auto a = flow(left, make_state(left, 1.0, 0.0), dur, Direction::Forward);
    CHECK(a.final.u == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(a.final.v) <= 1e-14);
    const auto b = flow(right, make_state(right, 2.2, 0.0), dur, Direction::Backward);
    CHECK(b.final.u == doctest::Approx(2.2).epsilon(1e-14));
    CHECK(std::abs(b.final.v) <= 1e-14);
  }
}

TEST_CASE("flow matches a fixed-step RK4 oracle") {
  const Potential left(ref(), Side::Left), right(ref(), Side::Right);
  const auto ol = oracle::left_reference();
  const auto orr = oracle::right_reference();
  const auto a = flow(ref(), Side::Left, make_state(left, 1.3, 0.0), oracle::kLeftLength,
                      Direction::Forward);
  const auto oa = oracle::Rk4([&](double u) { return ol.f(u); }, ol.d)
                      .run({1.3, 0.0}, oracle::kLeftLength);
  CHECK(a.terminated == Termination::Completed);
  CHECK(a.final.u > 1.3);
  CHECK(a.final.v > 0.0);
  CHECK(std::abs(a.final.u - oa[0]) <= 1e-9);
  CHECK(std::abs(a.final.v - oa[1]) <= 1e-9);

  const auto b = flow(right, make_state(right, 1.9, 0.0), oracle::kRightLength,
                      Direction::Backward);
  const auto ob = oracle::Rk4([&](double u) { return orr.f(u); }, orr.d, -1.0)
                      .run({1.9, 0.0}, oracle::kRightLength);
  CHECK(b.final.u < 1.9);
  CHECK(b.final.v > 0.0);
  CHECK(std::abs(b.final.u - ob[0]) <= 1e-9);
  CHECK(std::abs(b.final.v - ob[1]) <= 1e-9);
}

TEST_CASE("trajectory bookkeeping and dense output") {
  const Potential left(ref(), Side::Left);
  FlowOptions opt;
  opt.x_start = -oracle::kLeftLength;
  const auto run = flow(left, make_state(left, 1.5, 0.0), oracle::kLeftLength, Direction::Forward, opt);
  REQUIRE(run.trajectory.size() >= 3);
  for (std::size_t i = 1; i < run.trajectory.size(); ++i) {
    CHECK(run.trajectory[i].x > run.trajectory[i - 1].x);
  }
  CHECK(run.trajectory.front().x == doctest::Approx(-oracle::kLeftLength));
  CHECK(run.x_end == doctest::Approx(0.0).epsilon(1e-14));
  const auto o = oracle::left_reference();
  const oracle::Rk4 rk([&](double u) { return o.f(u); }, o.d);
  for (double frac : {0.13, 0.5, 0.77}) {
    const double x = -oracle::kLeftLength * (1.0 - frac);
    const auto s = run.dense.state(x);
    const auto e = rk.run({1.5, 0.0}, oracle::kLeftLength * frac);
    CHECK(std::abs(s[0] - e[0]) <= 1e-9);
    CHECK(std::abs(s[1] - e[1]) <= 1e-9);
    // slope of the interpolant equals the vector field
    const auto ds = run.dense.slope(x);
    CHECK(std::abs(ds[0] - s[1]) <= 1e-7);
    CHECK(std::abs(ds[1] + o.f(s[0]) / o.d) <= 1e-6);
  }
}

TEST_CASE("energy conservation and time reversal") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(1.0, 2.2), V(-0.5, 0.5);
  int bounded = 0;
  for (Side side : {Side::Left, Side::Right}) {
    const Potential pot(ref(), side);
    for (int i = 0; i < 25; ++i) {
      const PhaseState s0 = make_state(pot, U(rng), V(rng));
      const double dur = 2.2018;  // L- + L+
      const auto fw = flow(pot, s0, dur, Direction::Forward);
      // Orbits running off toward blow-up carry kinetic and potential terms
      // far larger than E; the drift bound scales with the largest of them.
      double scale = std::max(1.0, std::abs(s0.E));
      for (const auto& t : fw.trajectory) scale = std::max(scale, 0.5 * t.v * t.v);
      CHECK(fw.energy_drift <= 1e-8 * scale);
      if (fw.terminated != Termination::Completed) continue;
      const auto bw = flow(pot, fw.final, dur, Direction::Backward);
      CHECK(bw.energy_drift <= 1e-8 * scale);
      CHECK(std::abs(bw.final.u - s0.u) <= 1e-8 * scale);
      CHECK(std::abs(bw.final.v - s0.v) <= 1e-8 * scale);
      if (scale == std::max(1.0, std::abs(s0.E))) ++bounded;
    }
  }
  CHECK(bounded >= 25);
}

TEST_CASE("left half-plane and blow-up terminations") {
  const Potential left(ref(), Side::Left), right(ref(), Side::Right);
  const auto a = flow(right, make_state(right, 0.5, -2.0), 5.0, Direction::Forward);
  CHECK(a.terminated == Termination::LeftHalfPlane);
  CHECK(std::abs(a.final.u) <= 1e-9);
  CHECK(a.x_end > 0.0);
  CHECK(a.x_end < 5.0);
  // oracle crossing position
  const auto o = oracle::right_reference();
  const double xc = oracle::Rk4([&](double u) { return o.f(u); }, o.d)
                        .time_to_event({0.5, -2.0}, [](const oracle::State& y) { return y[0]; }, 5.0);
  CHECK(a.x_end == doctest::Approx(xc).epsilon(1e-8));

  const auto b = flow(left, make_state(left, 3.0, 0.0), 50.0, Direction::Forward);
  CHECK(b.terminated == Termination::BlowUpGuard);
  CHECK(b.x_end < 50.0);
}

TEST_CASE("level curves") {
  const Potential right(ref(), Side::Right);
  CHECK(level_curve_v(right, right.value(1.3), 1.3) == 0.0);
  CHECK(level_curve_v(right, right.E_K_right(), 0.0) ==
        doctest::Approx(std::sqrt(2 * 0.4033333333333333)).epsilon(1e-12));
  CHECK(level_curve_v(right, right.E_K_right(), 0.0) == doctest::Approx(0.898146).epsilon(1e-6));
  CHECK(level_curve_v(right, right.value(0.7) + 0.5, 0.7) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(level_curve_v(right, right.value(1.0) - 1e-6, 1.0), DomainError);
  CHECK(level_curve_v(right, right.value(1.0) - 1e-13, 1.0) == 0.0);
  // reflection symmetry: (u, v) and (u, -v) sweep the same u-range
  const PhaseState up = make_state(right, 1.2, 0.3), down = make_state(right, 1.2, -0.3);
  const auto ru = flow_until(right, up, {EventKind::VZero}, 10.0, Direction::Forward);
  const auto rd = flow_until(right, down, {EventKind::VZero}, 10.0, Direction::Backward);
  CHECK(ru.final.u == doctest::Approx(rd.final.u).epsilon(1e-10));
}

TEST_CASE("transit time quadrature against independent oracles") {
  const Potential right(ref(), Side::Right);
  const auto o = oracle::right_reference();
  CHECK(transit_time_quadrature(right, 1.4, 1.4, 0.3) == 0.0);

  const double E = o.F(2.0);
  const double T = transit_time_quadrature(right, 1.1, 2.0, E);
  CHECK(T > 0.0);
  // Flow from (1.1, +v) to v = 0 in the library and in the RK4 oracle.
  const PhaseState s0 = make_state(right, 1.1, level_curve_v(right, E, 1.1));
  const auto run = flow_until(right, s0, {EventKind::VZero}, 20.0, Direction::Forward);
  REQUIRE(run.terminated == Termination::Event);
  CHECK(std::abs(run.x_end - T) <= 1e-6);
  const double xo = oracle::Rk4([&](double u) { return o.f(u); }, o.d)
                        .time_to_event({1.1, std::sqrt(2 * (E - o.F(1.1)))},
                                       [](const oracle::State& y) { return y[1]; }, 20.0);
  CHECK(std::abs(xo - T) <= 1e-6);

  // Doubling d halves F and energies, so times scale by sqrt(2).
  const auto spec = ReactionSpec::richards(1.0, 2.2, 1.0);
  const Potential doubled(spec, 4.0, 1.0, 2.2, Side::Right);
  const double T2 = transit_time_quadrature(doubled, 1.1, 2.0, 0.5 * E);
  CHECK(T2 == doctest::Approx(std::sqrt(2.0) * T).epsilon(1e-9));

  // interior turning point: orbit does not traverse
  CHECK_THROWS_AS(transit_time_quadrature(right, 0.5, 2.0, o.F(1.5)), DomainError);
}

TEST_CASE("transit times agree with flow events on 20 random right-side pairs") {
  const Potential right(ref(), Side::Right);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(1.05, 2.1), W(0.05, 0.95);
  for (int i = 0; i < 20; ++i) {
    const double u0 = U(rng);
    const double b = u0 + (2.2 - u0) * W(rng);
    const double E = right.value(b);
    const double T = transit_time_quadrature(right, u0, b, E);
    const auto run = flow_until(right, make_state(right, u0, level_curve_v(right, E, u0)),
                                {EventKind::VZero}, 50.0, Direction::Forward);
    REQUIRE(run.terminated == Termination::Event);
    CHECK(std::abs(run.x_end - T) <= 1e-6);
    CHECK(run.final.u == doctest::Approx(b).epsilon(1e-8));
  }
}
