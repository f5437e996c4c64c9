#include <cmath>

#include "doctest.h"
#include "patchss/errors.hpp"
#include "patchss/fd_validator.hpp"

using namespace patchss;

namespace {

const PatchProblem& ref() {
  static const PatchProblem p = reference_problem();
  return p;
}

const SteadyStateSolution& shooting() {
  static const SteadyStateSolution s = solve_steady_state(ref());
  return s;
}

}  // namespace

TEST_CASE("constant root with equal carrying capacities") {
  const auto f = ReactionSpec::richards(1.0, 1.5, 1.0);
  const PatchCoefficients c{f, f, 1.0, 2.0, 1.0, 1.0};
  const auto sol = fd_steady_solve(c, {32, 32}, FdInit::constant_value(1.5));
  CHECK(sol.iterations == 0);
  CHECK(sol.residual == 0.0);
  for (double u : sol.u) CHECK(u == 1.5);
  // a constant profile is flagged as non-increasing
  CHECK_FALSE(sol.increasing);
}

TEST_CASE("reference problem from the shooting profile") {
  const auto fd = fd_steady_solve(ref(), {256, 256}, FdInit::from_shooting(shooting()));
  CHECK(fd.iterations <= 10);
  CHECK(fd.residual <= 1e-10);
  CHECK(fd.flags.empty());
  CHECK(fd.u.front() > 1.0);
  CHECK(fd.u.back() < 2.2);
  CHECK(fd.x[fd.interface_node()] == 0.0);
  const auto cmp = compare_solutions(fd, shooting());
  const double h = 1.1671 / 256;
  CHECK(cmp.linf <= 1.0 * h * h);
  CHECK(cmp.l2 <= cmp.linf * std::sqrt(2.2018));
  CHECK(cmp.interface_flux <= 1e-4);
}

TEST_CASE("linear start reaches the same discrete solution") {
  const auto a = fd_steady_solve(ref(), {128, 128}, FdInit::from_shooting(shooting()));
  const auto b = fd_steady_solve(ref(), {128, 128}, FdInit::linear());
  double diff = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) diff = std::max(diff, std::abs(a.u[i] - b.u[i]));
  CHECK(diff <= 1e-6);
}

TEST_CASE("multi-start agreement") {
  const std::vector<FdInit> inits = {FdInit::from_shooting(shooting()), FdInit::linear(),
                                     FdInit::constant_value(1.2), FdInit::constant_value(1.6),
                                     FdInit::constant_value(2.0)};
  const auto sols = fd_multistart(ref().coefficients(), {128, 128}, inits, {}, 4);
  REQUIRE(sols.size() == 5);
  for (const auto& s : sols) {
    CHECK(s.flags.empty());
    double diff = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) diff = std::max(diff, std::abs(s.u[i] - sols[0].u[i]));
    CHECK(diff <= 1e-6);
  }
}

TEST_CASE("second-order convergence") {
  double prev = 0.0;
  for (int n : {128, 256, 512}) {
    const auto fd = fd_steady_solve(ref(), {n, n}, FdInit::from_shooting(shooting()));
    const double e = compare_solutions(fd, shooting()).linf;
    if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.9);
    prev = e;
  }
}

TEST_CASE("comparison metrics") {
  auto fd = fd_steady_solve(ref(), {64, 64}, FdInit::from_shooting(shooting()));
  for (std::size_t i = 0; i < fd.u.size(); ++i) fd.u[i] = shooting().evaluate(fd.x[i]);
  const auto zero = compare_solutions(fd, shooting());
  CHECK(zero.linf == 0.0);
  CHECK(zero.l2 == 0.0);
  // localized bump of height 1e-3
  for (std::size_t i = 0; i < fd.u.size(); ++i) {
    fd.u[i] += 1e-3 * std::exp(-std::pow((fd.x[i] - 0.3) / 0.05, 2));
  }
  CHECK(compare_solutions(fd, shooting()).linf == doctest::Approx(1e-3).epsilon(0.02));

  const auto other = fd_steady_solve(ref().with_lengths(1.0, 1.1671), {64, 64}, FdInit::linear());
  CHECK_THROWS_AS(compare_solutions(other, shooting()), DomainError);
}

TEST_CASE("errors and flags") {
  CHECK_THROWS_AS(fd_steady_solve(ref(), {8, 64}, FdInit::linear()), DomainError);
  FdOptions one;
  one.max_iterations = 1;
  try {
    fd_steady_solve(ref(), {64, 64}, FdInit::constant_value(0.3), one);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("residual history") != std::string::npos);
    CHECK(e.achieved() > 1e-10);
  }
  // u = 0 is a root of the discrete system: reported, not hidden
  const auto zero = fd_steady_solve(ref(), {32, 32}, FdInit::constant_value(0.0));
  CHECK_FALSE(zero.positive);
  CHECK(zero.flags.size() == 2);
}
