#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "patchss/audit.hpp"
#include "patchss/errors.hpp"

using namespace patchss;

namespace {

PatchProblem richards_problem(double K_left, double p_right, double p_left = 1.0) {
  return PatchProblem(ReactionSpec::richards(1.0, K_left, p_left),
                      ReactionSpec::richards(1.0, 2.2, p_right), 1.2, 2.0, 1.0349, 1.1671);
}

}  // namespace

TEST_CASE("sqrt-curvature identity against finite differences") {
  const PatchProblem ref = reference_problem();
  const Potential plus(ref, Side::Right);
  std::mt19937_64 rng(17);
  const double eps = 1e-3;
  std::uniform_real_distribution<double> U(1.0 + eps, 2.2 - eps);
  for (int i = 0; i < 200; ++i) {
    const double u = U(rng);
    const double fd = oracle::d2([&](double x) { return std::sqrt(plus.value(x)); }, u, 1e-3);
    const double id = sqrt_curvature(plus.value(u), plus.derivative(u, 1), plus.derivative(u, 2));
    CHECK(oracle::rel_diff(id, fd) <= 1e-5);
  }
}

TEST_CASE("3h''^2 - h'h''' identity and the quotient curvature") {
  const PatchProblem ref = reference_problem();
  for (Side side : {Side::Right, Side::Left}) {
    const Potential pot(ref, side);
    const double shift = side == Side::Left ? pot.E_K_right() : 0.0;
    auto F = [&](double x) { return pot.value(x) - shift; };
    auto h = [&](double x) { return std::sqrt(F(x)); };
    std::mt19937_64 rng(23);
    // on the left h vanishes at K+, so the margin there is wider
    std::uniform_real_distribution<double> U(1.05, side == Side::Left ? 2.05 : 2.15);
    for (int i = 0; i < 200; ++i) {
      const double u = U(rng);
      const double hp = oracle::d1(h, u, 1e-3), hpp = oracle::d2(h, u, 1e-3),
                   hppp = oracle::d3(h, u, 2e-3);
      const double fd = 3 * hpp * hpp - hp * hppp;
      const double id = h_combination(F(u), pot.derivative(u, 1), pot.derivative(u, 2),
                                      pot.derivative(u, 3));
      CAPTURE(u);
      CHECK(std::abs(id - fd) <= 1e-5 * std::max(std::abs(fd), 1e-3));
      // the quotient itself, differenced away from the F' = 0 ends
      auto q = [&](double x) {
        const double d = pot.derivative(x, 1);
        return F(x) / (d * d);
      };
      const double qfd = oracle::d2(q, u, 1e-3);
      const double qid = quotient_curvature(F(u), pot.derivative(u, 1), pot.derivative(u, 2),
                                            pot.derivative(u, 3));
      CHECK(std::abs(qid - qfd) <= 1e-5 * std::max(std::abs(qfd), 1.0));
    }
  }
}

TEST_CASE("Q definition and factorization agree") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> Z(0.0, 1.0);
  for (double p : {0.25, 0.5, 0.9, 1.0, 1.5, 2.0, 5.0}) {
    for (int i = 0; i < 100; ++i) {
      const double z = Z(rng);
      CHECK(std::abs(richards_Q_definition(p, z) - richards_Q_factorized(p, z)) <= 1e-12);
    }
  }
  CHECK(richards_Q_factorized(2.0, 1.0) == doctest::Approx(-1.0));
}

TEST_CASE("closed-form Richards audit") {
  for (double p : {1.0, 1.5, 2.0, 5.0}) {
    CAPTURE(p);
    const auto a = richards_closed_form_audit(p);
    CHECK(a.C1plus == Verdict::Pass);
    CHECK(a.C2plus == Verdict::Pass);
    CHECK_FALSE(a.P_sign_change);
    CHECK(a.R_prime_min > 0.0);
    CHECK(a.R_doubleprime_min > 0.0);
    CHECK(a.Q_identity_gap <= 1e-12);
    CHECK(std::abs(a.P_at_zero - (p * p - 1)) <= 1e-9);
    CHECK(std::abs(a.P_at_one - 3 * p * p) <= 1e-9);
    // g(u) = (u/K)^p is convex on (0, K) for p >= 1
    for (double u : {0.1, 0.5, 1.0, 2.0}) {
      CHECK(oracle::d2([&](double x) { return std::pow(x / 2.2, p); }, u, 1e-3) >= -1e-9);
    }
  }
  for (double p : {0.25, 0.5, 0.9}) {
    CAPTURE(p);
    const auto a = richards_closed_form_audit(p);
    CHECK(a.C1plus == Verdict::Pass);
    CHECK(a.C2plus == Verdict::Fail);
    CHECK(a.P_sign_change);
    CHECK(a.P_at_zero < -1e-9);
    CHECK(a.P_at_one > 1e-9);
  }
  CHECK(richards_P(0.5, 0.0) == doctest::Approx(-0.75));
  CHECK(richards_P(0.5, 1.0) == doctest::Approx(0.75));
  CHECK(richards_P(1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(richards_closed_form_audit(0.0), DomainError);
  CHECK_THROWS_AS(richards_closed_form_audit(1.0, 8), DomainError);
}

TEST_CASE("the sign of (F/F'^2)'' follows P at z = (u/K)^p") {
  for (double p : {0.5, 0.9, 2.0}) {
    const PatchProblem prob = richards_problem(0.02, p);
    const Potential plus(prob, Side::Right);
    for (int i = 1; i < 60; ++i) {
      const double u = 2.2 * i / 61.0;
      const double z = std::pow(u / 2.2, p);
      const double P = richards_P(p, z);
      if (std::abs(P) < 1e-3) continue;
      const double q = quotient_curvature(plus.value(u), plus.derivative(u, 1),
                                          plus.derivative(u, 2), plus.derivative(u, 3));
      CAPTURE(p);
      CAPTURE(u);
      CHECK((q > 0) == (P > 0));
    }
  }
}

TEST_CASE("grid audits on the reference problem") {
  const PatchProblem ref = reference_problem();
  for (Condition c : {Condition::SA, Condition::Mminus, Condition::C1plus, Condition::C2plus,
                      Condition::C1minus, Condition::C2minus}) {
    const auto rep = check_condition(ref, c, 256);
    CAPTURE(condition_name(c));
    CHECK(rep.verdict == Verdict::Pass);
  }
  CHECK(check_condition(ref, Condition::Mminus).evidence == "closed-form");
  CHECK(check_condition(ref, Condition::C1plus).evidence == "closed-form");
  CHECK(check_condition(ref, Condition::C1minus).evidence == "grid-consistent");
  const auto c2 = check_condition(ref, Condition::C2plus);
  CHECK(c2.note.find("excluded band") != std::string::npos);
  const auto summary = audit_problem(ref);
  CHECK(summary.certified);
  CHECK(summary.route == "M-,C1+,C2+");
  CHECK_THROWS_AS(check_condition(ref, Condition::C1plus, 8), DomainError);
}

TEST_CASE("C2+ fails for p < 1 when K- is small") {
  for (auto [p, Km] : {std::pair{0.25, 0.1}, std::pair{0.5, 0.1}, std::pair{0.9, 0.02}}) {
    CAPTURE(p);
    const PatchProblem prob = richards_problem(Km, p);
    const auto rep = check_condition(prob, Condition::C2plus);
    CHECK(rep.verdict == Verdict::Fail);
    REQUIRE_FALSE(rep.witnesses.empty());
    for (const auto& w : rep.witnesses) {
      CHECK(w.value < -1e-9);
      CHECK(w.u / 2.2 < 0.1);
    }
    CHECK(check_condition(prob, Condition::C1plus).verdict == Verdict::Pass);
    CHECK_FALSE(audit_problem(prob).certified);
  }
  // With K- = 1 the sign change of P lies below K-, so the grid passes while
  // the closed-form audit notes the failure for other K-.
  const auto rep = check_condition(richards_problem(1.0, 0.5), Condition::C2plus);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.evidence == "grid-consistent");
  CHECK(rep.note.find("closed-form audit") != std::string::npos);
}

TEST_CASE("grid and closed-form verdicts agree for p >= 1 and small-K- p < 1") {
  for (double p : {0.25, 0.5, 1.0, 1.5, 2.0, 5.0}) {
    const PatchProblem prob = richards_problem(0.05, p);
    const auto closed = richards_closed_form_audit(p);
    CAPTURE(p);
    CHECK(check_condition(prob, Condition::C1plus).verdict == closed.C1plus);
    CHECK(check_condition(prob, Condition::C2plus).verdict == closed.C2plus);
  }
}

TEST_CASE("M- fails when f-' changes sign on [K-, K+]") {
  // f = u (1 - u) exp(-3 (u - 1)) satisfies SA, but f' > 0 for u > (5 + sqrt 13) / 6.
  const auto left = ReactionSpec::custom(
      [](double u) { return u * (1.0 - u) * std::exp(-3.0 * (u - 1.0)); }, 1.0);
  const PatchProblem prob(left, ReactionSpec::richards(1.0, 2.2, 1.0), 1.2, 2.0, 1.0349, 1.1671);
  const auto m = check_condition(prob, Condition::Mminus);
  CHECK(m.verdict == Verdict::Fail);
  CHECK(m.evidence == "grid-consistent");
  for (const auto& w : m.witnesses) CHECK(w.u > (5.0 + std::sqrt(13.0)) / 6.0 - 1e-9);
  const auto summary = audit_problem(prob);
  if (summary.certified) CHECK(summary.route == "C1-,C2-,C1+,C2+");
}
