#include "patchss/audit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "patchss/errors.hpp"
#include "patchss/kernels.hpp"

namespace patchss {

namespace {

// Condition holds <=> measure(u) <= 0 (strictly < 0 for M-).
struct Probe {
  std::function<double(double)> measure;
  double a;
  double b;
  bool closed;   // include the endpoints (M- is stated on [K-, K+])
  bool strict;
  std::string note;
};

std::vector<double> chebyshev_grid(double a, double b, int n, bool closed) {
  std::vector<double> nodes(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int k = 0; k < n; ++k) {
    const double t = closed ? std::cos(std::numbers::pi * k / (n - 1))
                            : std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * n));
    nodes[n - 1 - k] = mid + half * t;
  }
  if (closed) {
    nodes.front() = a;
    nodes.back() = b;
  }
  return nodes;
}

ConditionReport run_probe(Condition condition, const Probe& probe, int grid_size) {
  ConditionReport report;
  report.condition = condition;
  report.note = probe.note;
  std::vector<double> us = chebyshev_grid(probe.a, probe.b, grid_size, probe.closed);

  std::vector<Witness> samples;
  samples.reserve(us.size());
  try {
    for (double u : us) samples.push_back({u, probe.measure(u)});
    // Refine around near-violations.
    std::vector<Witness> extra;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (std::abs(samples[i].value) >= 1e-6) continue;
      const double lo = i > 0 ? samples[i - 1].u : probe.a;
      const double hi = i + 1 < samples.size() ? samples[i + 1].u : probe.b;
      for (int j = 1; j <= 16; ++j) {
        const double u = lo + (hi - lo) * j / 17.0;
        extra.push_back({u, probe.measure(u)});
      }
    }
    samples.insert(samples.end(), extra.begin(), extra.end());
  } catch (const std::exception& ex) {
    report.verdict = Verdict::Inconclusive;
    report.note = std::string("derivative evaluation failed: ") + ex.what();
    return report;
  }
  std::sort(samples.begin(), samples.end(),
            [](const Witness& x, const Witness& y) { return x.u < y.u; });

  std::ostringstream grid;
  grid.precision(17);
  grid << (probe.closed ? "chebyshev-lobatto" : "chebyshev") << " n=" << grid_size
       << " on [" << probe.a << ", " << probe.b << "]";
  if (samples.size() > us.size()) grid << " + " << samples.size() - us.size() << " refinement points";
  report.grid = grid.str();

  const auto worst = std::max_element(samples.begin(), samples.end(),
                                      [](const Witness& x, const Witness& y) {
                                        return x.value < y.value ||
                                               (std::isnan(x.value) && !std::isnan(y.value));
                                      });
  bool any_nan = false;
  for (const auto& s : samples) {
    if (!std::isfinite(s.value)) any_nan = true;
    if (s.value > kAuditTolerance) report.witnesses.push_back(s);
  }
  if (!report.witnesses.empty()) {
    report.verdict = Verdict::Fail;
  } else if (any_nan) {
    report.verdict = Verdict::Inconclusive;
    report.note += (report.note.empty() ? "" : "; ") + std::string("non-finite samples");
  } else if (probe.strict && worst->value >= -kAuditTolerance) {
    report.verdict = Verdict::Inconclusive;
    report.witnesses.push_back(*worst);
    report.note += (report.note.empty() ? "" : "; ") +
                   std::string("strict inequality within tolerance of zero");
  } else {
    report.verdict = Verdict::Pass;
    report.witnesses.push_back(*worst);
  }
  report.samples = std::move(samples);
  return report;
}

}  // namespace

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::SA: return "SA";
    case Condition::Mminus: return "M-";
    case Condition::C1plus: return "C1+";
    case Condition::C2plus: return "C2+";
    case Condition::C1minus: return "C1-";
    case Condition::C2minus: return "C2-";
  }
  return "?";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

double sqrt_curvature(double F, double F1, double F2) {
  return (2.0 * F * F2 - F1 * F1) / (4.0 * std::pow(F, 1.5));
}

double h_combination(double F, double F1, double F2, double F3) {
  return (6.0 * F * F2 * F2 - 3.0 * F1 * F1 * F2 - 2.0 * F * F1 * F3) / (8.0 * F * F);
}

double quotient_curvature(double F, double F1, double F2, double F3) {
  const double F1sq = F1 * F1;
  return 8.0 * F * F / (F1sq * F1sq) * h_combination(F, F1, F2, F3);
}

ConditionReport check_condition(const PatchProblem& problem, Condition condition, int grid_size) {
  if (grid_size < 16) throw DomainError("check_condition needs grid_size >= 16");
  const double Km = problem.K_left();
  const double Kp = problem.K_right();
  const double width = Kp - Km;

  if (condition == Condition::SA) {
    ConditionReport report;
    report.condition = condition;
    report.grid = "1000-point grids on (0, K) and (K, 3K) plus {0, K}, both patches";
    report.verdict = Verdict::Pass;
    for (Side s : {Side::Left, Side::Right}) {
      const SaProbe probe = probe_standing_assumptions(problem.reaction(s));
      if (!probe.consistent) {
        report.verdict = Verdict::Fail;
        report.witnesses.push_back({probe.witness_u, probe.witness_value});
        report.note += std::string(side_name(s)) + ": " + probe.failure + "; ";
      }
    }
    if (report.verdict == Verdict::Pass) report.note = "consistent with SA (K_left < K_right)";
    return report;
  }

  const Potential plus(problem, Side::Right);
  const Potential minus(problem, Side::Left);
  const double G_shift = minus.E_K_right();
  const double margin = 1e-6 * width;
  const double band = 1e-4 * width;

  Probe probe;
  switch (condition) {
    case Condition::Mminus:
      probe = {[&](double u) { return problem.reaction(Side::Left).rate_derivative(u, 1); }, Km,
               Kp, true, true, ""};
      break;
    case Condition::C1plus:
      probe = {[&](double u) {
                 return sqrt_curvature(plus.value(u), plus.derivative(u, 1), plus.derivative(u, 2));
               },
               Km + margin, Kp - margin, false, false, ""};
      break;
    case Condition::C2plus:
      probe = {[&](double u) {
                 return -quotient_curvature(plus.value(u), plus.derivative(u, 1),
                                            plus.derivative(u, 2), plus.derivative(u, 3));
               },
               Km + margin, Kp - band, false, false, ""};
      break;
    case Condition::C1minus:
      probe = {[&](double u) {
                 return sqrt_curvature(minus.value(u) - G_shift, minus.derivative(u, 1),
                                       minus.derivative(u, 2));
               },
               Km + margin, Kp - margin, false, false, ""};
      break;
    case Condition::C2minus:
      probe = {[&](double u) {
                 return -quotient_curvature(minus.value(u) - G_shift, minus.derivative(u, 1),
                                            minus.derivative(u, 2), minus.derivative(u, 3));
               },
               Km + band, Kp - margin, false, false, ""};
      break;
    case Condition::SA: break;
  }
  if (condition == Condition::C2plus) {
    std::ostringstream os;
    os << "excluded band (" << Kp - band << ", " << Kp << ") where F+' -> 0";
    probe.note = os.str();
  } else if (condition == Condition::C2minus) {
    std::ostringstream os;
    os << "excluded band (" << Km << ", " << Km + band << ") where G-' -> 0";
    probe.note = os.str();
  }
  // Recorded values are the tested quantity itself: (sqrt F)'', (F/F'^2)'' or f-'.
  ConditionReport report = run_probe(condition, probe, grid_size);
  if (condition == Condition::C2plus || condition == Condition::C2minus) {
    for (auto& w : report.witnesses) w.value = -w.value;
    for (auto& w : report.samples) w.value = -w.value;
  }

  // Closed-form evidence for Richards rates.
  if (report.verdict == Verdict::Pass) {
    if (condition == Condition::Mminus && problem.reaction(Side::Left).is_richards()) {
      // f'(u) = r (1 - (p+1)(u/K)^p) < 0 whenever u >= K.
      report.evidence = "closed-form";
    }
    if (const auto* rp = problem.reaction(Side::Right).richards_params()) {
      if (condition == Condition::C1plus || condition == Condition::C2plus) {
        const RichardsAuditResult audit = richards_closed_form_audit(rp->p);
        const Verdict v = condition == Condition::C1plus ? audit.C1plus : audit.C2plus;
        if (v == Verdict::Pass) {
          report.evidence = "closed-form";
        } else {
          report.note += (report.note.empty() ? "" : "; ") +
                         std::string("closed-form audit: P changes sign on [0,1], so the "
                                     "condition fails for some K_left; this K_left passes on "
                                     "the grid");
        }
      }
    }
  }
  return report;
}

double richards_Q_definition(double p, double z) {
  return (1.0 - 2.0 / (p + 2.0) * z) * (1.0 - (p + 1.0) * z) - (1.0 - z) * (1.0 - z);
}

double richards_Q_factorized(double p, double z) { return p / (p + 2.0) * z * (z - (p + 1.0)); }

double richards_P(double p, double z) {
  return p * z * ((3.0 * p + 2.0) - 2.0 * z) + (p - 1.0) * ((p + 1.0) - z) * (1.0 - z);
}

double richards_R_prime(double p, double z) {
  return (1.0 / (p + 2.0)) * (-z + (p + 1.0)) / std::pow(1.0 - z, 3);
}

double richards_R_doubleprime(double p, double z) {
  return (1.0 / (p + 2.0)) * (-2.0 * z + (3.0 * p + 2.0)) / std::pow(1.0 - z, 4);
}

RichardsAuditResult richards_closed_form_audit(double p, int samples) {
  if (!(p > 0.0)) throw DomainError("Richards exponent must be positive");
  if (samples < 16) throw DomainError("richards_closed_form_audit needs >= 16 samples");
  RichardsAuditResult out{};
  out.p = p;
  const double z_max = 1.0 - 1e-6;
  out.z.resize(samples + 1);
  for (int i = 0; i < samples; ++i) out.z[i] = z_max * i / (samples - 1);
  out.z[samples] = 1.0;  // Q and P are polynomials; include z = 1 itself
  out.Q.resize(out.z.size());
  out.P.resize(out.z.size());
  kernels::audit_polynomials(out.z, p, out.Q, out.P);

  out.Q_max_on_unit_interval = *std::max_element(out.Q.begin(), out.Q.end());
  out.Q_identity_gap = 0.0;
  for (std::size_t i = 0; i < out.z.size(); ++i) {
    out.Q_identity_gap =
        std::max(out.Q_identity_gap, std::abs(richards_Q_definition(p, out.z[i]) - out.Q[i]));
  }
  out.P_at_zero = out.P.front();
  out.P_at_one = out.P.back();
  const double P_min = *std::min_element(out.P.begin(), out.P.end());
  const double P_max = *std::max_element(out.P.begin(), out.P.end());
  out.P_sign_change = P_min < -kAuditTolerance && P_max > kAuditTolerance;

  out.R_prime_min = std::numeric_limits<double>::infinity();
  out.R_doubleprime_min = std::numeric_limits<double>::infinity();
  for (int i = 1; i < samples; ++i) {
    const double z = out.z[i];
    out.R_prime_min = std::min(out.R_prime_min, richards_R_prime(p, z));
    out.R_doubleprime_min = std::min(out.R_doubleprime_min, richards_R_doubleprime(p, z));
  }
  out.C1plus = out.Q_max_on_unit_interval <= kAuditTolerance ? Verdict::Pass : Verdict::Fail;
  out.C2plus = (!out.P_sign_change && P_min >= -kAuditTolerance) ? Verdict::Pass : Verdict::Fail;
  return out;
}

AuditSummary audit_problem(const PatchProblem& problem, int grid_size) {
  AuditSummary summary;
  for (Condition c : {Condition::SA, Condition::Mminus, Condition::C1plus, Condition::C2plus,
                      Condition::C1minus, Condition::C2minus}) {
    summary.reports.push_back(check_condition(problem, c, grid_size));
  }
  auto pass = [&](Condition c) {
    for (const auto& r : summary.reports)
      if (r.condition == c) return r.verdict == Verdict::Pass;
    return false;
  };
  const bool base = pass(Condition::SA) && pass(Condition::C1plus) && pass(Condition::C2plus);
  if (base && pass(Condition::Mminus)) {
    summary.certified = true;
    summary.route = "M-,C1+,C2+";
  } else if (base && pass(Condition::C1minus) && pass(Condition::C2minus)) {
    summary.certified = true;
    summary.route = "C1-,C2-,C1+,C2+";
  }
  return summary;
}

}  // namespace patchss
