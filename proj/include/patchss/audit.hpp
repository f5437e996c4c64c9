#pragma once

#include <string>
#include <vector>

#include "patchss/reaction.hpp"

namespace patchss {

enum class Condition { SA, Mminus, C1plus, C2plus, C1minus, C2minus };
enum class Verdict { Pass, Fail, Inconclusive };

const char* condition_name(Condition c);
const char* verdict_name(Verdict v);

struct Witness {
  double u;
  double value;
};

struct ConditionReport {
  Condition condition;
  Verdict verdict = Verdict::Inconclusive;
  /// Fail: violating samples. Pass: the sample closest to violation.
  std::vector<Witness> witnesses;
  /// Every evaluated sample, ascending in u (for plotting).
  std::vector<Witness> samples;
  std::string grid;
  /// "grid-consistent" or "closed-form".
  std::string evidence = "grid-consistent";
  std::string note;
};

/// Violations must exceed this to produce a Fail verdict.
inline constexpr double kAuditTolerance = 1e-9;

/// (sqrt F)'' = (2 F F'' - F'^2) / (4 F^{3/2}).
double sqrt_curvature(double F, double F1, double F2);

/// 3 h''^2 - h' h''' for h = sqrt F, i.e. (6 F F''^2 - 3 F'^2 F'' - 2 F F' F''') / (8 F^2).
double h_combination(double F, double F1, double F2, double F3);

/// (F / F'^2)'' obtained from h_combination: 8 F^2 / F'^4 * (3 h''^2 - h' h''').
double quotient_curvature(double F, double F1, double F2, double F3);

/// Samples the condition on Chebyshev nodes interior to (K-, K+) (closed
/// interval for M-), refining with 16 uniform points around near-violations.
ConditionReport check_condition(const PatchProblem& problem, Condition condition,
                                int grid_size = 256);

struct RichardsAuditResult {
  double p;
  double Q_max_on_unit_interval;
  /// max |Q_definition - Q_factorized| over the samples.
  double Q_identity_gap;
  bool P_sign_change;
  double P_at_zero;
  double P_at_one;
  double R_prime_min;
  double R_doubleprime_min;
  Verdict C1plus;
  Verdict C2plus;
  std::vector<double> z;
  std::vector<double> Q;
  std::vector<double> P;
};

/// Q(z) = (1 - 2z/(p+2))(1 - (p+1)z) - (1-z)^2 as defined and factorized.
double richards_Q_definition(double p, double z);
double richards_Q_factorized(double p, double z);
double richards_P(double p, double z);
/// R'(z), R''(z) for the r = 1 normalization.
double richards_R_prime(double p, double z);
double richards_R_doubleprime(double p, double z);

/// Closed-form audit of the Richards exponent on z in [0, 1 - 1e-6].
RichardsAuditResult richards_closed_form_audit(double p, int samples = 1024);

struct AuditSummary {
  std::vector<ConditionReport> reports;
  bool certified = false;
  /// "M-,C1+,C2+", "C1-,C2-,C1+,C2+" or empty when neither set passes.
  std::string route;
};

AuditSummary audit_problem(const PatchProblem& problem, int grid_size = 256);

}  // namespace patchss
