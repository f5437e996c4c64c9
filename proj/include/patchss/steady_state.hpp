#pragma once

#include <string>
#include <vector>

#include "patchss/audit.hpp"
#include "patchss/flow.hpp"
#include "patchss/reaction.hpp"

namespace patchss {

enum class ShotStatus { Valid, LeftRegion, BlowUp };

const char* shot_status_name(ShotStatus s);

/// Interface state reached by one of the two shooting maps.
struct ShootingMapSample {
  double parameter;  // alpha (left) or beta (right)
  double u_at_interface;
  double v_at_interface;
  ShotStatus status;
};

struct SolverOptions {
  FlowOptions flow;
  /// bisection tolerance for alpha-, beta+, beta(alpha) and alpha*
  double root_tol = 1e-11;
  /// uniqueness scan of the flux mismatch; doubled once on a tie or increase
  int scan_points = 64;
  /// uniform profile samples per half (integrator nodes are added on top)
  int profile_points = 512;
  int audit_grid = 256;
  /// tolerance for interface, flux and Neumann residuals
  double residual_tol = 1e-8;
  /// endpoint slack when matching a density at the ends of [beta+, K+]
  double match_slack = 1e-8;
  int jobs = 1;
};

struct Thresholds {
  double alpha_minus;
  double beta_plus;
};

/// Forward flow of the left system from (alpha, 0) at x = -L_left to x = 0.
ShootingMapSample shoot_left(const PatchProblem& problem, double alpha,
                             const FlowOptions& options = {});
/// Backward flow of the right system from (beta, 0) at x = L_right to x = 0.
ShootingMapSample shoot_right(const PatchProblem& problem, double beta,
                              const FlowOptions& options = {});

/// alpha in (K-, K+) with u-(0, alpha) = K+.
double find_alpha_minus(const PatchProblem& problem, const SolverOptions& options = {});
/// beta in (K-, K+) with u+(0, beta) = K-.
double find_beta_plus(const PatchProblem& problem, const SolverOptions& options = {});
Thresholds find_thresholds(const PatchProblem& problem, const SolverOptions& options = {});

/// beta in [beta+, K+] with u+(0, beta) = u-(0, alpha).
double match_beta(const PatchProblem& problem, double alpha, const Thresholds& thresholds,
                  const SolverOptions& options = {});

/// d+ v+(0, beta(alpha)) - d- v-(0, alpha).
double flux_mismatch(const PatchProblem& problem, double alpha, const Thresholds& thresholds,
                     const SolverOptions& options = {});

struct MismatchScan {
  std::vector<double> alpha;
  std::vector<double> mismatch;
  int sign_changes = 0;
  bool strictly_decreasing = false;
};

/// Samples the flux mismatch at n uniform points of [K-, alpha-] (inclusive).
MismatchScan scan_flux_mismatch(const PatchProblem& problem, const Thresholds& thresholds, int n,
                                const SolverOptions& options = {});

struct MatchResult {
  double alpha_star;
  double beta_star;
  double interface_u;
  double flux_residual;
  double density_residual;
};

struct SteadyStateSolution {
  /// Ascending x over [-L_left, L_right]; x = 0 appears twice (left limit,
  /// then right limit) so the jump in u_x at the interface is represented.
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> ux;
  std::size_t interface_index = 0;  // index of the left limit at x = 0
  double ux_left_interface = 0.0;
  double ux_right_interface = 0.0;
  double L_left = 0.0;
  double L_right = 0.0;

  MatchResult match{};
  Thresholds thresholds{};
  MismatchScan scan;
  AuditSummary audit;
  /// Sufficient-condition audits passed; the scan shape is reported separately.
  bool certified = false;
  std::vector<std::string> warnings;

  /// |u_x| at the outer ends obtained by re-integrating each half from the
  /// interface state implied by the opposite half and the flux condition.
  double neumann_left = 0.0;
  double neumann_right = 0.0;
  /// max |d u'' + f(u)| over the profile samples of each half.
  double ode_residual_left = 0.0;
  double ode_residual_right = 0.0;

  DenseTrajectory left_dense;
  DenseTrajectory right_dense;

  /// u(x); x = 0 returns the left limit. Uses the integrator's continuous
  /// extension when present, cubic Hermite interpolation of (u, u_x) otherwise.
  double evaluate(double x) const;
};

/// Full shooting solve: thresholds, uniqueness scan, bisection on the flux
/// mismatch, profile assembly and residuals. Throws StructuralError when the
/// scan does not show exactly one sign change.
SteadyStateSolution solve_steady_state(const PatchProblem& problem,
                                       const SolverOptions& options = {});

struct NecessaryCheck {
  std::string name;
  bool passed;
  double value;
  double tolerance;
  std::string detail;
};

struct NecessaryReport {
  std::vector<NecessaryCheck> checks;
  bool all_passed() const;
};

/// Endpoint bounds, strict monotonicity, range (K-, K+), interface density
/// and flux continuity, Neumann residuals.
NecessaryReport verify_necessary_conditions(const PatchProblem& problem,
                                            const SteadyStateSolution& solution,
                                            double tolerance = 1e-8);

}  // namespace patchss
