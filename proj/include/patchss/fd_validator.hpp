#pragma once

#include <string>
#include <vector>

#include "patchss/reaction.hpp"
#include "patchss/steady_state.hpp"

namespace patchss {

/// Uniform nodes on each side with one shared node at x = 0.
struct FdGrid {
  int n_left;
  int n_right;
};

enum class FdInitKind { FromShooting, Linear, Constant };

struct FdInit {
  FdInitKind kind = FdInitKind::Linear;
  const SteadyStateSolution* shooting = nullptr;
  double constant = 0.0;

  static FdInit from_shooting(const SteadyStateSolution& s) {
    return {FdInitKind::FromShooting, &s, 0.0};
  }
  /// Straight line from K_left at -L_left to K_right at L_right.
  static FdInit linear() { return {FdInitKind::Linear, nullptr, 0.0}; }
  static FdInit constant_value(double c) { return {FdInitKind::Constant, nullptr, c}; }
};

struct FdOptions {
  /// max |d u_xx + f(u)| over all rows
  double tol = 1e-10;
  int max_iterations = 100;
  double damping_floor = 1.0 / 1024.0;
};

struct FdSolution {
  std::vector<double> x;
  std::vector<double> u;
  int n_left = 0;
  int n_right = 0;
  double h_left = 0.0;
  double h_right = 0.0;
  double d_left = 0.0;
  double d_right = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  /// d u_x at the interface reconstructed from each side's half cell.
  double interface_flux_left = 0.0;
  double interface_flux_right = 0.0;
  bool positive = true;
  bool increasing = true;
  /// "non-positive", "non-increasing": the iteration may have reached a
  /// spurious root of the discrete system.
  std::vector<std::string> flags;

  std::size_t interface_node() const { return static_cast<std::size_t>(n_left); }
};

/// Damped Newton solve of the discrete steady-state problem. Throws
/// NumericError (message carries the residual history) when the iteration
/// does not converge within max_iterations.
FdSolution fd_steady_solve(const PatchCoefficients& coefficients, FdGrid grid, FdInit init,
                           const FdOptions& options = {});
FdSolution fd_steady_solve(const PatchProblem& problem, FdGrid grid, FdInit init,
                           const FdOptions& options = {});

struct FdComparison {
  double linf;
  double l2;
  /// |FD interface flux - shooting interface flux|
  double interface_flux;
};

/// Evaluates the shooting profile at the FD nodes and measures the difference.
FdComparison compare_solutions(const FdSolution& fd, const SteadyStateSolution& shooting);

/// Independent solves from several initial guesses, returned in input order.
std::vector<FdSolution> fd_multistart(const PatchCoefficients& coefficients, FdGrid grid,
                                      const std::vector<FdInit>& inits,
                                      const FdOptions& options = {}, int jobs = 1);

}  // namespace patchss
