#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace patchss {

enum class Side { Left, Right };

inline const char* side_name(Side s) { return s == Side::Left ? "left" : "right"; }

/// Generalized logistic rate r u (1 - (u/K)^p).
struct RichardsParams {
  double r;
  double K;
  double p;
};

/// User-supplied rate. Missing derivatives are replaced by central differences.
struct CustomRate {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  double K;
  std::string name;
};

/// Result of probing f(0)=0, f(K)=0, f'(0)>0 and the sign pattern of f on a grid.
struct SaProbe {
  bool consistent;
  std::string failure;  // empty when consistent
  double witness_u;
  double witness_value;
};

class ReactionSpec {
 public:
  /// Throws DomainError unless r, K, p > 0.
  static ReactionSpec richards(double r, double K, double p);

  /// Probes the standing assumptions on a 1000-point grid plus {0, K} and
  /// rejects rates that violate them.
  static ReactionSpec custom(std::function<double(double)> f, double K,
                             std::function<double(double)> df = {},
                             std::function<double(double)> d2f = {},
                             std::string name = "custom");

  /// f(u); DomainError for u < 0.
  double rate(double u) const;
  /// f'(u) (order 1) or f''(u) (order 2).
  double rate_derivative(double u, int order) const;
  /// Rate extended to u < 0 by f(max(u, 0)). Used inside integrators, which
  /// may probe slightly past the u = 0 line while locating it.
  double rate_extended(double u) const;

  double carrying_capacity() const;
  bool is_richards() const { return std::holds_alternative<RichardsParams>(kind_); }
  const RichardsParams* richards_params() const { return std::get_if<RichardsParams>(&kind_); }
  std::string describe() const;

 private:
  explicit ReactionSpec(std::variant<RichardsParams, CustomRate> kind) : kind_(std::move(kind)) {}
  std::variant<RichardsParams, CustomRate> kind_;
};

/// Grid probe of the standing assumptions for a single rate.
SaProbe probe_standing_assumptions(const ReactionSpec& spec, int grid = 1000);

double eval_reaction(const ReactionSpec& spec, double u);

/// Diffusion, length and reaction of one patch with no ordering constraint
/// between patches. The finite-difference validator works on this.
struct PatchCoefficients {
  ReactionSpec left;
  ReactionSpec right;
  double d_left;
  double d_right;
  double L_left;
  double L_right;
};

/// Two-patch instance on [-L_left, L_right]. Enforces K_left < K_right and
/// positive diffusivities and lengths.
class PatchProblem {
 public:
  PatchProblem(ReactionSpec left, ReactionSpec right, double d_left, double d_right,
               double L_left, double L_right);

  const ReactionSpec& reaction(Side s) const { return s == Side::Left ? c_.left : c_.right; }
  double diffusivity(Side s) const { return s == Side::Left ? c_.d_left : c_.d_right; }
  double length(Side s) const { return s == Side::Left ? c_.L_left : c_.L_right; }
  double K_left() const { return c_.left.carrying_capacity(); }
  double K_right() const { return c_.right.carrying_capacity(); }
  const PatchCoefficients& coefficients() const { return c_; }

  PatchProblem with_lengths(double L_left, double L_right) const;

 private:
  PatchCoefficients c_;
};

/// Logistic reference instance (K- = 1, K+ = 2.2, d- = 1.2, d+ = 2) used as the default.
PatchProblem reference_problem();

enum class PotentialMode { ClosedForm, Quadrature };

enum class Branch { IncreasingOnZeroK, DecreasingPastK };

/// F(u) = (1/d) int_0^u f(s) ds for one side of a problem, plus the cached
/// landmark energies F(K_left), F(K_right).
class Potential {
 public:
  /// Closed form for Richards rates, quadrature otherwise. `force` selects a
  /// mode explicitly (ClosedForm is rejected for custom rates).
  Potential(const PatchProblem& problem, Side side,
            std::optional<PotentialMode> force = std::nullopt);
  Potential(ReactionSpec reaction, double diffusivity, double K_left, double K_right,
            Side side, std::optional<PotentialMode> force = std::nullopt);

  double value(double u) const;
  /// order 1..3: f/d, f'/d, f''/d.
  double derivative(double u, int order) const;
  /// Solve F(u) = E on the requested monotone branch to 1e-12 in u.
  double invert(double E, Branch branch) const;

  Side side() const { return side_; }
  PotentialMode mode() const { return mode_; }
  double diffusivity() const { return d_; }
  const ReactionSpec& reaction() const { return reaction_; }
  /// Carrying capacity of this side's rate.
  double K() const { return reaction_.carrying_capacity(); }
  double K_left() const { return K_left_; }
  double K_right() const { return K_right_; }
  double E_K_left() const { return E_K_left_; }
  double E_K_right() const { return E_K_right_; }
  /// Upper end of the search range used for the decreasing branch.
  double search_limit() const { return 100.0 * std::max(K_right_, K()); }

 private:
  ReactionSpec reaction_;
  double d_;
  double K_left_;
  double K_right_;
  Side side_;
  PotentialMode mode_;
  double E_K_left_ = 0.0;
  double E_K_right_ = 0.0;
};

double eval_potential(const Potential& pot, double u);
double eval_potential_derivs(const Potential& pot, double u, int order);

/// G(u) = F_left(u) - F_left(K_right), defined on [K_left, K_right].
double shifted_potential_G(const PatchProblem& problem, double u);

double invert_potential(const Potential& pot, double E, Branch branch);

}  // namespace patchss
