#include "patchss/reaction.hpp"

#include <cmath>
#include <sstream>

#include "patchss/errors.hpp"
#include "patchss/quadrature.hpp"
#include "patchss/roots.hpp"

namespace patchss {

namespace {

double fd_step(double u) { return std::max(1e-5, 1e-5 * std::abs(u)); }

// First and second derivatives of a scalar map by central differences with
// a one-sided fallback when u - h would leave [0, inf).
double fd_first(const std::function<double(double)>& f, double u) {
  const double h = fd_step(u);
  if (u - h < 0.0) return (-3.0 * f(u) + 4.0 * f(u + h) - f(u + 2.0 * h)) / (2.0 * h);
  return (f(u + h) - f(u - h)) / (2.0 * h);
}

double fd_second(const std::function<double(double)>& f, double u) {
  const double h = fd_step(u);
  if (u - h < 0.0) {
    return (2.0 * f(u) - 5.0 * f(u + h) + 4.0 * f(u + 2.0 * h) - f(u + 3.0 * h)) / (h * h);
  }
  return (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h);
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << what << " must be positive and finite (got " << value << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

ReactionSpec ReactionSpec::richards(double r, double K, double p) {
  require_positive(r, "Richards rate r");
  require_positive(K, "Richards carrying capacity K");
  require_positive(p, "Richards exponent p");
  return ReactionSpec(RichardsParams{r, K, p});
}

ReactionSpec ReactionSpec::custom(std::function<double(double)> f, double K,
                                  std::function<double(double)> df,
                                  std::function<double(double)> d2f, std::string name) {
  if (!f) throw DomainError("custom reaction needs a rate function");
  require_positive(K, "custom carrying capacity K");
  ReactionSpec spec(CustomRate{std::move(f), std::move(df), std::move(d2f), K, std::move(name)});
  const SaProbe probe = probe_standing_assumptions(spec);
  if (!probe.consistent) {
    throw DomainError("custom reaction '" + spec.describe() +
                      "' violates the standing assumptions: " + probe.failure);
  }
  return spec;
}

double ReactionSpec::rate(double u) const {
  if (u < 0.0) throw DomainError("reaction rate evaluated at negative density");
  return rate_extended(u);
}

double ReactionSpec::rate_extended(double u) const {
  u = std::max(u, 0.0);
  if (const auto* rp = std::get_if<RichardsParams>(&kind_)) {
    return rp->r * u * (1.0 - std::pow(u / rp->K, rp->p));
  }
  return std::get<CustomRate>(kind_).f(u);
}

double ReactionSpec::rate_derivative(double u, int order) const {
  if (u < 0.0) throw DomainError("reaction derivative evaluated at negative density");
  if (order != 1 && order != 2) throw DomainError("reaction derivative order must be 1 or 2");
  if (const auto* rp = std::get_if<RichardsParams>(&kind_)) {
    const double z = std::pow(u / rp->K, rp->p);
    if (order == 1) return rp->r * (1.0 - (rp->p + 1.0) * z);
    if (u == 0.0) {
      if (rp->p > 1.0) return 0.0;
      if (rp->p == 1.0) return -2.0 * rp->r / rp->K;
      throw DomainError("Richards f'' is unbounded at u = 0 for p < 1");
    }
    return -rp->r * rp->p * (rp->p + 1.0) * z / u;
  }
  const auto& c = std::get<CustomRate>(kind_);
  if (order == 1) return c.df ? c.df(u) : fd_first(c.f, u);
  if (c.d2f) return c.d2f(u);
  if (c.df) return fd_first(c.df, u);
  return fd_second(c.f, u);
}

double ReactionSpec::carrying_capacity() const {
  if (const auto* rp = std::get_if<RichardsParams>(&kind_)) return rp->K;
  return std::get<CustomRate>(kind_).K;
}

std::string ReactionSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* rp = std::get_if<RichardsParams>(&kind_)) {
    os << "richards(r=" << rp->r << ", K=" << rp->K << ", p=" << rp->p << ")";
  } else {
    const auto& c = std::get<CustomRate>(kind_);
    os << c.name << "(K=" << c.K << ")";
  }
  return os.str();
}

SaProbe probe_standing_assumptions(const ReactionSpec& spec, int grid) {
  const double K = spec.carrying_capacity();
  const double tol = 1e-12 * std::max(1.0, K);
  auto fail = [](std::string why, double u, double value) {
    return SaProbe{false, std::move(why), u, value};
  };
  const double f0 = spec.rate(0.0);
  if (std::abs(f0) > tol) return fail("f(0) != 0", 0.0, f0);
  const double fK = spec.rate(K);
  if (std::abs(fK) > tol) return fail("f(K) != 0", K, fK);
  const double df0 = spec.rate_derivative(0.0, 1);
  if (!(df0 > 0.0)) return fail("f'(0) <= 0", 0.0, df0);
  for (int i = 1; i < grid; ++i) {
    const double u = K * i / grid;
    const double v = spec.rate(u);
    if (!(v > 0.0)) return fail("f <= 0 inside (0, K)", u, v);
  }
  // Beyond K the rate must stay negative; probe out to 3K.
  for (int i = 1; i <= grid; ++i) {
    const double u = K + 2.0 * K * i / grid;
    const double v = spec.rate(u);
    if (!(v < 0.0)) return fail("f >= 0 beyond K", u, v);
  }
  return {true, {}, 0.0, 0.0};
}

double eval_reaction(const ReactionSpec& spec, double u) { return spec.rate(u); }

PatchProblem::PatchProblem(ReactionSpec left, ReactionSpec right, double d_left,
                           double d_right, double L_left, double L_right)
    : c_{std::move(left), std::move(right), d_left, d_right, L_left, L_right} {
  require_positive(d_left, "left diffusivity");
  require_positive(d_right, "right diffusivity");
  require_positive(L_left, "left length");
  require_positive(L_right, "right length");
  if (!(K_left() < K_right())) {
    std::ostringstream os;
    os << "carrying capacities must satisfy K_left < K_right (got " << K_left()
       << " >= " << K_right()
       << "); reverse the orientation of the interval by swapping the left and right patches";
    throw DomainError(os.str());
  }
}

PatchProblem PatchProblem::with_lengths(double L_left, double L_right) const {
  return PatchProblem(c_.left, c_.right, c_.d_left, c_.d_right, L_left, L_right);
}

PatchProblem reference_problem() {
  return PatchProblem(ReactionSpec::richards(1.0, 1.0, 1.0), ReactionSpec::richards(1.0, 2.2, 1.0),
                      1.2, 2.0, 1.0349, 1.1671);
}

Potential::Potential(const PatchProblem& problem, Side side, std::optional<PotentialMode> force)
    : Potential(problem.reaction(side), problem.diffusivity(side), problem.K_left(),
                problem.K_right(), side, force) {}

Potential::Potential(ReactionSpec reaction, double diffusivity, double K_left, double K_right,
                     Side side, std::optional<PotentialMode> force)
    : reaction_(std::move(reaction)),
      d_(diffusivity),
      K_left_(K_left),
      K_right_(K_right),
      side_(side),
      mode_(reaction_.is_richards() ? PotentialMode::ClosedForm : PotentialMode::Quadrature) {
  require_positive(d_, "diffusivity");
  if (force) {
    if (*force == PotentialMode::ClosedForm && !reaction_.is_richards()) {
      throw DomainError("closed-form potential is only available for Richards rates");
    }
    mode_ = *force;
  }
  E_K_left_ = value(K_left_);
  E_K_right_ = value(K_right_);
}

double Potential::value(double u) const {
  if (u < 0.0) throw DomainError("potential evaluated at negative density");
  if (u == 0.0) return 0.0;
  if (mode_ == PotentialMode::ClosedForm) {
    const auto& rp = *reaction_.richards_params();
    return (rp.r / d_) * (0.5 * u * u - std::pow(u, rp.p + 2.0) / ((rp.p + 2.0) * std::pow(rp.K, rp.p)));
  }
  const auto est = quad::adaptive_gauss_kronrod([this](double s) { return reaction_.rate(s); },
                                                0.0, u, 1e-12 * d_, 1e-15);
  return est.value / d_;
}

double Potential::derivative(double u, int order) const {
  if (order < 1 || order > 3) throw DomainError("potential derivative order must be 1, 2 or 3");
  if (order == 1) return reaction_.rate(u) / d_;
  return reaction_.rate_derivative(u, order - 1) / d_;
}

double Potential::invert(double E, Branch branch) const {
  const double K = this->K();
  const double top = value(K);
  const double slack = 1e-14 * std::max(1.0, std::abs(top));
  if (E > top + slack) {
    throw BracketError("invert_potential: energy above the maximum F(K) of the potential");
  }
  if (E >= top) return K;
  auto g = [this, E](double u) { return std::pair{value(u) - E, derivative(u, 1)}; };
  if (branch == Branch::IncreasingOnZeroK) {
    if (E < -slack) throw BracketError("invert_potential: negative energy on the increasing branch");
    if (E <= 0.0) return 0.0;
    return roots::safeguarded_newton(g, 0.0, K, 1e-13).x;
  }
  double hi = std::max(2.0 * K, K + 1.0);
  const double limit = search_limit();
  while (value(hi) > E) {
    if (hi >= limit) {
      throw BracketError("invert_potential: energy below F on the search range of the "
                         "decreasing branch");
    }
    hi = std::min(2.0 * hi, limit);
  }
  return roots::safeguarded_newton(g, K, hi, 1e-13).x;
}

double eval_potential(const Potential& pot, double u) { return pot.value(u); }

double eval_potential_derivs(const Potential& pot, double u, int order) {
  if (!(u > 0.0)) throw DomainError("potential derivatives require u > 0");
  return pot.derivative(u, order);
}

double shifted_potential_G(const PatchProblem& problem, double u) {
  const double lo = problem.K_left();
  const double hi = problem.K_right();
  if (u < lo || u > hi) throw DomainError("G is defined on [K_left, K_right] only");
  const Potential left(problem, Side::Left);
  return left.value(u) - left.E_K_right();
}

double invert_potential(const Potential& pot, double E, Branch branch) {
  return pot.invert(E, branch);
}

}  // namespace patchss
