#include "patchss/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "patchss/errors.hpp"
#include "patchss/parallel.hpp"
#include "patchss/roots.hpp"

namespace patchss {

const char* shot_status_name(ShotStatus s) {
  switch (s) {
    case ShotStatus::Valid: return "valid";
    case ShotStatus::LeftRegion: return "left-region";
    case ShotStatus::BlowUp: return "blow-up";
  }
  return "?";
}

namespace {

ShotStatus status_of(Termination t) {
  switch (t) {
    case Termination::LeftHalfPlane: return ShotStatus::LeftRegion;
    case Termination::BlowUpGuard: return ShotStatus::BlowUp;
    default: return ShotStatus::Valid;
  }
}

// The two half-problems with their potentials built once.
struct Shooter {
  const PatchProblem& problem;
  Potential left;
  Potential right;
  FlowOptions flow_opts;

  Shooter(const PatchProblem& p, const FlowOptions& fo)
      : problem(p), left(p, Side::Left), right(p, Side::Right), flow_opts(fo) {}

  FlowResult run_left(double alpha) const {
    FlowOptions o = flow_opts;
    o.x_start = -problem.length(Side::Left);
    return flow(left, make_state(left, alpha, 0.0), problem.length(Side::Left),
                Direction::Forward, o);
  }
  FlowResult run_right(double beta) const {
    FlowOptions o = flow_opts;
    o.x_start = problem.length(Side::Right);
    return flow(right, make_state(right, beta, 0.0), problem.length(Side::Right),
                Direction::Backward, o);
  }
  ShootingMapSample left_sample(double alpha) const {
    const FlowResult r = run_left(alpha);
    return {alpha, r.final.u, r.final.v, status_of(r.terminated)};
  }
  ShootingMapSample right_sample(double beta) const {
    const FlowResult r = run_right(beta);
    return {beta, r.final.u, r.final.v, status_of(r.terminated)};
  }

  double alpha_minus(double tol) const {
    const double KL = problem.K_left(), KR = problem.K_right();
    auto g = [&](double a) {
      const ShootingMapSample s = left_sample(a);
      if (s.status == ShotStatus::BlowUp) return 1.0;
      if (s.status == ShotStatus::LeftRegion) return -1.0;
      return s.u_at_interface - KR;
    };
    try {
      return roots::bisect(g, KL, KR, tol).x;
    } catch (const BracketError&) {
      throw StructuralError("left shooting map does not cross K+ on [K-, K+]");
    }
  }

  double beta_plus(double tol) const {
    const double KL = problem.K_left(), KR = problem.K_right();
    auto g = [&](double b) {
      const ShootingMapSample s = right_sample(b);
      if (s.status == ShotStatus::LeftRegion) return -1.0;
      if (s.status == ShotStatus::BlowUp) return 1.0;
      return s.u_at_interface - KL;
    };
    try {
      return roots::bisect(g, KL, KR, tol).x;
    } catch (const BracketError&) {
      throw StructuralError("right shooting map does not cross K- on [K-, K+]");
    }
  }

  double match(double target, const Thresholds& th, double tol, double slack) const {
    const double KR = problem.K_right();
    auto g = [&](double b) {
      const ShootingMapSample s = right_sample(b);
      if (s.status == ShotStatus::LeftRegion) return -1.0;
      if (s.status == ShotStatus::BlowUp) return 1.0;
      return s.u_at_interface - target;
    };
    const double g_lo = g(th.beta_plus);
    const double g_hi = g(KR);
    if (g_lo >= 0.0) {
      if (g_lo <= slack) return th.beta_plus;
      throw StructuralError("target density " + std::to_string(target) +
                            " lies below the right shooting range");
    }
    if (g_hi <= 0.0) {
      if (-g_hi <= slack) return KR;
      throw StructuralError("target density " + std::to_string(target) +
                            " lies above the right shooting range");
    }
    try {
      return roots::bisect(g, th.beta_plus, KR, tol).x;
    } catch (const BracketError&) {
      throw StructuralError("right shooting map is not monotone on [beta+, K+]");
    }
  }

  double mismatch(double alpha, const Thresholds& th, double tol, double slack) const {
    const ShootingMapSample l = left_sample(alpha);
    if (l.status != ShotStatus::Valid) {
      throw StructuralError("left shot from alpha = " + std::to_string(alpha) +
                            " left the admissible region");
    }
    const double beta = match(l.u_at_interface, th, tol, slack);
    const ShootingMapSample r = right_sample(beta);
    return problem.diffusivity(Side::Right) * r.v_at_interface -
           problem.diffusivity(Side::Left) * l.v_at_interface;
  }
};

MismatchScan scan_with(const Shooter& sh, const Thresholds& th, int n,
                       const SolverOptions& opt) {
  if (n < 2) throw DomainError("scan_flux_mismatch: need at least 2 points");
  MismatchScan scan;
  const double a0 = sh.problem.K_left(), a1 = th.alpha_minus;
  scan.alpha.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    scan.alpha[static_cast<std::size_t>(i)] =
        i == n - 1 ? a1 : a0 + (a1 - a0) * static_cast<double>(i) / (n - 1);
  }
  scan.mismatch = parallel_map(scan.alpha.size(), opt.jobs, [&](std::size_t i) {
    return sh.mismatch(scan.alpha[i], th, opt.root_tol, opt.match_slack);
  });
  // Steps smaller than 1e-10 count as ties, and ties as violations.
  scan.strictly_decreasing = true;
  for (std::size_t i = 1; i < scan.mismatch.size(); ++i) {
    if (!(scan.mismatch[i - 1] - scan.mismatch[i] > 1e-10)) scan.strictly_decreasing = false;
  }
  // Exact zeros count once, as the crossing they sit on.
  int changes = 0;
  int prev = 0;
  for (double m : scan.mismatch) {
    const int s = m > 0.0 ? 1 : (m < 0.0 ? -1 : 0);
    if (s == 0) {
      if (prev != 0) ++changes;
      prev = 0;
      continue;
    }
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  scan.sign_changes = changes;
  return scan;
}

std::vector<double> sample_points(double a, double b, int n, const FlowResult& run) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n) + run.trajectory.size() + 2);
  for (int i = 0; i <= n; ++i) xs.push_back(a + (b - a) * static_cast<double>(i) / n);
  for (const auto& t : run.trajectory) xs.push_back(t.x);
  std::sort(xs.begin(), xs.end());
  const double merge = 1e-12 * std::max(1.0, b - a);
  std::vector<double> out;
  for (double x : xs) {
    x = std::clamp(x, a, b);
    if (out.empty() || x - out.back() > merge) out.push_back(x);
  }
  out.front() = a;
  out.back() = b;
  return out;
}

double ode_residual(const Potential& pot, const DenseTrajectory& dense,
                    const std::vector<double>& xs) {
  double worst = 0.0;
  for (double x : xs) {
    const auto s = dense.state(x);
    const auto ds = dense.slope(x);
    const double d = pot.diffusivity();
    const double res = std::abs(d * ds[1] + pot.reaction().rate_extended(s[0]));
    worst = std::max(worst, res);
  }
  return worst;
}

double hermite(double x0, double x1, double u0, double u1, double m0, double m1, double x) {
  const double h = x1 - x0;
  if (h <= 0.0) return u0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * u0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * u1 +
         (t3 - t2) * h * m1;
}

}  // namespace

ShootingMapSample shoot_left(const PatchProblem& problem, double alpha,
                             const FlowOptions& options) {
  if (!(alpha >= 0.0)) throw DomainError("shoot_left: alpha must be non-negative");
  return Shooter(problem, options).left_sample(alpha);
}

ShootingMapSample shoot_right(const PatchProblem& problem, double beta,
                              const FlowOptions& options) {
  if (!(beta >= 0.0)) throw DomainError("shoot_right: beta must be non-negative");
  return Shooter(problem, options).right_sample(beta);
}

double find_alpha_minus(const PatchProblem& problem, const SolverOptions& options) {
  return Shooter(problem, options.flow).alpha_minus(options.root_tol);
}

double find_beta_plus(const PatchProblem& problem, const SolverOptions& options) {
  return Shooter(problem, options.flow).beta_plus(options.root_tol);
}

Thresholds find_thresholds(const PatchProblem& problem, const SolverOptions& options) {
  const Shooter sh(problem, options.flow);
  return {sh.alpha_minus(options.root_tol), sh.beta_plus(options.root_tol)};
}

double match_beta(const PatchProblem& problem, double alpha, const Thresholds& thresholds,
                  const SolverOptions& options) {
  const Shooter sh(problem, options.flow);
  const ShootingMapSample l = sh.left_sample(alpha);
  if (l.status != ShotStatus::Valid) {
    throw StructuralError("left shot from alpha = " + std::to_string(alpha) +
                          " left the admissible region");
  }
  return sh.match(l.u_at_interface, thresholds, options.root_tol, options.match_slack);
}

double flux_mismatch(const PatchProblem& problem, double alpha, const Thresholds& thresholds,
                     const SolverOptions& options) {
  return Shooter(problem, options.flow)
      .mismatch(alpha, thresholds, options.root_tol, options.match_slack);
}

MismatchScan scan_flux_mismatch(const PatchProblem& problem, const Thresholds& thresholds,
                                int n, const SolverOptions& options) {
  return scan_with(Shooter(problem, options.flow), thresholds, n, options);
}

SteadyStateSolution solve_steady_state(const PatchProblem& problem,
                                       const SolverOptions& options) {
  const Shooter sh(problem, options.flow);
  SteadyStateSolution sol;
  sol.L_left = problem.length(Side::Left);
  sol.L_right = problem.length(Side::Right);
  sol.thresholds = {sh.alpha_minus(options.root_tol), sh.beta_plus(options.root_tol)};
  const Thresholds& th = sol.thresholds;

  sol.scan = scan_with(sh, th, options.scan_points, options);
  if (!sol.scan.strictly_decreasing) {
    sol.scan = scan_with(sh, th, 2 * options.scan_points, options);
  }
  if (sol.scan.sign_changes != 1) {
    std::ostringstream msg;
    msg << "flux mismatch shows " << sol.scan.sign_changes
        << " sign changes on [K-, alpha-]; expected exactly one";
    throw StructuralError(msg.str());
  }
  if (!sol.scan.strictly_decreasing) {
    sol.warnings.push_back("flux mismatch scan is not strictly decreasing");
  }

  // Bracket from the scan, then bisection.
  std::size_t k = 1;
  while (k < sol.scan.mismatch.size() &&
         !(sol.scan.mismatch[k - 1] >= 0.0 && sol.scan.mismatch[k] <= 0.0)) {
    ++k;
  }
  double alpha_star;
  if (sol.scan.mismatch[k - 1] == 0.0) {
    alpha_star = sol.scan.alpha[k - 1];
  } else if (sol.scan.mismatch[k] == 0.0) {
    alpha_star = sol.scan.alpha[k];
  } else {
    auto g = [&](double a) { return sh.mismatch(a, th, options.root_tol, options.match_slack); };
    alpha_star = roots::bisect(g, sol.scan.alpha[k - 1], sol.scan.alpha[k], options.root_tol).x;
  }

  const FlowResult left = sh.run_left(alpha_star);
  const double beta_star = sh.match(left.final.u, th, options.root_tol, options.match_slack);
  const FlowResult right = sh.run_right(beta_star);
  if (left.terminated != Termination::Completed || right.terminated != Termination::Completed) {
    throw StructuralError("shooting trajectory at the matched parameters left the half-plane");
  }

  const double dL = problem.diffusivity(Side::Left), dR = problem.diffusivity(Side::Right);
  sol.match = {alpha_star,
               beta_star,
               left.final.u,
               std::abs(dR * right.final.v - dL * left.final.v),
               std::abs(right.final.u - left.final.u)};
  sol.left_dense = left.dense;
  sol.right_dense = right.dense;
  sol.ux_left_interface = left.final.v;
  sol.ux_right_interface = right.final.v;

  const std::vector<double> xl = sample_points(-sol.L_left, 0.0, options.profile_points, left);
  const std::vector<double> xr = sample_points(0.0, sol.L_right, options.profile_points, right);
  for (double x : xl) {
    const auto s = left.dense.state(x);
    sol.x.push_back(x);
    sol.u.push_back(s[0]);
    sol.ux.push_back(s[1]);
  }
  sol.x.back() = 0.0;
  sol.u.back() = left.final.u;
  sol.ux.back() = left.final.v;
  sol.u.front() = alpha_star;
  sol.ux.front() = 0.0;
  sol.interface_index = sol.x.size() - 1;
  for (double x : xr) {
    const auto s = right.dense.state(x);
    sol.x.push_back(x);
    sol.u.push_back(s[0]);
    sol.ux.push_back(s[1]);
  }
  sol.u[sol.interface_index + 1] = right.final.u;
  sol.ux[sol.interface_index + 1] = right.final.v;
  sol.u.back() = beta_star;
  sol.ux.back() = 0.0;

  // Piece the halves together through the interface conditions and check the
  // far Neumann conditions on the re-integrated halves.
  {
    FlowOptions o = options.flow;
    o.x_start = 0.0;
    const FlowResult r2 = flow(sh.right, make_state(sh.right, left.final.u, dL / dR * left.final.v),
                               sol.L_right, Direction::Forward, o);
    const FlowResult l2 = flow(sh.left, make_state(sh.left, right.final.u, dR / dL * right.final.v),
                               sol.L_left, Direction::Backward, o);
    sol.neumann_right = std::abs(r2.final.v);
    sol.neumann_left = std::abs(l2.final.v);
  }
  sol.ode_residual_left = ode_residual(sh.left, left.dense, xl);
  sol.ode_residual_right = ode_residual(sh.right, right.dense, xr);

  sol.audit = audit_problem(problem, options.audit_grid);
  // Certification follows the sufficient-condition audits. A non-monotone
  // scan is reported as a warning only.
  sol.certified = sol.audit.certified;
  if (!sol.audit.certified) {
    std::string failed;
    for (const auto& rep : sol.audit.reports) {
      if (rep.verdict != Verdict::Pass) {
        if (!failed.empty()) failed += ", ";
        failed += std::string(condition_name(rep.condition)) + "=" + verdict_name(rep.verdict);
      }
    }
    sol.warnings.push_back("sufficient conditions not established (" + failed +
                           "); uniqueness is not certified");
  }
  if (sol.match.flux_residual > options.residual_tol ||
      sol.match.density_residual > options.residual_tol ||
      sol.neumann_left > options.residual_tol || sol.neumann_right > options.residual_tol) {
    sol.warnings.push_back("interface or Neumann residual above tolerance");
  }
  return sol;
}

double SteadyStateSolution::evaluate(double xq) const {
  if (x.empty()) throw DomainError("evaluate: empty solution");
  if (xq < x.front() - 1e-14 || xq > x.back() + 1e-14) {
    throw DomainError("evaluate: x outside [-L_left, L_right]");
  }
  if (xq <= 0.0 && !left_dense.empty()) return left_dense.state(std::min(xq, 0.0))[0];
  if (xq > 0.0 && !right_dense.empty()) return right_dense.state(xq)[0];
  // Restrict to the half that contains xq so the flux jump is not smeared.
  std::size_t lo = 0, hi = x.size() - 1;
  if (xq <= 0.0) {
    hi = interface_index;
  } else {
    lo = interface_index + 1;
  }
  const auto first = x.begin() + static_cast<std::ptrdiff_t>(lo);
  const auto last = x.begin() + static_cast<std::ptrdiff_t>(hi) + 1;
  auto it = std::upper_bound(first, last, xq);
  std::size_t j = static_cast<std::size_t>(it - x.begin());
  if (j <= lo) j = lo + 1;
  if (j > hi) j = hi;
  return hermite(x[j - 1], x[j], u[j - 1], u[j], ux[j - 1], ux[j], xq);
}

bool NecessaryReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const NecessaryCheck& c) { return c.passed; });
}

NecessaryReport verify_necessary_conditions(const PatchProblem& problem,
                                            const SteadyStateSolution& s, double tol) {
  if (s.x.size() < 4 || s.u.size() != s.x.size() || s.ux.size() != s.x.size() ||
      s.interface_index + 1 >= s.x.size()) {
    throw DomainError("verify_necessary_conditions: malformed profile");
  }
  const double KL = problem.K_left(), KR = problem.K_right();
  const double dL = problem.diffusivity(Side::Left), dR = problem.diffusivity(Side::Right);
  const std::size_t n = s.x.size(), i0 = s.interface_index;
  NecessaryReport rep;

  const double left_end = s.u.front() - KL;
  rep.checks.push_back({"left-endpoint-above-K-", left_end > 0.0, left_end, 0.0,
                        "u(-L_left) - K_left"});
  const double right_end = KR - s.u.back();
  rep.checks.push_back({"right-endpoint-below-K+", right_end > 0.0, right_end, 0.0,
                        "K_right - u(L_right)"});

  // Smallest increment of u across consecutive samples and smallest interior slope.
  double min_step = std::numeric_limits<double>::infinity();
  double min_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) {
    if (i == i0 + 1) continue;
    min_step = std::min(min_step, s.u[i] - s.u[i - 1]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) min_slope = std::min(min_slope, s.ux[i]);
  const double mono = std::min(min_step, min_slope);
  rep.checks.push_back({"strictly-increasing", mono > 0.0, mono, 0.0,
                        "min of consecutive increments and interior slopes"});

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : s.u) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range_margin = std::min(lo - KL, KR - hi);
  rep.checks.push_back({"range-within-(K-,K+)", range_margin > 0.0, range_margin, 0.0,
                        "min distance of u to K_left and K_right"});

  const double jump = std::abs(s.u[i0] - s.u[i0 + 1]);
  rep.checks.push_back({"interface-density-continuity", jump <= tol, jump, tol,
                        "|u(0-) - u(0+)|"});
  const double flux = std::abs(dL * s.ux[i0] - dR * s.ux[i0 + 1]);
  rep.checks.push_back({"interface-flux-continuity", flux <= tol, flux, tol,
                        "|d_left u_x(0-) - d_right u_x(0+)|"});

  const double nl = std::max(std::abs(s.ux.front()), s.neumann_left);
  rep.checks.push_back({"neumann-left", nl <= tol, nl, tol, "|u_x(-L_left)|"});
  const double nr = std::max(std::abs(s.ux.back()), s.neumann_right);
  rep.checks.push_back({"neumann-right", nr <= tol, nr, tol, "|u_x(L_right)|"});
  return rep;
}

}  // namespace patchss
