#include "patchss/fd_validator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "patchss/errors.hpp"
#include "patchss/kernels.hpp"
#include "patchss/parallel.hpp"

namespace patchss {

namespace {

void rates(const ReactionSpec& spec, std::span<const double> u, std::span<double> out) {
  if (const auto* rp = spec.richards_params()) {
    bool nonneg = std::all_of(u.begin(), u.end(), [](double v) { return v >= 0.0; });
    if (nonneg) {
      kernels::richards_rate(u, rp->r, rp->K, rp->p, out);
      return;
    }
  }
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = spec.rate_extended(u[i]);
}

double rate_slope(const ReactionSpec& spec, double u) {
  return spec.rate_derivative(std::max(u, 0.0), 1);
}

// Discrete system on nodes 0..N with the interface at node m = n_left.
class System {
 public:
  System(const PatchCoefficients& c, FdGrid g)
      : c_(c),
        m_(static_cast<std::size_t>(g.n_left)),
        n_(static_cast<std::size_t>(g.n_left + g.n_right)),
        hl_(c.L_left / g.n_left),
        hr_(c.L_right / g.n_right) {}

  std::size_t size() const { return n_ + 1; }
  double h_left() const { return hl_; }
  double h_right() const { return hr_; }

  void residual(const std::vector<double>& u, std::vector<double>& r) const {
    r.assign(size(), 0.0);
    std::vector<double> f(size());
    rates(c_.left, std::span(u).subspan(0, m_ + 1), std::span(f).subspan(0, m_ + 1));
    std::vector<double> fr(n_ - m_ + 1);
    rates(c_.right, std::span(u).subspan(m_, n_ - m_ + 1), fr);

    const double cl = c_.d_left / (hl_ * hl_);
    const double cr = c_.d_right / (hr_ * hr_);
    if (m_ >= 2) {
      kernels::second_difference(std::span(u).subspan(0, m_ + 1), cl,
                                 std::span<const double>(f).subspan(1, m_ - 1),
                                 std::span(r).subspan(1, m_ - 1));
    }
    if (n_ - m_ >= 2) {
      kernels::second_difference(std::span(u).subspan(m_, n_ - m_ + 1), cr,
                                 std::span<const double>(fr).subspan(1, n_ - m_ - 1),
                                 std::span(r).subspan(m_ + 1, n_ - m_ - 1));
    }
    // Mirrored ghosts at the outer ends.
    r[0] = 2.0 * cl * (u[1] - u[0]) + f[0];
    r[n_] = 2.0 * cr * (u[n_ - 1] - u[n_]) + fr[n_ - m_];
    // Flux balance over the control volume [-h_left/2, h_right/2].
    const double w = 0.5 * (hl_ + hr_);
    r[m_] = (c_.d_right * (u[m_ + 1] - u[m_]) / hr_ - c_.d_left * (u[m_] - u[m_ - 1]) / hl_ +
             0.5 * hl_ * f[m_] + 0.5 * hr_ * fr[0]) /
            w;
  }

  // Tridiagonal Jacobian: sub[i] couples to i-1, sup[i] to i+1.
  void jacobian(const std::vector<double>& u, std::vector<double>& sub, std::vector<double>& dia,
                std::vector<double>& sup) const {
    const std::size_t N = size();
    sub.assign(N, 0.0);
    dia.assign(N, 0.0);
    sup.assign(N, 0.0);
    const double cl = c_.d_left / (hl_ * hl_);
    const double cr = c_.d_right / (hr_ * hr_);
    for (std::size_t i = 1; i < m_; ++i) {
      sub[i] = cl;
      sup[i] = cl;
      dia[i] = -2.0 * cl + rate_slope(c_.left, u[i]);
    }
    for (std::size_t i = m_ + 1; i < n_; ++i) {
      sub[i] = cr;
      sup[i] = cr;
      dia[i] = -2.0 * cr + rate_slope(c_.right, u[i]);
    }
    sup[0] = 2.0 * cl;
    dia[0] = -2.0 * cl + rate_slope(c_.left, u[0]);
    sub[n_] = 2.0 * cr;
    dia[n_] = -2.0 * cr + rate_slope(c_.right, u[n_]);
    const double w = 0.5 * (hl_ + hr_);
    sub[m_] = c_.d_left / hl_ / w;
    sup[m_] = c_.d_right / hr_ / w;
    dia[m_] = (-c_.d_right / hr_ - c_.d_left / hl_ + 0.5 * hl_ * rate_slope(c_.left, u[m_]) +
               0.5 * hr_ * rate_slope(c_.right, u[m_])) /
              w;
  }

  // Rounding floor of the residual rows: the second difference of values of
  // size |u| carries errors of order eps * |u| * d / h^2.
  double residual_floor(const std::vector<double>& u) const {
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    const double coef = std::max(c_.d_left / (hl_ * hl_), c_.d_right / (hr_ * hr_));
    return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, umax) * coef;
  }

 private:
  const PatchCoefficients& c_;
  std::size_t m_;
  std::size_t n_;
  double hl_;
  double hr_;
};

void thomas(std::vector<double> sub, std::vector<double> dia, std::vector<double> sup,
            std::vector<double>& rhs) {
  const std::size_t n = dia.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (dia[i - 1] == 0.0) throw NumericError("fd_steady_solve: singular Jacobian");
    const double w = sub[i] / dia[i - 1];
    dia[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (dia[n - 1] == 0.0) throw NumericError("fd_steady_solve: singular Jacobian");
  rhs[n - 1] /= dia[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / dia[i];
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

FdSolution fd_steady_solve(const PatchCoefficients& c, FdGrid grid, FdInit init,
                           const FdOptions& opt) {
  if (grid.n_left < 16 || grid.n_right < 16) {
    throw DomainError("fd_steady_solve: n_left and n_right must be at least 16");
  }
  if (!(c.d_left > 0 && c.d_right > 0 && c.L_left > 0 && c.L_right > 0)) {
    throw DomainError("fd_steady_solve: diffusivities and lengths must be positive");
  }
  const System sys(c, grid);
  FdSolution sol;
  sol.n_left = grid.n_left;
  sol.n_right = grid.n_right;
  sol.h_left = sys.h_left();
  sol.h_right = sys.h_right();
  sol.d_left = c.d_left;
  sol.d_right = c.d_right;
  const std::size_t N = sys.size();
  const std::size_t m = static_cast<std::size_t>(grid.n_left);
  sol.x.resize(N);
  for (std::size_t i = 0; i <= m; ++i) {
    sol.x[i] = -c.L_left + static_cast<double>(i) * sol.h_left;
  }
  sol.x[m] = 0.0;
  for (std::size_t i = m + 1; i < N; ++i) {
    sol.x[i] = static_cast<double>(i - m) * sol.h_right;
  }
  sol.x.back() = c.L_right;

  std::vector<double>& u = sol.u;
  u.resize(N);
  const double KL = c.left.carrying_capacity(), KR = c.right.carrying_capacity();
  switch (init.kind) {
    case FdInitKind::FromShooting:
      if (init.shooting == nullptr) throw DomainError("fd_steady_solve: missing shooting profile");
      for (std::size_t i = 0; i < N; ++i) u[i] = init.shooting->evaluate(sol.x[i]);
      break;
    case FdInitKind::Linear:
      for (std::size_t i = 0; i < N; ++i) {
        u[i] = KL + (KR - KL) * (sol.x[i] + c.L_left) / (c.L_left + c.L_right);
      }
      break;
    case FdInitKind::Constant:
      std::fill(u.begin(), u.end(), init.constant);
      break;
  }

  std::vector<double> r, trial, rt, sub, dia, sup;
  sys.residual(u, r);
  double norm = max_abs(r);
  sol.residual_history.push_back(norm);
  int it = 0;
  bool converged = norm <= opt.tol;
  while (!converged && it < opt.max_iterations) {
    ++it;
    sys.jacobian(u, sub, dia, sup);
    std::vector<double> delta(r);
    for (double& v : delta) v = -v;
    thomas(sub, dia, sup, delta);

    double lambda = 1.0;
    double trial_norm = 0.0;
    for (;;) {
      trial = u;
      for (std::size_t i = 0; i < N; ++i) trial[i] += lambda * delta[i];
      sys.residual(trial, rt);
      trial_norm = max_abs(rt);
      if (trial_norm <= norm || lambda <= opt.damping_floor) break;
      lambda *= 0.5;
    }
    const double step = lambda * max_abs(delta);
    u.swap(trial);
    r.swap(rt);
    norm = trial_norm;
    sol.residual_history.push_back(norm);
    // Fine grids cannot reach an absolute 1e-10 in d u_xx + f because of
    // cancellation in the second difference; accept the rounding floor once
    // Newton has stopped moving.
    const double floor = sys.residual_floor(u);
    converged = norm <= opt.tol ||
                (norm <= floor && step <= 1e-13 * std::max(1.0, max_abs(u)));
  }
  sol.iterations = it;
  sol.residual = norm;
  if (!converged) {
    std::ostringstream msg;
    msg << "fd_steady_solve: Newton did not converge in " << opt.max_iterations
        << " iterations; residual history:";
    for (double h : sol.residual_history) msg << ' ' << h;
    throw NumericError(msg.str(), norm);
  }

  const double hl = sol.h_left, hr = sol.h_right;
  sol.interface_flux_left =
      c.d_left * (u[m] - u[m - 1]) / hl - 0.5 * hl * c.left.rate_extended(u[m]);
  sol.interface_flux_right =
      c.d_right * (u[m + 1] - u[m]) / hr + 0.5 * hr * c.right.rate_extended(u[m]);

  for (std::size_t i = 0; i < N; ++i) {
    if (!(u[i] > 0.0)) sol.positive = false;
    if (i > 0 && !(u[i] > u[i - 1])) sol.increasing = false;
  }
  if (!sol.positive) sol.flags.push_back("non-positive");
  if (!sol.increasing) sol.flags.push_back("non-increasing");
  return sol;
}

FdSolution fd_steady_solve(const PatchProblem& problem, FdGrid grid, FdInit init,
                           const FdOptions& options) {
  return fd_steady_solve(problem.coefficients(), grid, init, options);
}

FdComparison compare_solutions(const FdSolution& fd, const SteadyStateSolution& shooting) {
  if (fd.x.empty() || shooting.x.empty()) throw DomainError("compare_solutions: empty solution");
  const double tol = 1e-9 * std::max(1.0, shooting.L_left + shooting.L_right);
  if (std::abs(fd.x.front() - shooting.x.front()) > tol ||
      std::abs(fd.x.back() - shooting.x.back()) > tol) {
    throw DomainError("compare_solutions: domains differ");
  }
  FdComparison out{0.0, 0.0, 0.0};
  double sum = 0.0;
  for (std::size_t i = 0; i < fd.x.size(); ++i) {
    const double d = fd.u[i] - shooting.evaluate(fd.x[i]);
    out.linf = std::max(out.linf, std::abs(d));
    double w = 0.0;
    if (i > 0) w += 0.5 * (fd.x[i] - fd.x[i - 1]);
    if (i + 1 < fd.x.size()) w += 0.5 * (fd.x[i + 1] - fd.x[i]);
    sum += w * d * d;
  }
  out.l2 = std::sqrt(sum);
  // Both fluxes are averaged over the two one-sided values.
  const std::size_t k = shooting.interface_index;
  const double sh_flux = 0.5 * (fd.d_left * shooting.ux[k] + fd.d_right * shooting.ux[k + 1]);
  const double fd_flux = 0.5 * (fd.interface_flux_left + fd.interface_flux_right);
  out.interface_flux = std::abs(fd_flux - sh_flux);
  return out;
}

std::vector<FdSolution> fd_multistart(const PatchCoefficients& coefficients, FdGrid grid,
                                      const std::vector<FdInit>& inits, const FdOptions& options,
                                      int jobs) {
  return parallel_map(inits.size(), jobs, [&](std::size_t i) {
    return fd_steady_solve(coefficients, grid, inits[i], options);
  });
}

}  // namespace patchss
