#include "patchss/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patchss/errors.hpp"
#include "patchss/quadrature.hpp"

namespace patchss {

namespace {

using Vec2 = std::array<double, 2>;

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner's dense output for DOPRI5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

Vec2 axpy(const Vec2& y, double h, std::initializer_list<std::pair<double, const Vec2*>> terms) {
  Vec2 out = y;
  for (const auto& [a, k] : terms) {
    out[0] += h * a * (*k)[0];
    out[1] += h * a * (*k)[1];
  }
  return out;
}

Vec2 dense_eval(const DenseTrajectory::Segment& seg, double theta) {
  const double t1 = 1.0 - theta;
  Vec2 y{};
  for (int i = 0; i < 2; ++i) {
    const auto& c = seg.c;
    y[i] = c[0][i] + theta * (c[1][i] + t1 * (c[2][i] + theta * (c[3][i] + t1 * c[4][i])));
  }
  return y;
}

Vec2 dense_dtheta(const DenseTrajectory::Segment& seg, double theta) {
  const double t1 = 1.0 - theta;
  Vec2 y{};
  for (int i = 0; i < 2; ++i) {
    const auto& c = seg.c;
    const double A = c[3][i] + t1 * c[4][i];
    const double dA = -c[4][i];
    const double B = c[2][i] + theta * A;
    const double dB = A + theta * dA;
    const double D = c[1][i] + t1 * B;
    const double dD = -B + t1 * dB;
    y[i] = D + theta * dD;
  }
  return y;
}

double event_value(const FlowEvent& ev, const Vec2& y) {
  switch (ev.kind) {
    case EventKind::VZero: return y[1];
    case EventKind::ULine: return y[0] - ev.level;
    case EventKind::VLine: return y[1] - ev.level;
  }
  return 0.0;
}

// Locates a sign change of g(dense(theta)) on [0, 1] by the Illinois variant
// of regula falsi; returns theta.
template <class G>
double locate_crossing(const DenseTrajectory::Segment& seg, G&& g, double g0, double g1,
                       double s_tol) {
  double lo = 0.0, hi = 1.0;
  double glo = g0, ghi = g1;
  int side = 0;
  const double theta_tol = s_tol / std::max(seg.h, 1e-300);
  for (int it = 0; it < 200 && hi - lo > theta_tol; ++it) {
    double t = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    const double gt = g(dense_eval(seg, t));
    if (gt == 0.0) return t;
    if (std::signbit(gt) == std::signbit(ghi)) {
      hi = t;
      ghi = gt;
      if (side == 1) glo *= 0.5;
      side = 1;
    } else {
      lo = t;
      glo = gt;
      if (side == -1) ghi *= 0.5;
      side = -1;
    }
  }
  return 0.5 * (lo + hi);
}

struct Integrator {
  const Potential& pot;
  double sign;  // +1 forward, -1 backward (field reversed in s)
  FlowOptions opt;

  Vec2 field(const Vec2& y) const {
    const double fu = pot.reaction().rate_extended(y[0]) / pot.diffusivity();
    return {sign * y[1], -sign * fu};
  }

  double energy(const Vec2& y) const {
    return 0.5 * y[1] * y[1] + pot.value(std::max(y[0], 0.0));
  }

  FlowResult run(PhaseState start, double duration, const FlowEvent* event) const;
};

FlowResult Integrator::run(PhaseState start, double duration, const FlowEvent* event) const {
  if (start.u < 0.0) throw DomainError("flow: start state has u < 0");
  if (!(duration > 0.0)) throw DomainError("flow: duration must be positive");

  FlowResult res;
  res.dense = DenseTrajectory(opt.x_start, sign);
  const double guard = opt.blowup_factor * pot.K_right();
  Vec2 y{start.u, start.v};
  const double E0 = energy(y);
  res.trajectory.push_back({opt.x_start, y[0], y[1]});

  const double h_max = duration / 16.0;
  Vec2 k1 = field(y);
  double h;
  {
    const double d0 = std::hypot(y[0], y[1]);
    const double dd = std::hypot(k1[0], k1[1]);
    h = (d0 > 1e-5 && dd > 1e-5) ? 0.01 * d0 / dd : 1e-6;
    h = std::min({h, h_max, duration});
  }

  double s = 0.0;
  double ev_sign = 0.0;  // sign of the event function, ignoring exact zeros
  if (event) {
    const double g = event_value(*event, y);
    if (g != 0.0) ev_sign = g > 0 ? 1.0 : -1.0;
  }
  double u_sign = y[0] > 0.0 ? 1.0 : 0.0;

  auto finish = [&](const Vec2& yf, double s_end, Termination t) {
    res.final = make_state(pot, std::max(yf[0], 0.0), yf[1]);
    res.final.u = yf[0];
    res.terminated = t;
    res.x_end = opt.x_start + sign * s_end;
    res.energy_drift = std::max(res.energy_drift, std::abs(res.final.E - E0));
    return res;
  };

  while (s < duration) {
    if (res.steps >= opt.max_steps) {
      throw NumericError("flow: step limit reached at x = " +
                         std::to_string(opt.x_start + sign * s));
    }
    bool last = false;
    if (s + h >= duration) {
      h = duration - s;
      last = true;
    }
    const Vec2 y2 = axpy(y, h, {{a21, &k1}});
    const Vec2 k2 = field(y2);
    const Vec2 k3 = field(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec2 k4 = field(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec2 k5 = field(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec2 k6 =
        field(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec2 y1 =
        axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const Vec2 k7 = field(y1);

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(0.5 * err);
    if (!std::isfinite(err)) err = 1e10;

    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < 1e-14 * std::max(1.0, duration)) {
        throw NumericError("flow: step size underflow", err);
      }
      continue;
    }

    DenseTrajectory::Segment seg;
    seg.s0 = s;
    seg.h = h;
    for (int i = 0; i < 2; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      seg.c[0][i] = y[i];
      seg.c[1][i] = ydiff;
      seg.c[2][i] = bspl;
      seg.c[3][i] = ydiff - h * k7[i] - bspl;
      seg.c[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                         d7 * k7[i]);
    }
    ++res.steps;

    // Earliest of: u = 0 crossing, user event.
    double theta_stop = 2.0;
    Termination stop_kind = Termination::Completed;
    if (u_sign > 0.0 && y1[0] <= 0.0) {
      const double t = (y1[0] == 0.0)
                           ? 1.0
                           : locate_crossing(seg, [](const Vec2& z) { return z[0]; }, y[0],
                                             y1[0], opt.event_tol);
      theta_stop = t;
      stop_kind = Termination::LeftHalfPlane;
    }
    if (event) {
      const double g1 = event_value(*event, y1);
      if (ev_sign == 0.0) {
        if (g1 != 0.0) ev_sign = g1 > 0 ? 1.0 : -1.0;
      } else if (g1 == 0.0 || (g1 > 0) != (ev_sign > 0)) {
        const double g0 = event_value(*event, y);
        const double t =
            (g1 == 0.0) ? 1.0
                        : locate_crossing(
                              seg, [&](const Vec2& z) { return event_value(*event, z); },
                              g0 == 0.0 ? ev_sign * 1e-300 : g0, g1, opt.event_tol);
        if (t < theta_stop) {
          theta_stop = t;
          stop_kind = Termination::Event;
        }
      }
    }
    if (theta_stop <= 1.0) {
      seg.h = h;
      res.dense.push(seg);
      const Vec2 yc = dense_eval(seg, theta_stop);
      const double s_c = s + theta_stop * h;
      res.trajectory.push_back({opt.x_start + sign * s_c, yc[0], yc[1]});
      return finish(stop_kind == Termination::LeftHalfPlane ? Vec2{0.0, yc[1]} : yc, s_c,
                    stop_kind);
    }

    res.dense.push(seg);
    s = last ? duration : s + h;
    y = y1;
    k1 = k7;
    res.trajectory.push_back({opt.x_start + sign * s, y[0], y[1]});
    res.energy_drift = std::max(res.energy_drift, std::abs(energy(y) - E0));
    if (y[0] > 0.0) u_sign = 1.0;
    if (std::abs(y[0]) > guard || std::abs(y[1]) > guard) {
      return finish(y, s, Termination::BlowUpGuard);
    }

    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h = std::min(h * fac, h_max);
  }
  return finish(y, duration, Termination::Completed);
}

}  // namespace

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::LeftHalfPlane: return "left_half_plane";
    case Termination::BlowUpGuard: return "blow_up_guard";
    case Termination::Event: return "event";
  }
  return "unknown";
}

PhaseState make_state(const Potential& pot, double u, double v) {
  return {u, v, 0.5 * v * v + pot.value(u)};
}

double DenseTrajectory::x_end() const {
  if (segments_.empty()) return x_start_;
  const auto& last = segments_.back();
  return x_start_ + sign_ * (last.s0 + last.h);
}

const DenseTrajectory::Segment& DenseTrajectory::locate(double s) const {
  if (segments_.empty()) throw DomainError("dense trajectory is empty");
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double value, const Segment& seg) { return value < seg.s0; });
  if (it == segments_.begin()) return segments_.front();
  return *(it - 1);
}

std::array<double, 2> DenseTrajectory::state(double x) const {
  const double s = sign_ * (x - x_start_);
  const Segment& seg = locate(s);
  const double theta = std::clamp((s - seg.s0) / seg.h, 0.0, 1.0);
  return dense_eval(seg, theta);
}

std::array<double, 2> DenseTrajectory::slope(double x) const {
  const double s = sign_ * (x - x_start_);
  const Segment& seg = locate(s);
  const double theta = std::clamp((s - seg.s0) / seg.h, 0.0, 1.0);
  Vec2 d = dense_dtheta(seg, theta);
  d[0] *= sign_ / seg.h;
  d[1] *= sign_ / seg.h;
  return d;
}

FlowResult flow(const Potential& pot, PhaseState start, double duration, Direction direction,
                const FlowOptions& options) {
  const Integrator integ{pot, direction == Direction::Forward ? 1.0 : -1.0, options};
  return integ.run(start, duration, nullptr);
}

FlowResult flow(const PatchProblem& problem, Side side, PhaseState start, double duration,
                Direction direction, const FlowOptions& options) {
  const Potential pot(problem, side);
  return flow(pot, start, duration, direction, options);
}

FlowResult flow_until(const Potential& pot, PhaseState start, FlowEvent event,
                      double max_duration, Direction direction, const FlowOptions& options) {
  const Integrator integ{pot, direction == Direction::Forward ? 1.0 : -1.0, options};
  return integ.run(start, max_duration, &event);
}

double level_curve_v(const Potential& pot, double E, double u) {
  const double gap = E - pot.value(u);
  if (gap < -1e-12) throw DomainError("level_curve_v: energy below the potential at u");
  return std::sqrt(2.0 * std::max(gap, 0.0));
}

double transit_time_quadrature(const Potential& pot, double u_from, double u_to, double E) {
  const double a = std::min(u_from, u_to);
  const double b = std::max(u_from, u_to);
  if (a == b) return 0.0;
  if (a < 0.0) throw DomainError("transit_time_quadrature: negative density");
  for (double u : {a, b}) {
    if (E - pot.value(u) < -1e-12) {
      throw DomainError("transit_time_quadrature: endpoint outside the energy level set");
    }
  }
  constexpr int probes = 256;
  for (int i = 1; i < probes; ++i) {
    const double u = a + (b - a) * i / probes;
    if (!(E - pot.value(u) > 0.0)) {
      throw DomainError("transit_time_quadrature: level curve does not traverse [u_from, u_to] "
                        "(turning point at u = " + std::to_string(u) + ")");
    }
  }
  const double m = 0.5 * (a + b);
  const double w_max = std::sqrt(m - a);
  // Endpoints within level_tol of the level set are turning points.
  const double level_tol = 1e-12 * std::max(1.0, std::abs(E));
  auto end_gap = [&](double end) {
    const double g = E - pot.value(end);
    return g <= level_tol ? 0.0 : g;
  };
  // E - F(end + sign * s). Close to the endpoint F(end) - F(end + sign * s)
  // cancels, so a cubic Taylor expansion replaces the difference there.
  auto gap = [&](double end, double sign, double s) {
    const double base = end_gap(end);
    if (s > 1e-4 * std::max(1.0, end)) return base + pot.value(end) - pot.value(end + sign * s);
    const double d1 = pot.derivative(end, 1), d2 = pot.derivative(end, 2),
                 d3 = pot.derivative(end, 3);
    return base - sign * s * (d1 + sign * s * (d2 / 2.0 + sign * s * d3 / 6.0));
  };
  auto integrand = [&](double end, double sign, double w) {
    const double g = gap(end, sign, w * w);
    if (g > 0.0) return 2.0 * w / std::sqrt(2.0 * g);
    // w -> 0 at a turning point: 2w / sqrt(2 |F'(end)| w^2)
    return 2.0 / std::sqrt(2.0 * std::abs(pot.derivative(end, 1)));
  };
  // With a small positive E - F(end) the integrand rises from 0 to its
  // turning-point value over w ~ sqrt((E - F(end)) / |F'(end)|); a breakpoint
  // at a few times that width keeps the adaptive rule from stepping over it.
  auto half = [&](double end, double sign, double width) {
    auto g = [&](double w) { return integrand(end, sign, w); };
    const double base = end_gap(end);
    const double slope = std::abs(pot.derivative(end, 1));
    const double knee = slope > 0.0 ? 8.0 * std::sqrt(base / slope) : 0.0;
    if (knee > 0.0 && knee < 0.5 * width) {
      return quad::adaptive_gauss_kronrod(g, 0.0, knee, 1e-14, 1e-12).value +
             quad::adaptive_gauss_kronrod(g, knee, width, 1e-13, 1e-12).value;
    }
    return quad::adaptive_gauss_kronrod(g, 0.0, width, 1e-13, 1e-12).value;
  };
  return half(a, 1.0, w_max) + half(b, -1.0, std::sqrt(b - m));
}

}  // namespace patchss
