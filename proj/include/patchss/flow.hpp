#pragma once

#include <array>
#include <vector>

#include "patchss/reaction.hpp"

namespace patchss {

/// Point of the half-plane u >= 0 together with its energy v^2/2 + F(u).
struct PhaseState {
  double u;
  double v;
  double E;
};

PhaseState make_state(const Potential& pot, double u, double v);

enum class Direction { Forward, Backward };

enum class Termination { Completed, LeftHalfPlane, BlowUpGuard, Event };

const char* termination_name(Termination t);

struct TrajectorySample {
  double x;
  double u;
  double v;
};

struct FlowOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// |u| or |v| above blowup_factor * K_right stops the run.
  double blowup_factor = 100.0;
  /// x-coordinate assigned to the start state.
  double x_start = 0.0;
  /// x-tolerance for event and u = 0 crossing location.
  double event_tol = 1e-12;
  int max_steps = 2'000'000;
};

/// Piecewise quartic continuous extension of an integrator run, addressed by x.
class DenseTrajectory {
 public:
  struct Segment {
    double s0;
    double h;
    std::array<std::array<double, 2>, 5> c;
  };

  DenseTrajectory() = default;
  DenseTrajectory(double x_start, double sign) : x_start_(x_start), sign_(sign) {}

  void push(const Segment& seg) { segments_.push_back(seg); }
  bool empty() const { return segments_.empty(); }
  double x_begin() const { return x_start_; }
  double x_end() const;
  /// (u, v) at x; x must lie within the covered range (clamped to it).
  std::array<double, 2> state(double x) const;
  /// (du/dx, dv/dx) of the interpolant at x.
  std::array<double, 2> slope(double x) const;
  const std::vector<Segment>& segments() const { return segments_; }
  double sign() const { return sign_; }

 private:
  const Segment& locate(double s) const;
  double x_start_ = 0.0;
  double sign_ = 1.0;
  std::vector<Segment> segments_;
};

struct FlowResult {
  PhaseState final;
  /// Accepted integrator nodes, x monotone in the flow direction.
  std::vector<TrajectorySample> trajectory;
  DenseTrajectory dense;
  /// max |H - H(start)| over accepted nodes.
  double energy_drift = 0.0;
  Termination terminated = Termination::Completed;
  /// x at which the run stopped.
  double x_end = 0.0;
  int steps = 0;
};

enum class EventKind { VZero, ULine, VLine };

struct FlowEvent {
  EventKind kind;
  double level = 0.0;
};

/// Integrates u' = v, v' = -f(u)/d for an x-duration. Backward integrates the
/// time-reversed field, so x decreases from x_start.
FlowResult flow(const Potential& pot, PhaseState start, double duration, Direction direction,
                const FlowOptions& options = {});
FlowResult flow(const PatchProblem& problem, Side side, PhaseState start, double duration,
                Direction direction, const FlowOptions& options = {});

/// Same as flow, but stops at the first crossing of the event line after the
/// start (Termination::Event). Reaching max_duration without a crossing gives
/// Termination::Completed.
FlowResult flow_until(const Potential& pot, PhaseState start, FlowEvent event,
                      double max_duration, Direction direction, const FlowOptions& options = {});

/// +sqrt(2(E - F(u))); tiny negative arguments (> -1e-12) clamp to zero.
double level_curve_v(const Potential& pot, double E, double u);

/// x-length of the level-curve arc with energy E between u_from and u_to,
/// i.e. the integral of du / sqrt(2(E - F(u))). Endpoint inverse-square-root
/// singularities are removed by u = a + w^2 / u = b - w^2 substitutions. An
/// endpoint with |E - F| <= 1e-12 max(1, |E|) is treated as a turning point.
double transit_time_quadrature(const Potential& pot, double u_from, double u_to, double E);

}  // namespace patchss
