#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patchss/fd_validator.hpp"
#include "patchss/reaction.hpp"
#include "patchss/steady_state.hpp"
#include "patchss/time_maps.hpp"

namespace patchss {

/// One patch as written in a config file. `rate` is "richards" (closed-form
/// potential) or a catalog entry "custom:richards", "custom:exp-logistic".
struct PatchConfig {
  std::string rate = "richards";
  double r = 1.0;
  double K = 1.0;
  double p = 1.0;
  double d = 1.0;
  double L = 1.0;
};

struct TimeMapConfig {
  /// "left", "right" or "all"
  std::string side = "all";
  /// "u0", "v0" or "all"
  std::string anchor = "all";
  /// Anchor value; only meaningful with a single side and anchor.
  std::optional<double> value;
  int points = 50;
  TimeMapOptions options;
};

struct SweepConfig {
  /// "<section>.<key>" of a numeric patch field, e.g. "right.p"
  std::string parameter;
  std::vector<double> values;
};

struct PhaseConfig {
  /// Level curves drawn on each side in addition to the matched arcs.
  int levels = 7;
  int samples = 200;
};

struct RunConfig {
  PatchConfig left{"richards", 1.0, 1.0, 1.0, 1.2, 1.0349};
  PatchConfig right{"richards", 1.0, 2.2, 1.0, 2.0, 1.1671};
  SolverOptions solver;
  FdOptions fd;
  int fd_n = 256;
  TimeMapConfig timemap;
  SweepConfig sweep;
  PhaseConfig phase;
  int jobs = 1;

  /// Builds and validates the problem (orientation, positivity, SA probe).
  PatchProblem problem() const;
  /// Same data without the K_left < K_right requirement.
  PatchCoefficients coefficients() const;
};

ReactionSpec make_reaction(const PatchConfig& patch);

/// Parses the flat "[section]" / "key = value" format. Unknown sections or keys,
/// malformed numbers and duplicate keys raise ConfigError naming the line.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Sets "<section>.<key>" from its textual value (same rules as the file format).
void set_config_value(RunConfig& config, const std::string& dotted_key, const std::string& value);

/// Applies a --tol NAME=VALUE override. Names: rtol, atol, root_tol,
/// residual_tol, match_slack, event_tol, fd_tol, timemap_tol, timemap_fd_step.
void apply_tolerance(RunConfig& config, const std::string& assignment);

/// Canonical text form, parseable by parse_config.
std::string format_config(const RunConfig& config);

}  // namespace patchss
