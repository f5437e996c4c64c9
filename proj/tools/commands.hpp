#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patchss/config.hpp"

namespace patchss::cli {

/// Exit statuses shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUncertified = 2;

struct CommonFlags {
  std::string config_path;  // empty: built-in reference configuration
  std::string out_dir = "out";
  std::vector<std::string> tolerances;  // NAME=VALUE
  std::optional<int> grid;
  std::optional<int> jobs;
};

/// Loads the config (or the defaults) and applies --tol, --grid and --jobs
/// for the named command.
RunConfig resolve_config(const std::string& command, const CommonFlags& flags);

int cmd_solve(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_audit(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_timemap(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_validate(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_phase(const RunConfig& config, const std::string& out_dir, std::ostream& log);

/// Full command line entry point; errors are reported on `err` and mapped to exit 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace patchss::cli
