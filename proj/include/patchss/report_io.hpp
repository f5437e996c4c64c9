#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "patchss/audit.hpp"
#include "patchss/fd_validator.hpp"
#include "patchss/flow.hpp"
#include "patchss/steady_state.hpp"
#include "patchss/time_maps.hpp"

namespace patchss::io {

using nlohmann::json;

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

/// Writes text to a file, creating parent directories; throws std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);

/// x,u,u_x (x = 0 appears twice: left limit then right limit).
std::string solution_csv(const SteadyStateSolution& s);
/// x,u
std::string fd_solution_csv(const FdSolution& fd);
/// x,u,v,H for a flow run; H is recomputed from the potential.
std::string trajectory_csv(const FlowResult& run, const Potential& pot);
/// E,T,dTdE
std::string timemap_csv(const MonotonicityReport& r);

json thresholds_json(const Thresholds& t);
json match_json(const SteadyStateSolution& s);
json condition_json(const ConditionReport& r);
json audit_json(const AuditSummary& a);
json richards_audit_json(const RichardsAuditResult& r);
json necessary_json(const NecessaryReport& r);
json solve_report_json(const PatchProblem& problem, const SteadyStateSolution& s,
                       const NecessaryReport& necessary);
json fd_json(const FdSolution& fd);
json comparison_json(const FdComparison& c);
json timemap_json(const TimeMapSpec& spec, const MonotonicityReport& r);

/// Splits one CSV line on commas (no quoting is produced by these writers).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace patchss::io
