#include "patchss/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace patchss::io {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string solution_csv(const SteadyStateSolution& s) {
  std::ostringstream os;
  os << "x,u,u_x\n";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    os << format_number(s.x[i]) << ',' << format_number(s.u[i]) << ','
       << format_number(s.ux[i]) << '\n';
  }
  return os.str();
}

std::string fd_solution_csv(const FdSolution& fd) {
  std::ostringstream os;
  os << "x,u\n";
  for (std::size_t i = 0; i < fd.x.size(); ++i) {
    os << format_number(fd.x[i]) << ',' << format_number(fd.u[i]) << '\n';
  }
  return os.str();
}

std::string trajectory_csv(const FlowResult& run, const Potential& pot) {
  std::ostringstream os;
  os << "x,u,v,H\n";
  for (const auto& t : run.trajectory) {
    os << format_number(t.x) << ',' << format_number(t.u) << ',' << format_number(t.v) << ','
       << format_number(0.5 * t.v * t.v + pot.value(std::max(t.u, 0.0))) << '\n';
  }
  return os.str();
}

std::string timemap_csv(const MonotonicityReport& r) {
  std::ostringstream os;
  os << "E,T,dTdE\n";
  for (const auto& s : r.samples) {
    os << format_number(s.E) << ',' << format_number(s.T) << ',' << format_number(s.dTdE)
       << '\n';
  }
  return os.str();
}

json thresholds_json(const Thresholds& t) {
  return {{"alpha_minus", t.alpha_minus}, {"beta_plus", t.beta_plus}};
}

json match_json(const SteadyStateSolution& s) {
  return {{"alpha_star", s.match.alpha_star},
          {"beta_star", s.match.beta_star},
          {"interface_u", s.match.interface_u},
          {"ux_left_interface", s.ux_left_interface},
          {"ux_right_interface", s.ux_right_interface},
          {"flux_residual", s.match.flux_residual},
          {"density_residual", s.match.density_residual},
          {"neumann_left", s.neumann_left},
          {"neumann_right", s.neumann_right},
          {"ode_residual_left", s.ode_residual_left},
          {"ode_residual_right", s.ode_residual_right},
          {"thresholds", thresholds_json(s.thresholds)},
          {"certified", s.certified}};
}

json condition_json(const ConditionReport& r) {
  json witnesses = json::array();
  for (const auto& w : r.witnesses) witnesses.push_back({{"u", w.u}, {"value", w.value}});
  return {{"condition", condition_name(r.condition)},
          {"verdict", verdict_name(r.verdict)},
          {"evidence", r.evidence},
          {"grid", r.grid},
          {"samples", r.samples.size()},
          {"witnesses", witnesses},
          {"note", r.note}};
}

json audit_json(const AuditSummary& a) {
  json reports = json::array();
  for (const auto& r : a.reports) reports.push_back(condition_json(r));
  return {{"certified", a.certified}, {"route", a.route}, {"conditions", reports}};
}

json richards_audit_json(const RichardsAuditResult& r) {
  return {{"p", r.p},
          {"Q_max_on_unit_interval", r.Q_max_on_unit_interval},
          {"Q_identity_gap", r.Q_identity_gap},
          {"P_sign_change", r.P_sign_change},
          {"P_at_zero", r.P_at_zero},
          {"P_at_one", r.P_at_one},
          {"R_prime_min", r.R_prime_min},
          {"R_doubleprime_min", r.R_doubleprime_min},
          {"C1plus", verdict_name(r.C1plus)},
          {"C2plus", verdict_name(r.C2plus)}};
}

json necessary_json(const NecessaryReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  return {{"all_passed", r.all_passed()}, {"checks", checks}};
}

json solve_report_json(const PatchProblem& problem, const SteadyStateSolution& s,
                       const NecessaryReport& necessary) {
  json scan = json::array();
  for (std::size_t i = 0; i < s.scan.alpha.size(); ++i) {
    scan.push_back({{"alpha", s.scan.alpha[i]}, {"mismatch", s.scan.mismatch[i]}});
  }
  json problem_json = {
      {"left", {{"rate", problem.reaction(Side::Left).describe()},
                {"d", problem.diffusivity(Side::Left)},
                {"L", problem.length(Side::Left)}}},
      {"right", {{"rate", problem.reaction(Side::Right).describe()},
                 {"d", problem.diffusivity(Side::Right)},
                 {"L", problem.length(Side::Right)}}}};
  return {{"problem", problem_json},
          {"certified", s.certified},
          {"warnings", s.warnings},
          {"match", match_json(s)},
          {"scan",
           {{"points", s.scan.alpha.size()},
            {"sign_changes", s.scan.sign_changes},
            {"strictly_decreasing", s.scan.strictly_decreasing},
            {"samples", scan}}},
          {"audit", audit_json(s.audit)},
          {"necessary_conditions", necessary_json(necessary)}};
}

json fd_json(const FdSolution& fd) {
  return {{"n_left", fd.n_left},
          {"n_right", fd.n_right},
          {"h_left", fd.h_left},
          {"h_right", fd.h_right},
          {"iterations", fd.iterations},
          {"residual", fd.residual},
          {"residual_history", fd.residual_history},
          {"interface_flux_left", fd.interface_flux_left},
          {"interface_flux_right", fd.interface_flux_right},
          {"positive", fd.positive},
          {"increasing", fd.increasing},
          {"flags", fd.flags}};
}

json comparison_json(const FdComparison& c) {
  return {{"linf", c.linf}, {"l2", c.l2}, {"interface_flux", c.interface_flux}};
}

json timemap_json(const TimeMapSpec& spec, const MonotonicityReport& r) {
  return {{"side", side_name(spec.side)},
          {"anchor", anchor_name(spec.anchor)},
          {"value", spec.value},
          {"E_lo", spec.E_lo},
          {"E_hi", spec.E_hi},
          {"points", r.samples.size()},
          {"strictly_increasing", r.strictly_increasing},
          {"derivative_positive", r.derivative_positive},
          {"min_gap", r.min_gap}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace patchss::io
