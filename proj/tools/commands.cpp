#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "patchss/audit.hpp"
#include "patchss/errors.hpp"
#include "patchss/fd_validator.hpp"
#include "patchss/flow.hpp"
#include "patchss/parallel.hpp"
#include "patchss/report_io.hpp"
#include "patchss/steady_state.hpp"
#include "patchss/time_maps.hpp"

namespace patchss::cli {

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string fmt(double v) { return io::format_number(v); }

struct Variant {
  Side side;
  AnchorKind anchor;
  double default_value;
};

// Anchors of the reference orbit families.
const Variant kVariants[] = {
    {Side::Right, AnchorKind::ULine, 1.1},
    {Side::Right, AnchorKind::VLine, 0.4491},
    {Side::Left, AnchorKind::ULine, 1.75},
    {Side::Left, AnchorKind::VLine, 0.7348},
};

}  // namespace

RunConfig resolve_config(const std::string& command, const CommonFlags& flags) {
  RunConfig c = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
  for (const auto& t : flags.tolerances) apply_tolerance(c, t);
  if (flags.jobs) {
    if (*flags.jobs < 1) throw ConfigError("--jobs must be at least 1");
    c.jobs = *flags.jobs;
  }
  c.solver.jobs = c.jobs;
  if (flags.grid) {
    const int g = *flags.grid;
    if (command == "solve") {
      if (g < 2) throw ConfigError("--grid must be at least 2 for solve");
      c.solver.profile_points = g;
    } else if (command == "audit") {
      if (g < 16) throw ConfigError("--grid must be at least 16 for audit");
      c.solver.audit_grid = g;
    } else if (command == "timemap") {
      if (g < 3) throw ConfigError("--grid must be at least 3 for timemap");
      c.timemap.points = g;
    } else if (command == "validate") {
      if (g < 16) throw ConfigError("--grid must be at least 16 for validate");
      c.fd_n = g;
    } else if (command == "phase") {
      if (g < 2) throw ConfigError("--grid must be at least 2 for phase");
      c.phase.samples = g;
    } else if (command == "sweep") {
      if (g < 2) throw ConfigError("--grid must be at least 2 for sweep");
      c.solver.scan_points = g;
    }
  }
  return c;
}

int cmd_solve(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const PatchProblem problem = config.problem();
  const SteadyStateSolution sol = solve_steady_state(problem, config.solver);
  const NecessaryReport nec = verify_necessary_conditions(problem, sol, config.solver.residual_tol);
  io::write_file(join(out_dir, "solution.csv"), io::solution_csv(sol));
  io::write_file(join(out_dir, "match.json"), io::match_json(sol).dump(2) + "\n");
  io::write_file(join(out_dir, "report.json"),
                 io::solve_report_json(problem, sol, nec).dump(2) + "\n");
  log << "alpha* = " << fmt(sol.match.alpha_star) << "  beta* = " << fmt(sol.match.beta_star)
      << "  u(0) = " << fmt(sol.match.interface_u) << '\n'
      << "flux residual " << fmt(sol.match.flux_residual) << ", density residual "
      << fmt(sol.match.density_residual) << ", Neumann " << fmt(sol.neumann_left) << " / "
      << fmt(sol.neumann_right) << '\n';
  for (const auto& w : sol.warnings) log << "warning: " << w << '\n';
  for (const auto& c : nec.checks) {
    if (!c.passed) log << "necessary condition failed: " << c.name << " (" << fmt(c.value) << ")\n";
  }
  const bool ok = sol.certified && nec.all_passed();
  log << (ok ? "certified unique positive steady state" : "solution not certified") << '\n';
  return ok ? kExitOk : kExitUncertified;
}

int cmd_audit(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const PatchProblem problem = config.problem();
  const AuditSummary summary = audit_problem(problem, config.solver.audit_grid);
  io::json j = io::audit_json(summary);
  for (Side side : {Side::Left, Side::Right}) {
    if (const auto* rp = problem.reaction(side).richards_params()) {
      j["richards_closed_form"][side_name(side)] =
          io::richards_audit_json(richards_closed_form_audit(rp->p));
    }
  }
  io::write_file(join(out_dir, "audit.json"), j.dump(2) + "\n");
  for (const auto& r : summary.reports) {
    log << condition_name(r.condition) << ": " << verdict_name(r.verdict) << " (" << r.evidence
        << ")\n";
  }
  log << (summary.certified ? "sufficient conditions hold via " + summary.route
                            : std::string("sufficient conditions not established"))
      << '\n';
  return summary.certified ? kExitOk : kExitUncertified;
}

int cmd_timemap(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const PatchProblem problem = config.problem();
  const TimeMapConfig& tc = config.timemap;
  std::vector<Variant> chosen;
  for (const Variant& v : kVariants) {
    if (tc.side != "all" && tc.side != side_name(v.side)) continue;
    if (tc.anchor != "all" && tc.anchor != anchor_name(v.anchor)) continue;
    chosen.push_back(v);
  }
  if (tc.value && chosen.size() != 1) {
    throw ConfigError("timemap.value needs a single side and anchor");
  }
  io::json summary = io::json::array();
  bool all_monotone = true;
  for (const Variant& v : chosen) {
    const Potential pot(problem, v.side);
    const double value = tc.value.value_or(v.default_value);
    const TimeMapSpec spec = make_time_map_spec(pot, v.anchor, value);
    const MonotonicityReport rep =
        monotonicity_scan(spec, pot, tc.points, tc.options, config.jobs);
    const std::string name =
        std::string("timemap_") + side_name(v.side) + "_" + anchor_name(v.anchor) + ".csv";
    io::write_file(join(out_dir, name), io::timemap_csv(rep));
    io::json entry = io::timemap_json(spec, rep);
    entry["file"] = name;
    summary.push_back(entry);
    const bool mono = rep.strictly_increasing && rep.derivative_positive;
    all_monotone = all_monotone && mono;
    log << side_name(v.side) << ' ' << anchor_name(v.anchor) << " = " << fmt(value) << ": "
        << (mono ? "monotone increasing" : "NOT monotone") << " on (" << fmt(spec.E_lo) << ", "
        << fmt(spec.E_hi) << ")\n";
  }
  io::write_file(join(out_dir, "timemap.json"), summary.dump(2) + "\n");
  return all_monotone ? kExitOk : kExitUncertified;
}

int cmd_sweep(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const SweepConfig& sw = config.sweep;
  if (sw.parameter.empty() || sw.values.empty()) {
    throw ConfigError("sweep needs [sweep] parameter and values");
  }
  struct Row {
    double value = 0.0;
    std::string status;
    double alpha_star = std::nan("");
    double beta_star = std::nan("");
    int sign_changes = -1;
    std::string message;
  };
  const auto rows = parallel_map(sw.values.size(), config.jobs, [&](std::size_t i) {
    Row row;
    row.value = sw.values[i];
    row.status = "failed";
    try {
      RunConfig c = config;
      set_config_value(c, sw.parameter, fmt(sw.values[i]));
      c.solver.jobs = 1;
      const PatchProblem problem = c.problem();
      const SteadyStateSolution sol = solve_steady_state(problem, c.solver);
      const NecessaryReport nec = verify_necessary_conditions(problem, sol, c.solver.residual_tol);
      row.alpha_star = sol.match.alpha_star;
      row.beta_star = sol.match.beta_star;
      row.sign_changes = sol.scan.sign_changes;
      row.status = sol.certified && nec.all_passed() ? "certified" : "uncertified";
    } catch (const std::exception& e) {
      row.message = e.what();
    }
    return row;
  });
  std::ostringstream csv;
  csv << "parameter,value,certification,alpha_star,beta_star,sign_changes,message\n";
  bool any_failed = false;
  for (const Row& r : rows) {
    std::string msg = r.message;
    for (char& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    csv << sw.parameter << ',' << fmt(r.value) << ',' << r.status << ','
        << (std::isnan(r.alpha_star) ? "" : fmt(r.alpha_star)) << ','
        << (std::isnan(r.beta_star) ? "" : fmt(r.beta_star)) << ',' << r.sign_changes << ','
        << msg << '\n';
    log << sw.parameter << " = " << fmt(r.value) << ": " << r.status
        << (r.message.empty() ? "" : " (" + r.message + ")") << '\n';
    any_failed = any_failed || r.status == "failed";
  }
  io::write_file(join(out_dir, "sweep.csv"), csv.str());
  return any_failed ? kExitUncertified : kExitOk;
}

int cmd_validate(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const PatchProblem problem = config.problem();
  const SteadyStateSolution sol = solve_steady_state(problem, config.solver);
  const FdGrid grid{config.fd_n, config.fd_n};
  const FdSolution fd = fd_steady_solve(problem, grid, FdInit::from_shooting(sol), config.fd);
  const FdComparison cmp = compare_solutions(fd, sol);
  io::write_file(join(out_dir, "fd_solution.csv"), io::fd_solution_csv(fd));
  const io::json j = {{"fd", io::fd_json(fd)},
                      {"comparison", io::comparison_json(cmp)},
                      {"shooting", io::match_json(sol)}};
  io::write_file(join(out_dir, "validate.json"), j.dump(2) + "\n");
  log << "FD n = " << config.fd_n << " per side: " << fd.iterations << " Newton steps, residual "
      << fmt(fd.residual) << '\n'
      << "L_inf " << fmt(cmp.linf) << ", L2 " << fmt(cmp.l2) << ", interface flux "
      << fmt(cmp.interface_flux) << '\n';
  for (const auto& f : fd.flags) log << "flag: " << f << '\n';
  return fd.flags.empty() ? kExitOk : kExitUncertified;
}

int cmd_phase(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const PatchProblem problem = config.problem();
  const SteadyStateSolution sol = solve_steady_state(problem, config.solver);
  const Potential left(problem, Side::Left), right(problem, Side::Right);
  const double KL = problem.K_left(), KR = problem.K_right();
  const int n = config.phase.samples;
  std::ostringstream csv;
  csv << "family,side,orbit,u,v\n";
  auto row = [&](const char* family, const char* side, int orbit, double u, double v) {
    csv << family << ',' << side << ',' << orbit << ',' << fmt(u) << ',' << fmt(v) << '\n';
  };

  // Level curves through (a, 0) for a spread over (K-, K+): the right family
  // runs from u = 0 to a, the left family from a to 1.1 K+.
  const int levels = config.phase.levels;
  for (int k = 0; k < levels; ++k) {
    const double a = KL + (KR - KL) * (k + 1.0) / (levels + 1.0);
    const double Er = right.value(a);
    const double El = left.value(a);
    for (int i = 0; i <= n; ++i) {
      const double u = a * i / n;
      row("level", "right", k, u, level_curve_v(right, Er, u));
    }
    for (int i = 0; i <= n; ++i) {
      const double u = a + (1.1 * KR - a) * i / n;
      row("level", "left", k, u, level_curve_v(left, El, u));
    }
  }
  // The matched arcs of the solution and the flux jump at the interface.
  const std::size_t m = sol.interface_index;
  for (std::size_t i = 0; i <= m; ++i) row("matched", "left", 0, sol.u[i], sol.ux[i]);
  for (std::size_t i = m + 1; i < sol.u.size(); ++i) row("matched", "right", 0, sol.u[i], sol.ux[i]);
  row("jump", "interface", 0, sol.u[m], sol.ux[m]);
  row("jump", "interface", 0, sol.u[m + 1], sol.ux[m + 1]);

  io::write_file(join(out_dir, "phase_orbits.csv"), csv.str());
  log << "wrote " << levels << " level curves per side and the matched orbit\n";
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-patch reaction-diffusion steady states by phase-plane shooting"};
  app.require_subcommand(1);
  CommonFlags flags;
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, const std::string&, std::ostream&);
  };
  const Entry entries[] = {
      {"solve", "Solve, audit and verify; exit 0 certified, 2 uncertified, 1 failure", cmd_solve},
      {"audit", "Evaluate the sufficient conditions", cmd_audit},
      {"timemap", "Scan time maps T(E) and dT/dE for the configured anchors", cmd_timemap},
      {"sweep", "Solve over a list of parameter values", cmd_sweep},
      {"validate", "Compare the shooting solution with the finite-difference solver", cmd_validate},
      {"phase", "Write level curves and the matched orbit", cmd_phase},
  };
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", flags.config_path, "Problem config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--tol", flags.tolerances, "Tolerance override NAME=VALUE (repeatable)");
    sub->add_option("--grid", flags.grid, "Grid size for the command");
    sub->add_option("--jobs", flags.jobs, "Worker threads");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }
  for (const Entry& e : entries) {
    if (!app.got_subcommand(e.name)) continue;
    try {
      const RunConfig config = resolve_config(e.name, flags);
      return e.fn(config, flags.out_dir, out);
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << '\n';
      return kExitFailure;
    }
  }
  return kExitFailure;
}

}  // namespace patchss::cli
