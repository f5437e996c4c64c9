#include "patchss/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "patchss/errors.hpp"

namespace patchss {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("'" + key + "': expected a finite number, got '" + t + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("'" + key + "': expected an integer, got '" + t + "'");
  }
  return v;
}

int parse_positive_int(const std::string& key, const std::string& text) {
  const int v = parse_int(key, text);
  if (v <= 0) throw ConfigError("'" + key + "' must be positive");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

void set_patch(PatchConfig& p, const std::string& dotted, const std::string& key,
               const std::string& value) {
  if (key == "rate") {
    const std::string v = trim(value);
    if (v != "richards" && v != "custom:richards" && v != "custom:exp-logistic") {
      throw ConfigError("'" + dotted + "': unknown rate '" + v +
                        "' (richards, custom:richards, custom:exp-logistic)");
    }
    p.rate = v;
  } else if (key == "r") {
    p.r = parse_double(dotted, value);
  } else if (key == "K") {
    p.K = parse_double(dotted, value);
  } else if (key == "p") {
    p.p = parse_double(dotted, value);
  } else if (key == "d") {
    p.d = parse_double(dotted, value);
  } else if (key == "L") {
    p.L = parse_double(dotted, value);
  } else {
    throw ConfigError("unknown key '" + dotted + "'");
  }
}

void set_solver(RunConfig& c, const std::string& dotted, const std::string& key,
                const std::string& value) {
  SolverOptions& s = c.solver;
  if (key == "rtol") {
    s.flow.rtol = parse_double(dotted, value);
  } else if (key == "atol") {
    s.flow.atol = parse_double(dotted, value);
  } else if (key == "event_tol") {
    s.flow.event_tol = parse_double(dotted, value);
  } else if (key == "blowup_factor") {
    s.flow.blowup_factor = parse_double(dotted, value);
  } else if (key == "root_tol") {
    s.root_tol = parse_double(dotted, value);
  } else if (key == "residual_tol") {
    s.residual_tol = parse_double(dotted, value);
  } else if (key == "match_slack") {
    s.match_slack = parse_double(dotted, value);
  } else if (key == "scan_points") {
    s.scan_points = parse_positive_int(dotted, value);
    if (s.scan_points < 2) throw ConfigError("'" + dotted + "' must be at least 2");
  } else if (key == "profile_points") {
    s.profile_points = parse_positive_int(dotted, value);
  } else if (key == "audit_grid") {
    s.audit_grid = parse_positive_int(dotted, value);
    if (s.audit_grid < 16) throw ConfigError("'" + dotted + "' must be at least 16");
  } else if (key == "fd_n") {
    c.fd_n = parse_positive_int(dotted, value);
    if (c.fd_n < 16) throw ConfigError("'" + dotted + "' must be at least 16");
  } else if (key == "fd_tol") {
    c.fd.tol = parse_double(dotted, value);
  } else if (key == "fd_max_iterations") {
    c.fd.max_iterations = parse_positive_int(dotted, value);
  } else if (key == "jobs") {
    c.jobs = parse_positive_int(dotted, value);
  } else {
    throw ConfigError("unknown key '" + dotted + "'");
  }
}

void set_timemap(TimeMapConfig& t, const std::string& dotted, const std::string& key,
                 const std::string& value) {
  const std::string v = trim(value);
  if (key == "side") {
    if (v != "left" && v != "right" && v != "all") {
      throw ConfigError("'" + dotted + "' must be left, right or all");
    }
    t.side = v;
  } else if (key == "anchor") {
    if (v != "u0" && v != "v0" && v != "all") {
      throw ConfigError("'" + dotted + "' must be u0, v0 or all");
    }
    t.anchor = v;
  } else if (key == "value") {
    t.value = parse_double(dotted, value);
  } else if (key == "points") {
    t.points = parse_positive_int(dotted, value);
    if (t.points < 3) throw ConfigError("'" + dotted + "' must be at least 3");
  } else if (key == "tol") {
    t.options.tol = parse_double(dotted, value);
  } else if (key == "fd_step") {
    t.options.fd_relative_step = parse_double(dotted, value);
  } else if (key == "max_order") {
    t.options.max_order = parse_positive_int(dotted, value);
  } else {
    throw ConfigError("unknown key '" + dotted + "'");
  }
}

const std::set<std::string>& sweepable() {
  static const std::set<std::string> keys = {"left.r", "left.K", "left.p", "left.d", "left.L",
                                             "right.r", "right.K", "right.p", "right.d",
                                             "right.L"};
  return keys;
}

void set_sweep(SweepConfig& s, const std::string& dotted, const std::string& key,
               const std::string& value) {
  if (key == "parameter") {
    const std::string v = trim(value);
    if (!sweepable().count(v)) {
      throw ConfigError("'" + dotted + "': cannot sweep '" + v + "'");
    }
    s.parameter = v;
  } else if (key == "values") {
    s.values = parse_list(dotted, value);
  } else {
    throw ConfigError("unknown key '" + dotted + "'");
  }
}

void set_phase(PhaseConfig& p, const std::string& dotted, const std::string& key,
               const std::string& value) {
  if (key == "levels") {
    p.levels = parse_int(dotted, value);
    if (p.levels < 0) throw ConfigError("'" + dotted + "' must be non-negative");
  } else if (key == "samples") {
    p.samples = parse_positive_int(dotted, value);
    if (p.samples < 2) throw ConfigError("'" + dotted + "' must be at least 2");
  } else {
    throw ConfigError("unknown key '" + dotted + "'");
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void format_patch(std::ostringstream& os, const char* name, const PatchConfig& p) {
  os << '[' << name << "]\n"
     << "rate = " << p.rate << '\n'
     << "r = " << fmt(p.r) << '\n'
     << "K = " << fmt(p.K) << '\n'
     << "p = " << fmt(p.p) << '\n'
     << "d = " << fmt(p.d) << '\n'
     << "L = " << fmt(p.L) << "\n\n";
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& dotted, const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw ConfigError("key '" + dotted + "' lacks a section");
  const std::string section = dotted.substr(0, dot);
  const std::string key = dotted.substr(dot + 1);
  if (section == "left") {
    set_patch(c.left, dotted, key, value);
  } else if (section == "right") {
    set_patch(c.right, dotted, key, value);
  } else if (section == "solver") {
    set_solver(c, dotted, key, value);
  } else if (section == "timemap") {
    set_timemap(c.timemap, dotted, key, value);
  } else if (section == "sweep") {
    set_sweep(c.sweep, dotted, key, value);
  } else if (section == "phase") {
    set_phase(c.phase, dotted, key, value);
  } else {
    throw ConfigError("unknown section '" + section + "'");
  }
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string line;
  std::string section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string dotted = section + "." + trim(line.substr(0, eq));
    if (!seen.insert(dotted).second) throw ConfigError(where + "duplicate key '" + dotted + "'");
    try {
      set_config_value(c, dotted, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void apply_tolerance(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol expects NAME=VALUE");
  const std::string name = trim(assignment.substr(0, eq));
  const std::string value = assignment.substr(eq + 1);
  if (name == "rtol" || name == "atol" || name == "root_tol" || name == "residual_tol" ||
      name == "match_slack" || name == "event_tol" || name == "fd_tol") {
    set_config_value(c, "solver." + name, value);
  } else if (name == "timemap_tol") {
    set_config_value(c, "timemap.tol", value);
  } else if (name == "timemap_fd_step") {
    set_config_value(c, "timemap.fd_step", value);
  } else {
    throw ConfigError("unknown tolerance '" + name + "'");
  }
  const double v = parse_double(name, value);
  if (!(v > 0.0)) throw ConfigError("tolerance '" + name + "' must be positive");
}

ReactionSpec make_reaction(const PatchConfig& p) {
  if (p.rate == "richards") return ReactionSpec::richards(p.r, p.K, p.p);
  if (!(p.r > 0.0 && p.K > 0.0 && p.p > 0.0)) {
    throw DomainError("custom rate parameters r, K, p must be positive");
  }
  const double r = p.r, K = p.K, q = p.p;
  if (p.rate == "custom:richards") {
    return ReactionSpec::custom(
        [=](double u) { return r * u * (1.0 - std::pow(u / K, q)); }, K,
        [=](double u) { return r * (1.0 - (q + 1.0) * std::pow(u / K, q)); },
        [=](double u) { return u > 0.0 ? -r * q * (q + 1.0) * std::pow(u / K, q) / u : 0.0; },
        "custom:richards");
  }
  if (p.rate == "custom:exp-logistic") {
    // f = r u (1 - e^{u-K}); derivatives left to finite differences.
    return ReactionSpec::custom([=](double u) { return r * u * (1.0 - std::exp(u - K)); }, K,
                                {}, {}, "custom:exp-logistic");
  }
  throw ConfigError("unknown rate '" + p.rate + "'");
}

PatchCoefficients RunConfig::coefficients() const {
  if (!(left.d > 0 && right.d > 0 && left.L > 0 && right.L > 0)) {
    throw DomainError("diffusivities and lengths must be positive");
  }
  return {make_reaction(left), make_reaction(right), left.d, right.d, left.L, right.L};
}

PatchProblem RunConfig::problem() const {
  return PatchProblem(make_reaction(left), make_reaction(right), left.d, right.d, left.L,
                      right.L);
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  format_patch(os, "left", c.left);
  format_patch(os, "right", c.right);
  const SolverOptions& s = c.solver;
  os << "[solver]\n"
     << "rtol = " << fmt(s.flow.rtol) << '\n'
     << "atol = " << fmt(s.flow.atol) << '\n'
     << "event_tol = " << fmt(s.flow.event_tol) << '\n'
     << "blowup_factor = " << fmt(s.flow.blowup_factor) << '\n'
     << "root_tol = " << fmt(s.root_tol) << '\n'
     << "residual_tol = " << fmt(s.residual_tol) << '\n'
     << "match_slack = " << fmt(s.match_slack) << '\n'
     << "scan_points = " << s.scan_points << '\n'
     << "profile_points = " << s.profile_points << '\n'
     << "audit_grid = " << s.audit_grid << '\n'
     << "fd_n = " << c.fd_n << '\n'
     << "fd_tol = " << fmt(c.fd.tol) << '\n'
     << "fd_max_iterations = " << c.fd.max_iterations << '\n'
     << "jobs = " << c.jobs << "\n\n";
  os << "[timemap]\n"
     << "side = " << c.timemap.side << '\n'
     << "anchor = " << c.timemap.anchor << '\n';
  if (c.timemap.value) os << "value = " << fmt(*c.timemap.value) << '\n';
  os << "points = " << c.timemap.points << '\n'
     << "tol = " << fmt(c.timemap.options.tol) << '\n'
     << "fd_step = " << fmt(c.timemap.options.fd_relative_step) << '\n'
     << "max_order = " << c.timemap.options.max_order << "\n\n";
  if (!c.sweep.parameter.empty() || !c.sweep.values.empty()) {
    os << "[sweep]\n";
    if (!c.sweep.parameter.empty()) os << "parameter = " << c.sweep.parameter << '\n';
    if (!c.sweep.values.empty()) {
      os << "values = ";
      for (std::size_t i = 0; i < c.sweep.values.size(); ++i) {
        os << (i ? ", " : "") << fmt(c.sweep.values[i]);
      }
      os << '\n';
    }
    os << '\n';
  }
  os << "[phase]\n"
     << "levels = " << c.phase.levels << '\n'
     << "samples = " << c.phase.samples << '\n';
  return os.str();
}

}  // namespace patchss
