#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "patchss/config.hpp"
#include "patchss/errors.hpp"
#include "patchss/report_io.hpp"

using namespace patchss;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults describe the reference problem") {
  const RunConfig c;
  const PatchProblem p = c.problem();
  CHECK(p.K_left() == 1.0);
  CHECK(p.K_right() == 2.2);
  CHECK(p.diffusivity(Side::Left) == 1.2);
  CHECK(p.diffusivity(Side::Right) == 2.0);
  CHECK(p.length(Side::Left) == 1.0349);
  CHECK(p.length(Side::Right) == 1.1671);
}

TEST_CASE("parsing sections, comments and lists") {
  const RunConfig c = parse(
      "# comment line\n"
      "[left]\n"
      "K = 0.1   # trailing comment\n"
      "p = 2\n"
      "[right]\n"
      "rate = custom:exp-logistic\n"
      "K = 3\n"
      "[solver]\n"
      "rtol = 1e-9\n"
      "scan_points = 20\n"
      "[sweep]\n"
      "parameter = right.p\n"
      "values = 0.5, 1, 2\n"
      "[timemap]\n"
      "side = left\n"
      "anchor = u0\n"
      "value = 0.5\n"
      "[phase]\n"
      "levels = 3\n");
  CHECK(c.left.K == 0.1);
  CHECK(c.left.p == 2.0);
  CHECK(c.left.d == 1.2);
  CHECK(c.right.rate == "custom:exp-logistic");
  CHECK(c.solver.flow.rtol == 1e-9);
  CHECK(c.solver.scan_points == 20);
  CHECK(c.sweep.parameter == "right.p");
  CHECK(c.sweep.values == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(c.timemap.side == "left");
  CHECK(c.timemap.value.value() == 0.5);
  CHECK(c.phase.levels == 3);
}

TEST_CASE("malformed input names the offending line") {
  CHECK(error_of("[left]\nfoo = 1\n").find("test.cfg:2:") != std::string::npos);
  CHECK(error_of("[left]\nfoo = 1\n").find("unknown key 'left.foo'") != std::string::npos);
  CHECK(error_of("[nowhere]\nK = 1\n").find("unknown section") != std::string::npos);
  CHECK(error_of("[left]\nK = 1\nK = 2\n").find("duplicate key") != std::string::npos);
  CHECK(error_of("[left]\nK = abc\n").find("finite number") != std::string::npos);
  CHECK(error_of("[left]\nK = 1.5x\n").find("test.cfg:2:") != std::string::npos);
  CHECK(error_of("[left\n").find("malformed section") != std::string::npos);
  CHECK(error_of("K = 1\n").find("outside of a section") != std::string::npos);
  CHECK(error_of("[left]\nK\n").find("key = value") != std::string::npos);
  CHECK(error_of("[solver]\nscan_points = 1.5\n").find("integer") != std::string::npos);
  CHECK(error_of("[timemap]\npoints = 2\n").find("at least 3") != std::string::npos);
  CHECK(error_of("[sweep]\nparameter = solver.rtol\n").find("cannot sweep") != std::string::npos);
  CHECK(error_of("[left]\nrate = cubic\n").find("unknown rate") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("problem validation happens at build time") {
  RunConfig c;
  c.left.K = 3.0;
  CHECK_THROWS_WITH_AS(c.problem(), doctest::Contains("orientation"), DomainError);
  CHECK_NOTHROW(c.coefficients());
  c.left.d = -1.0;
  CHECK_THROWS_AS(c.coefficients(), DomainError);
}

TEST_CASE("format_config round trip") {
  RunConfig c;
  c.left.p = 0.37;
  c.right.K = 2.0000000000000004;
  c.solver.root_tol = 3e-12;
  c.timemap.value = 1.25;
  c.timemap.side = "right";
  c.sweep.parameter = "left.L";
  c.sweep.values = {0.5, 0.75};
  c.jobs = 3;
  const std::string text = format_config(c);
  const RunConfig back = parse(text);
  CHECK(format_config(back) == text);
  CHECK(back.left.p == 0.37);
  CHECK(back.right.K == 2.0000000000000004);
  CHECK(back.timemap.value.value() == 1.25);
  CHECK(back.jobs == 3);
}

TEST_CASE("tolerance overrides") {
  RunConfig c;
  apply_tolerance(c, "rtol=1e-8");
  apply_tolerance(c, "fd_tol = 1e-9");
  apply_tolerance(c, "timemap_tol=1e-11");
  CHECK(c.solver.flow.rtol == 1e-8);
  CHECK(c.fd.tol == 1e-9);
  CHECK(c.timemap.options.tol == 1e-11);
  CHECK_THROWS_AS(apply_tolerance(c, "rtol"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance(c, "gamma=1"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance(c, "atol=-1"), ConfigError);
  CHECK_THROWS_AS(apply_tolerance(c, "atol=nan"), ConfigError);
}

TEST_CASE("catalog rates") {
  PatchConfig p{"custom:richards", 1.0, 2.0, 1.5, 1.0, 1.0};
  const ReactionSpec a = make_reaction(p);
  const ReactionSpec b = ReactionSpec::richards(1.0, 2.0, 1.5);
  CHECK_FALSE(a.is_richards());
  for (double u : {0.3, 1.0, 1.9}) {
    CHECK(a.rate(u) == doctest::Approx(b.rate(u)).epsilon(1e-14));
    CHECK(a.rate_derivative(u, 1) == doctest::Approx(b.rate_derivative(u, 1)).epsilon(1e-12));
    CHECK(a.rate_derivative(u, 2) == doctest::Approx(b.rate_derivative(u, 2)).epsilon(1e-12));
  }
  p.rate = "custom:exp-logistic";
  const ReactionSpec e = make_reaction(p);
  CHECK(e.rate(2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(e.rate(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 2.2, -7.25e10, 0.0}) {
    CHECK(std::stod(io::format_number(v)) == v);
  }
  CHECK(io::format_number(2.2) == "2.2");
}

TEST_CASE("solution CSV and JSON reports") {
  const PatchProblem prob = reference_problem();
  SolverOptions opt;
  opt.profile_points = 64;
  const SteadyStateSolution sol = solve_steady_state(prob, opt);
  const std::string csv = io::solution_csv(sol);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,u,u_x");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto cells = io::split_csv_line(line);
    REQUIRE(cells.size() == 3);
    CHECK(std::stod(cells[0]) == sol.x[rows]);
    CHECK(std::stod(cells[1]) == sol.u[rows]);
    ++rows;
  }
  CHECK(rows == sol.x.size());

  const auto report = io::solve_report_json(prob, sol, verify_necessary_conditions(prob, sol));
  const auto parsed = nlohmann::json::parse(report.dump());
  CHECK(parsed["match"]["alpha_star"].get<double>() == sol.match.alpha_star);
  CHECK(parsed["certified"].get<bool>());
  CHECK(parsed["audit"]["route"] == "M-,C1+,C2+");

  const auto dir = std::filesystem::temp_directory_path() / "patchss_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_file((dir / "a.csv").string(), csv);
  std::ifstream f(dir / "a.csv");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == csv);
  std::filesystem::remove_all(dir.parent_path());
}
