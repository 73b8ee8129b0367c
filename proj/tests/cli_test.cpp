#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bundle_spectra/lattice.hpp"

using namespace bundle_spectra;
using nlohmann::json;

namespace {

std::string binary_path() {
  const char* env = std::getenv("BUNDLE_SPECTRA_BIN");
  REQUIRE_MESSAGE(env != nullptr, "BUNDLE_SPECTRA_BIN must point at the CLI");
  return env;
}

std::string temp_path(const std::string& stem) {
  static int counter = 0;
  return "/tmp/bundle_cli_" + std::to_string(getpid()) + "_" + stem + "_" +
         std::to_string(++counter);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const std::string out_path = temp_path("out");
  const std::string err_path = temp_path("err");
  const std::string command =
      "\"" + binary_path() + "\" " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  RunResult result;
  result.exit_code = WEXITSTATUS(status);
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return result;
}

std::string write_config(const json& doc) {
  const std::string path = temp_path("cfg") + ".json";
  std::ofstream out(path);
  out << doc.dump(2);
  REQUIRE(out.good());
  return path;
}

json flat_case(double theta0, int n_side) {
  return json{{"torus", {{"lengths", {1.0, 1.0, 1.0}},
                         {"grid", {n_side, n_side, n_side}}}},
              {"bundle", {{"kind", "flat"}, {"theta", {{theta0, 0.0, 0.0}}}}}};
}

json magnetic_case(int n_side) {
  return json{{"torus", {{"lengths", {1.0, 1.0, 1.0}},
                         {"grid", {n_side, n_side, n_side}}}},
              {"bundle", {{"kind", "magnetic"},
                          {"flux", {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}}}}};
}

double discrete_ground_lambda(double theta0, int n_side) {
  TorusSpec torus{{1.0, 1.0, 1.0}, {n_side, n_side, n_side}};
  BundleSpec bundle = BundleSpec::make_flat({{theta0, 0.0, 0.0}});
  return flat_spectrum(torus, bundle, 1, true)[0].lambda;
}

void strip_timing(json& node) {
  if (node.is_object()) {
    node.erase("timing");
    for (auto& item : node.items()) strip_timing(item.value());
  } else if (node.is_array()) {
    for (auto& item : node) strip_timing(item);
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_CASE("constants subcommand prints the ledger") {
  const RunResult r = run_cli("constants");
  REQUIRE(r.exit_code == 0);
  const json ledger = json::parse(r.out);
  CHECK(ledger.at("epsilon").get<double>() ==
        doctest::Approx(0.14312).epsilon(1e-3));
  CHECK(ledger.at("c_gallot").get<double>() ==
        doctest::Approx(125.0 / 216.0 - 0.125).epsilon(1e-12));
  CHECK(ledger.at("C").get<double>() ==
        doctest::Approx((8.0 / 3.0) * (125.0 / 216.0 - 0.125)));
  CHECK(ledger.at("bounds").at("n").get<int>() == 3);
  CHECK(ledger.contains("B1_log10"));

  const RunResult bad = run_cli("constants --n 2");
  CHECK(bad.exit_code == 2);
  CHECK(!bad.err.empty());
}

TEST_CASE("verify runs the flat quarter-turn case end to end") {
  json cfg = flat_case(M_PI / 4.0, 16);
  cfg["case_id"] = "quarter";
  const std::string path = write_config(cfg);
  const RunResult r = run_cli("verify --config " + path);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("passes").get<bool>());
  const json& c = doc.at("cases").at(0);
  CHECK(c.at("case_id").get<std::string>() == "quarter");
  const double lambda1 =
      c.at("solver").at("eigenvalues").at(0).at("lambda").get<double>();
  CHECK(lambda1 ==
        doctest::Approx(discrete_ground_lambda(M_PI / 4.0, 16)).epsilon(1e-8));
  CHECK(c.at("solver").at("ok").get<bool>());
  REQUIRE(!c.at("verdicts").empty());
  for (const json& row : c.at("verdicts")) {
    CHECK_MESSAGE(row.at("pass").get<bool>(),
                  row.at("check_id").get<std::string>());
  }
  CHECK(c.at("beta").at("beta").get<double>() ==
        doctest::Approx(2.0 * std::sin(M_PI / 8.0)).epsilon(1e-9));
  CHECK(c.at("frame").at("section_deviation").size() == 1);
  CHECK(c.at("constants").at("bounds").at("d").get<double>() ==
        doctest::Approx(0.5 * std::sqrt(3.0)));
  std::remove(path.c_str());
}

TEST_CASE("undersized grid is rejected naming the field") {
  const std::string path = write_config(flat_case(M_PI / 4.0, 3));
  const RunResult r = run_cli("verify --config " + path);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("torus") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("unknown check id is rejected") {
  json cfg = flat_case(M_PI / 4.0, 8);
  cfg["checks"] = {"eigenpair", "bogus"};
  const std::string path = write_config(cfg);
  const RunResult r = run_cli("verify --config " + path);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("bogus") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("override below the measured curvature is rejected") {
  json cfg = magnetic_case(4);
  cfg["overrides"] = {{"r", 1.0}};
  const std::string path = write_config(cfg);
  const RunResult r = run_cli("verify --config " + path);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("overrides.r") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("solver failure yields a partial report and exit 1") {
  json cfg = flat_case(M_PI / 4.0, 8);
  cfg["solver"] = {{"max_iter", 1}, {"tol", 1e-14}};
  const std::string path = write_config(cfg);
  const RunResult r = run_cli("verify --config " + path);
  CHECK(r.exit_code == 1);
  const json doc = json::parse(r.out);
  CHECK(!doc.at("passes").get<bool>());
  const json& solver = doc.at("cases").at(0).at("solver");
  CHECK(!solver.at("ok").get<bool>());
  CHECK(!solver.at("message").get<std::string>().empty());
  CHECK(solver.at("eigenvalues").empty());
  CHECK(doc.at("cases").at(0).at("verdicts").empty());
  std::remove(path.c_str());
}

TEST_CASE("csv output lists one verdict per row") {
  json cfg;
  cfg["cases"] = json::array({flat_case(M_PI / 4.0, 8), flat_case(M_PI, 8)});
  cfg["cases"][0]["case_id"] = "quarter";
  cfg["cases"][0]["checks"] = {"eigenpair"};
  cfg["cases"][1]["case_id"] = "half";
  cfg["cases"][1]["checks"] = {"eigenpair"};
  const std::string path = write_config(cfg);
  const RunResult r = run_cli("verify --config " + path + " --format csv");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "case_id,check_id,lambda,lhs,rhs_log10,slack_log10,pass");
  int rows = 0;
  bool saw_quarter = false;
  bool saw_half = false;
  while (std::getline(lines, line)) {
    const std::vector<std::string> fields = split_fields(line);
    REQUIRE(fields.size() == 7);
    saw_quarter = saw_quarter || fields[0] == "quarter";
    saw_half = saw_half || fields[0] == "half";
    CHECK((fields[6] == "true" || fields[6] == "false"));
    for (int i = 2; i <= 5; ++i) {
      char* end = nullptr;
      std::strtod(fields[i].c_str(), &end);
      CHECK(end == fields[i].c_str() + fields[i].size());
    }
    ++rows;
  }
  CHECK(rows >= 8);
  CHECK(saw_quarter);
  CHECK(saw_half);
  std::remove(path.c_str());
}

TEST_CASE("reports are byte-identical across reruns") {
  json cfg = flat_case(M_PI / 4.0, 8);
  const std::string path = write_config(cfg);
  const RunResult a = run_cli("verify --config " + path + " --seed 7");
  const RunResult b = run_cli("verify --config " + path + " --seed 7");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  json doc_a = json::parse(a.out);
  json doc_b = json::parse(b.out);
  strip_timing(doc_a);
  strip_timing(doc_b);
  CHECK(doc_a.dump() == doc_b.dump());
  std::remove(path.c_str());
}

TEST_CASE("--out writes the report to a file") {
  const std::string cfg_path = write_config(flat_case(M_PI / 4.0, 8));
  const std::string out_path = temp_path("report") + ".json";
  const RunResult r =
      run_cli("verify --config " + cfg_path + " --out " + out_path);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.empty());
  const json doc = json::parse(read_file(out_path));
  CHECK(doc.at("passes").get<bool>());
  std::remove(cfg_path.c_str());
  std::remove(out_path.c_str());
}

TEST_CASE("spectrum subcommand reports eigenvalues without verdicts") {
  json cfg = flat_case(M_PI / 4.0, 8);
  cfg["solver"] = {{"num_pairs", 2}};
  const std::string path = write_config(cfg);
  const RunResult r = run_cli("spectrum --config " + path);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  const json& c = doc.at("cases").at(0);
  CHECK(c.at("solver").at("eigenvalues").size() == 2);
  CHECK(c.at("verdicts").empty());
  std::remove(path.c_str());
}

TEST_CASE("holonomy subcommand reports beta and the lower bound rows") {
  const std::string path = write_config(flat_case(M_PI / 4.0, 8));
  const RunResult r = run_cli("holonomy --config " + path);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  const json& c = doc.at("cases").at(0);
  CHECK(c.at("beta").at("beta").get<double>() ==
        doctest::Approx(0.76537).epsilon(1e-4));
  REQUIRE(c.at("verdicts").size() == 2);
  CHECK(c.at("verdicts").at(0).at("check_id").get<std::string>() ==
        "holonomy_direct");
  CHECK(c.at("verdicts").at(1).at("check_id").get<std::string>() ==
        "holonomy_lower");
  std::remove(path.c_str());

  const std::string magnetic_path = write_config(magnetic_case(4));
  const RunResult bad = run_cli("holonomy --config " + magnetic_path);
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("flat") != std::string::npos);
  std::remove(magnetic_path.c_str());
}

TEST_CASE("moser-trace emits only the iteration rows") {
  const std::string path = write_config(flat_case(M_PI, 8));
  const RunResult r = run_cli("moser-trace --config " + path);
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  const json& verdicts = doc.at("cases").at(0).at("verdicts");
  REQUIRE(!verdicts.empty());
  for (const json& row : verdicts) {
    const std::string id = row.at("check_id").get<std::string>();
    CHECK((id == "moser_step" || id == "holder_interp" ||
           id == "inequality_a"));
    CHECK(row.at("pass").get<bool>());
  }
  std::remove(path.c_str());
}

TEST_CASE("converge fits second order for the quarter-turn mode") {
  const std::string path = write_config(flat_case(M_PI / 4.0, 8));
  const RunResult r =
      run_cli("converge --config " + path + " --refine 1 2 4");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  const json& c = doc.at("cases").at(0);
  const json& levels = c.at("convergence").at("levels");
  REQUIRE(levels.size() == 3);
  CHECK(levels.at(0).at("grid") == json({8, 8, 8}));
  CHECK(levels.at(2).at("grid") == json({32, 32, 32}));
  const json& fit = c.at("convergence").at("fits").at(0);
  CHECK(fit.at("target").get<double>() ==
        doctest::Approx(M_PI * M_PI / 16.0).epsilon(1e-12));
  CHECK(fit.at("fitted_order").get<double>() == doctest::Approx(2.0).epsilon(0.15));
  for (const json& row : c.at("verdicts")) {
    CHECK_MESSAGE(row.at("pass").get<bool>(),
                  row.at("check_id").get<std::string>());
  }

  const RunResult bad = run_cli("converge --config " + path + " --refine 1 2");
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("refinement") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("malformed json and missing files exit 2") {
  const std::string path = temp_path("broken") + ".json";
  std::ofstream(path) << "{ not json";
  const RunResult r = run_cli("verify --config " + path);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find(path) != std::string::npos);
  std::remove(path.c_str());

  const RunResult missing = run_cli("verify --config /tmp/nonexistent_cfg.json");
  CHECK(missing.exit_code == 2);

  const RunResult no_flag = run_cli("verify");
  CHECK(no_flag.exit_code == 2);

  const RunResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
}
