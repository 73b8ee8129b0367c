#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bundle_spectra/config.hpp"
#include "bundle_spectra/constants.hpp"
#include "bundle_spectra/report.hpp"
#include "bundle_spectra/run.hpp"

using namespace bundle_spectra;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string format;
  std::string out_path;
  std::uint64_t seed = 0;
  CLI::Option* format_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_common_flags(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file")
      ->required();
  flags.format_opt = sub->add_option("--format", flags.format,
                                     "Report format (overrides the config)")
                         ->check(CLI::IsMember({"csv", "json"}));
  flags.out_opt = sub->add_option(
      "--out", flags.out_path, "Write the report to this file (overrides the config)");
  flags.seed_opt = sub->add_option("--seed", flags.seed,
                                   "Override every case's solver seed");
}

RunConfig load_with_flags(const CommonFlags& flags) {
  RunConfig config = load_run_config(flags.config_path);
  if (flags.format_opt->count() > 0) config.output.format = flags.format;
  if (flags.out_opt->count() > 0) config.output.path = flags.out_path;
  if (flags.seed_opt->count() > 0) {
    for (CaseConfig& c : config.cases) c.solver.seed = flags.seed;
  }
  return config;
}

// Replaces each case's check list, re-applying the applicability rules that
// parse-time check lists are held to.
void force_checks(RunConfig& config, const std::vector<std::string>& checks) {
  for (CaseConfig& c : config.cases) {
    for (const std::string& id : checks) {
      if (id == "frame" && c.solver.num_pairs != c.bundle.rank) {
        throw ConfigError("case \"" + c.case_id +
                          "\": check \"frame\" requires solver.num_pairs == "
                          "bundle rank");
      }
      if (id == "holonomy" && c.bundle.kind != BundleSpec::Kind::flat) {
        throw ConfigError("case \"" + c.case_id +
                          "\": check \"holonomy\" requires a flat bundle");
      }
    }
    c.checks = checks;
  }
}

// 0 on success, 2 on I/O failure (reported with the path).
int write_output(const std::string& bytes, const std::string& path) {
  if (path.empty()) {
    std::cout << bytes;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file: " << path << "\n";
    return 2;
  }
  out << bytes;
  out.flush();
  if (!out) {
    std::cerr << "failed writing output file: " << path << "\n";
    return 2;
  }
  return 0;
}

int emit_and_exit(const Report& report, const OutputConfig& output) {
  const int io = write_output(emit_report(report, output.format), output.path);
  if (io != 0) return io;
  return report_exit_code(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Connection-Laplacian spectra and eigensection estimates on flat tori"};
  app.require_subcommand(1);

  CLI::App* constants_cmd =
      app.add_subcommand("constants", "Print the constant ledger for n, K, d, r");
  int ledger_n = 3;
  double ledger_K = 0.0;
  double ledger_d = 1.0;
  double ledger_r = 0.0;
  std::string ledger_out;
  constants_cmd->add_option("--n", ledger_n, "Base dimension (>= 3)");
  constants_cmd->add_option("--K", ledger_K, "Ricci parameter, Ric >= -(n-1)K");
  constants_cmd->add_option("--d", ledger_d, "Diameter bound");
  constants_cmd->add_option("--r", ledger_r, "Bundle curvature bound");
  constants_cmd->add_option("--out", ledger_out, "Write the ledger to this file");

  CommonFlags spectrum_flags;
  CLI::App* spectrum_cmd =
      app.add_subcommand("spectrum", "Solve the eigenproblem, no checks");
  add_common_flags(spectrum_cmd, spectrum_flags);

  CommonFlags verify_flags;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Solve and run the configured checks");
  add_common_flags(verify_cmd, verify_flags);

  CommonFlags holonomy_flags;
  CLI::App* holonomy_cmd = app.add_subcommand(
      "holonomy", "Certified beta search and the holonomy eigenvalue bound");
  add_common_flags(holonomy_cmd, holonomy_flags);

  CommonFlags moser_flags;
  CLI::App* moser_cmd = app.add_subcommand(
      "moser-trace", "Moser iteration rows for each eigenpair");
  add_common_flags(moser_cmd, moser_flags);

  CommonFlags converge_flags;
  std::vector<int> refinements = {1, 2, 4};
  CLI::App* converge_cmd = app.add_subcommand(
      "converge", "Refinement study of the eigenvalues");
  add_common_flags(converge_cmd, converge_flags);
  converge_cmd->add_option(
      "--refine", refinements,
      "Strictly increasing grid scale factors (at least 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (constants_cmd->parsed()) {
      GeometricBounds bounds{ledger_n, ledger_K, ledger_d, ledger_r};
      bounds.validate();
      const std::string bytes =
          constants_ledger_json(assemble_constants(bounds)).dump(2) + "\n";
      return write_output(bytes, ledger_out);
    }
    if (spectrum_cmd->parsed()) {
      RunConfig config = load_with_flags(spectrum_flags);
      force_checks(config, {});
      return emit_and_exit(run_config(config), config.output);
    }
    if (verify_cmd->parsed()) {
      RunConfig config = load_with_flags(verify_flags);
      return emit_and_exit(run_config(config), config.output);
    }
    if (holonomy_cmd->parsed()) {
      RunConfig config = load_with_flags(holonomy_flags);
      force_checks(config, {"holonomy"});
      return emit_and_exit(run_config(config), config.output);
    }
    if (moser_cmd->parsed()) {
      RunConfig config = load_with_flags(moser_flags);
      force_checks(config, {"moser"});
      return emit_and_exit(run_config(config), config.output);
    }
    if (converge_cmd->parsed()) {
      RunConfig config = load_with_flags(converge_flags);
      return emit_and_exit(convergence_study(config, refinements),
                           config.output);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
