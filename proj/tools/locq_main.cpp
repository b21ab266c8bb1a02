// locq: certification and scan runner for localizable quantumness.
//
// Subcommands mirror the experiment kinds; every run is driven by a JSON
// config and writes summary.json (plus trials.jsonl and scan CSVs) into the
// output directory. Verdicts are data: exit code 0 means the run completed,
// 2 a config error, 3 a runtime error.

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "locq/runner.hpp"
#include "locq/verify.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<unsigned long long> seed;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* c = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--workers", args.workers, "worker threads (scheduling only)");
}

int run_config(const CommonArgs& args, const std::string& expected_kind) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::ifstream in(args.config_path);
    if (!in) throw locq::ConfigError("cannot open config file " + args.config_path);
    locq::json config;
    try {
      in >> config;
    } catch (const std::exception& e) {
      throw locq::ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!config.contains("experiment") ||
        config.at("experiment").get<std::string>() != expected_kind)
      throw locq::ConfigError("config experiment kind must be '" + expected_kind + "'");

    locq::Artifacts art = locq::run_experiment(std::move(config), args.seed, args.workers);
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    art.write(args.out_dir, wall);
    std::printf("wrote %s/summary.json\n", args.out_dir.c_str());
    return art.exit_code;
  } catch (const locq::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  }
}

int run_verify(const std::vector<std::string>& suites, const std::string& out_dir,
               const std::string& digest) {
  try {
    auto results = locq::run_suites(suites);
    if (results.empty()) {
      std::fprintf(stderr, "no matching suites\n");
      return 2;
    }
    int failures = 0;
    locq::json table = locq::json::array();
    for (const auto& r : results) {
      std::printf("%-36s %s  [%7.1fs]  %s\n", r.name.c_str(),
                  r.pass ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
      std::fflush(stdout);
      if (!r.pass) ++failures;
      table.push_back(locq::json{{"suite", r.name},
                                 {"pass", r.pass},
                                 {"detail", r.detail},
                                 {"seconds", r.seconds}});
    }
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      std::ofstream out(std::filesystem::path(out_dir) / "verify.json");
      locq::json summary{{"version", locq::kVersion}, {"results", table}};
      if (!digest.empty()) summary["config"] = digest;
      out << summary.dump(2) << "\n";
    }
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certification toolkit for localizable quantumness"};
  app.require_subcommand(1);

  std::map<std::string, std::pair<std::string, std::string>> kinds = {
      {"certify", {"certify", "run the conditional-fidelity certification protocol"}},
      {"inseparable", {"fully-inseparable", "certify fully inseparable entanglement"}},
      {"fidelity", {"fidelity-cert", "certify state fidelity via the spectral gap"}},
      {"complexity", {"complexity-cert", "certify circuit complexity on a lattice"}},
      {"magic-scan", {"magic-scan", "scan localizable magic over injection angles"}},
      {"ham-scan", {"hamiltonian-scan", "scan localizable entanglement of ground states"}},
      {"gap-scan", {"gap-scan", "scan truncated fidelity-observable gaps"}},
  };

  std::map<std::string, CommonArgs> args;
  for (auto& [sub, kind_help] : kinds) {
    auto* cmd = app.add_subcommand(sub, kind_help.second);
    add_common(cmd, args[sub]);
  }

  std::vector<std::string> suites;
  std::string verify_out;
  std::string verify_config;
  auto* verify_cmd = app.add_subcommand("verify", "run acceptance suites");
  verify_cmd->add_option("suites", suites, "suite names (default: all)");
  verify_cmd->add_option("--config", verify_config,
                         "property-suite config (alternative to naming suites)");
  verify_cmd->add_option("--out", verify_out, "directory for verify.json");

  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, kind_help] : kinds)
    if (app.got_subcommand(sub)) return run_config(args[sub], kind_help.first);

  if (app.got_subcommand("verify")) {
    std::string digest;
    if (!verify_config.empty()) {
      try {
        std::ifstream in(verify_config);
        if (!in) throw locq::ConfigError("cannot open config file " + verify_config);
        locq::json config;
        in >> config;
        locq::detail::check_keys(config, {"experiment", "version", "seed", "params"},
                                 {"repetitions", "output"}, "config");
        if (config.at("experiment").get<std::string>() != "property-suite")
          throw locq::ConfigError("config experiment kind must be 'property-suite'");
        locq::detail::check_keys(config.at("params"), {"suites"}, {}, "params");
        suites = config.at("params").at("suites").get<std::vector<std::string>>();
        digest = locq::config_digest(config);
      } catch (const locq::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
      } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
      }
    }
    return run_verify(suites, verify_out, digest);
  }
  return 0;
}
