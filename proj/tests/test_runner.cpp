#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "locq/runner.hpp"

using namespace locq;

namespace {

json base_certify_config() {
  return json{{"experiment", "certify"},
              {"version", 1},
              {"seed", 12345},
              {"repetitions", 2},
              {"params",
               {{"target",
                 {{"kind", "tensor"},
                  {"factors", json::array({{{"kind", "bell-pair"}},
                                           {{"kind", "product-zero"}, {"n", 1}}})}}},
                {"rho", {{"kind", "target"}}},
                {"subsystem", {0, 1}},
                {"oracle", {{"kind", "separable"}, {"cut", {0}}}},
                {"basis_mode", "fixed-z"},
                {"delta", 0.05},
                {"sample_override", 3000}}}};
}

}  // namespace

TEST_CASE("config digest is canonical and stable") {
  json a = {{"b", 1}, {"a", 2}};
  json b = {{"a", 2}, {"b", 1}};
  CHECK(config_digest(a) == config_digest(b));
  json c = {{"a", 2}, {"b", 2}};
  CHECK(config_digest(a) != config_digest(c));
}

TEST_CASE("ensemble JSON round trip") {
  auto ens = enumerate_ensemble(ghz_state(3), Bipartition::keep(3, {0}),
                                BasisAssignment::fixed_z(2));
  auto j = to_json(ens);
  auto back = ensemble_from_json(j);
  REQUIRE(back.entries.size() == ens.entries.size());
  CHECK(back.part.A == ens.part.A);
  CHECK(back.mode == ens.mode);
  for (std::size_t i = 0; i < ens.entries.size(); ++i) {
    CHECK(back.entries[i].p == ens.entries[i].p);
    CHECK(back.entries[i].labels == ens.entries[i].labels);
    for (std::size_t k = 0; k < ens.entries[i].state.dim(); ++k)
      CHECK(std::abs(back.entries[i].state.amps[k] - ens.entries[i].state.amps[k]) == 0.0);
  }
}

TEST_CASE("circuit JSON serialization captures layers and measurements") {
  Rng rng(5);
  auto spec = brickwork_circuit({4}, 2, rng);
  CircuitLayer meas;
  meas.measured_qubits = {0};
  spec.layers.push_back(meas);
  auto j = to_json(spec);
  CHECK(j.at("n") == 4);
  CHECK(j.at("layers").size() == 3);
  CHECK(j.at("layers")[0].at("gates").size() == 2);
  CHECK(j.at("layers")[2].at("measure") == json::array({0}));
}

TEST_CASE("run_experiment executes a certify config deterministically") {
  auto art1 = run_experiment(base_certify_config(), std::nullopt, 1);
  auto art2 = run_experiment(base_certify_config(), std::nullopt, 2);
  CHECK(art1.summary.dump() == art2.summary.dump());
  CHECK(art1.summary.at("accepts") == 2);
  CHECK(art1.summary.at("runs").size() == 2);

  // seed override changes the digest and (generically) the trial stream
  auto art3 = run_experiment(base_certify_config(), 999, 1);
  CHECK(art3.summary.at("config") != art1.summary.at("config"));
}

TEST_CASE("unknown config keys are rejected with a path") {
  auto cfg = base_certify_config();
  cfg["params"]["bogus"] = 1;
  CHECK_THROWS_AS(run_experiment(cfg, std::nullopt, 1), ConfigError);
  try {
    run_experiment(cfg, std::nullopt, 1);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }

  auto missing = base_certify_config();
  missing["params"].erase("oracle");
  CHECK_THROWS_AS(run_experiment(missing, std::nullopt, 1), ConfigError);

  auto top = base_certify_config();
  top["extra_top"] = true;
  CHECK_THROWS_AS(run_experiment(top, std::nullopt, 1), ConfigError);

  auto bad_state = base_certify_config();
  bad_state["params"]["target"] = {{"kind", "no-such-state"}};
  CHECK_THROWS_AS(run_experiment(bad_state, std::nullopt, 1), ConfigError);
}

TEST_CASE("trial log lines carry the meta record first") {
  auto cfg = base_certify_config();
  cfg["output"] = {{"trials", true}};
  cfg["repetitions"] = 1;
  auto art = run_experiment(cfg, std::nullopt, 1);
  REQUIRE(!art.trial_lines.empty());
  auto meta = json::parse(art.trial_lines[0]);
  CHECK(meta.at("type") == "meta");
  CHECK(meta.at("version") == kVersion);
  CHECK(meta.at("config") == art.summary.at("config"));
  auto first = json::parse(art.trial_lines[1]);
  CHECK(first.at("type") == "trial");
  CHECK(first.at("i") == 0);
}

TEST_CASE("hamiltonian-scan artifacts embed digest and version") {
  json cfg{{"experiment", "hamiltonian-scan"},
           {"version", 1},
           {"seed", 5},
           {"params",
            {{"model", "xxz"}, {"n", 4}, {"grid", {0.0, 0.5}}, {"samples", 50}}}};
  auto art = run_experiment(cfg, std::nullopt, 1);
  REQUIRE(art.csv_files.count("ham_scan.csv") == 1);
  const std::string& csv = art.csv_files.at("ham_scan.csv");
  CHECK(csv.find("# version=") != std::string::npos);
  CHECK(csv.find("# config=" + art.summary.at("config").get<std::string>()) !=
        std::string::npos);
  CHECK(csv.find("parameter,le,std_error,n,seed") != std::string::npos);
}

TEST_CASE("artifacts write summary, trials, and csv files") {
  auto dir = std::filesystem::temp_directory_path() / "locq_runner_test";
  std::filesystem::remove_all(dir);

  auto cfg = base_certify_config();
  cfg["output"] = {{"trials", true}};
  auto art = run_experiment(cfg, std::nullopt, 1);
  art.write(dir, 12.5);
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "trials.jsonl"));

  std::ifstream in(dir / "summary.json");
  json loaded;
  in >> loaded;
  CHECK(loaded.at("wall_ms") == 12.5);
  loaded.erase("wall_ms");
  CHECK(loaded.dump() == art.summary.dump());
  std::filesystem::remove_all(dir);
}

TEST_CASE("gap-scan experiment produces the seven-column CSV") {
  json cfg{{"experiment", "gap-scan"},
           {"version", 1},
           {"seed", 3},
           {"params", {{"n_list", {4}}, {"n_a", 1}, {"states", 2}, {"bases", 3}}}};
  auto art = run_experiment(cfg, std::nullopt, 1);
  const std::string& csv = art.csv_files.at("gap_scan.csv");
  CHECK(csv.find("n,n_a,seed,i,gap,mean,std") != std::string::npos);
  // 2 states x 3 bases rows
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 3 + 6);  // 2 comment lines + header + 6 data rows
}
