// runner.hpp
// Configuration-driven experiment execution. A single JSON config selects the
// experiment kind and its parameters; outputs are a summary JSON, optional
// JSON-lines trial logs, and scan CSVs. Unknown config keys are rejected.

#pragma once

#include <filesystem>
#include <set>

#include "locq/scans.hpp"
#include "locq/serialize.hpp"
#include "locq/spectral.hpp"

namespace locq {

namespace detail {

inline constexpr std::uint64_t kStateStreamTag = (1ULL << 61) + 7;

inline void check_keys(const json& obj, const std::set<std::string>& required,
                       const std::set<std::string>& optional, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!required.count(key) && !optional.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
  for (const auto& key : required)
    if (!obj.contains(key))
      throw ConfigError("missing key '" + key + "' in " + where);
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    throw ConfigError("invalid value for '" + key + "' in " + where);
  }
}

}  // namespace detail

// --- state/rho/oracle specs --------------------------------------------------

inline PureState parse_state(const json& spec, std::uint64_t master_seed,
                             const std::string& where) {
  using detail::check_keys;
  using detail::get_as;
  if (!spec.is_object() || !spec.contains("kind"))
    throw ConfigError(where + " needs a 'kind'");
  const std::string kind = spec.at("kind").get<std::string>();
  const std::uint64_t offset =
      spec.contains("seed_offset") ? spec.at("seed_offset").get<std::uint64_t>() : 0;
  Rng rng = Rng::substream(master_seed ^ detail::kStateStreamTag, offset);

  if (kind == "ghz") {
    check_keys(spec, {"kind", "n"}, {}, where);
    return ghz_state(get_as<int>(spec, "n", where));
  }
  if (kind == "bell-pair") {
    check_keys(spec, {"kind"}, {}, where);
    return bell_state();
  }
  if (kind == "cluster-1d") {
    check_keys(spec, {"kind", "n"}, {}, where);
    return cluster_state_1d(get_as<int>(spec, "n", where));
  }
  if (kind == "product-zero") {
    check_keys(spec, {"kind", "n"}, {}, where);
    return zero_state(get_as<int>(spec, "n", where));
  }
  if (kind == "plus") {
    check_keys(spec, {"kind", "n"}, {}, where);
    return plus_state(get_as<int>(spec, "n", where));
  }
  if (kind == "haar") {
    check_keys(spec, {"kind", "n"}, {"seed_offset"}, where);
    return haar_state(get_as<int>(spec, "n", where), rng);
  }
  if (kind == "brickwork") {
    check_keys(spec, {"kind", "dims", "depth"}, {"seed_offset"}, where);
    return brickwork_state(get_as<std::vector<int>>(spec, "dims", where),
                           get_as<int>(spec, "depth", where), rng);
  }
  if (kind == "magic-injection") {
    check_keys(spec, {"kind", "n", "alpha"}, {"seed_offset"}, where);
    return magic_injection_state(get_as<int>(spec, "n", where),
                                 get_as<double>(spec, "alpha", where), rng);
  }
  if (kind == "xxz-ground") {
    check_keys(spec, {"kind", "n", "anisotropy"}, {}, where);
    return xxz_ground_state(get_as<int>(spec, "n", where),
                            get_as<double>(spec, "anisotropy", where));
  }
  if (kind == "j1j2-ground") {
    check_keys(spec, {"kind", "n", "j2"}, {}, where);
    return j1j2_ground_state(get_as<int>(spec, "n", where),
                             get_as<double>(spec, "j2", where));
  }
  if (kind == "tensor") {
    check_keys(spec, {"kind", "factors"}, {}, where);
    const auto& factors = spec.at("factors");
    if (!factors.is_array() || factors.empty())
      throw ConfigError(where + ".factors must be a non-empty array");
    PureState acc = parse_state(factors[0], master_seed, where + ".factors[0]");
    for (std::size_t i = 1; i < factors.size(); ++i)
      acc = tensor(acc, parse_state(factors[i], master_seed,
                                    where + ".factors[" + std::to_string(i) + "]"));
    return acc;
  }
  if (kind == "amplitudes") {
    check_keys(spec, {"kind", "n", "re", "im"}, {}, where);
    auto re = get_as<std::vector<double>>(spec, "re", where);
    auto im = get_as<std::vector<double>>(spec, "im", where);
    if (re.size() != im.size()) throw ConfigError(where + ": re/im length mismatch");
    std::vector<cplx> amps(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) amps[i] = cplx(re[i], im[i]);
    try {
      return PureState::from_amplitudes(get_as<int>(spec, "n", where), std::move(amps));
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(where + ": unknown state kind '" + kind + "'");
}

inline RhoModel parse_rho(const json& spec, const PureState& target,
                          std::uint64_t master_seed, const std::string& where) {
  using detail::check_keys;
  using detail::get_as;
  if (!spec.is_object() || !spec.contains("kind"))
    throw ConfigError(where + " needs a 'kind'");
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "target") {
    check_keys(spec, {"kind"}, {}, where);
    return RhoModel::pure(target);
  }
  if (kind == "state") {
    check_keys(spec, {"kind", "state"}, {}, where);
    return RhoModel::pure(parse_state(spec.at("state"), master_seed, where + ".state"));
  }
  if (kind == "depolarized") {
    check_keys(spec, {"kind", "p"}, {}, where);
    return RhoModel::depolarized(target, get_as<double>(spec, "p", where));
  }
  if (kind == "depolarized-density") {
    check_keys(spec, {"kind", "p"}, {}, where);
    return RhoModel::density(depolarize(target, get_as<double>(spec, "p", where)));
  }
  throw ConfigError(where + ": unknown rho kind '" + kind + "'");
}

inline FidelityOracle parse_oracle(const json& spec, int n_a, const std::string& where) {
  using detail::check_keys;
  if (!spec.is_object() || !spec.contains("kind"))
    throw ConfigError(where + " needs a 'kind'");
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "separable") {
    check_keys(spec, {"kind", "cut"}, {}, where);
    auto cut = spec.at("cut").get<std::vector<int>>();
    return FidelityOracle::separable(Bipartition::keep(n_a, cut));
  }
  if (kind == "stabilizer") {
    check_keys(spec, {"kind"}, {}, where);
    return FidelityOracle::stabilizer(n_a);
  }
  throw ConfigError(where + ": unknown oracle kind '" + kind + "'");
}

// --- experiment execution --------------------------------------------------------

struct Artifacts {
  json summary;
  std::vector<std::string> trial_lines;          // meta line first when present
  std::map<std::string, std::string> csv_files;  // filename -> contents
  int exit_code = 0;

  void write(const std::filesystem::path& dir, double wall_ms) const {
    std::filesystem::create_directories(dir);
    json with_time = summary;
    with_time["wall_ms"] = wall_ms;
    std::ofstream s(dir / "summary.json");
    s << with_time.dump(2) << "\n";
    if (!trial_lines.empty()) {
      std::ofstream t(dir / "trials.jsonl");
      for (const auto& line : trial_lines) t << line << "\n";
    }
    for (const auto& [name, contents] : csv_files) {
      std::ofstream c(dir / name);
      c << contents;
    }
  }
};

namespace detail {

inline ProtocolSettings settings_from(const json& params, std::uint64_t seed,
                                      int workers, bool keep_trials,
                                      const std::string& where) {
  ProtocolSettings s;
  s.seed = seed;
  s.workers = workers;
  s.keep_trials = keep_trials;
  if (params.contains("delta")) s.delta = params.at("delta").get<double>();
  if (!(s.delta > 0.0 && s.delta < 1.0))
    throw ConfigError(where + ".delta must lie in (0,1)");
  if (params.contains("sample_override"))
    s.sample_override = params.at("sample_override").get<long>();
  if (params.contains("lq_budget")) s.lq_budget = params.at("lq_budget").get<long>();
  if (params.contains("variance_mode")) {
    const std::string v = params.at("variance_mode").get<std::string>();
    if (v == "worst-case")
      s.variance_mode = ProtocolSettings::VarianceMode::WorstCase;
    else if (v == "empirical-pilot")
      s.variance_mode = ProtocolSettings::VarianceMode::EmpiricalPilot;
    else
      throw ConfigError(where + ".variance_mode must be worst-case or empirical-pilot");
  }
  return s;
}

inline std::vector<std::string> trial_log(const std::vector<TrialRecord>& records,
                                          const std::string& digest) {
  std::vector<std::string> lines;
  lines.push_back(json{{"type", "meta"}, {"config", digest}, {"version", kVersion}}.dump());
  for (const auto& r : records) {
    json j = to_json(r);
    j["type"] = "trial";
    lines.push_back(j.dump());
  }
  return lines;
}

}  // namespace detail

// Runs one experiment config. `workers` affects scheduling only; artifacts
// are byte-identical for a fixed (config, seed).
inline Artifacts run_experiment(json config, std::optional<std::uint64_t> seed_override,
                                int workers) {
  using detail::check_keys;
  using detail::get_as;
  check_keys(config, {"experiment", "version", "seed", "params"},
             {"repetitions", "output"}, "config");
  if (config.at("version").get<int>() != 1)
    throw ConfigError("unsupported config version");
  if (seed_override) config["seed"] = *seed_override;
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  const long reps = config.contains("repetitions")
                        ? config.at("repetitions").get<long>()
                        : 1;
  if (reps < 1) throw ConfigError("repetitions must be >= 1");
  bool want_trials = false;
  if (config.contains("output")) {
    check_keys(config.at("output"), {}, {"trials"}, "config.output");
    if (config.at("output").contains("trials"))
      want_trials = config.at("output").at("trials").get<bool>();
  }
  const std::string kind = config.at("experiment").get<std::string>();
  const json& params = config.at("params");
  const std::string digest = config_digest(config);

  Artifacts art;
  art.summary["experiment"] = kind;
  art.summary["version"] = kVersion;
  art.summary["config"] = digest;
  art.summary["seed"] = seed;

  auto rep_seed = [&](long r) { return Rng::substream(seed, 0xAB0000 + r).u64(); };

  if (kind == "certify") {
    check_keys(params,
               {"target", "rho", "subsystem", "oracle", "basis_mode"},
               {"delta", "threshold", "sample_override", "lq_budget", "variance_mode"},
               "params");
    PureState psi = parse_state(params.at("target"), seed, "params.target");
    RhoModel rho = parse_rho(params.at("rho"), psi, seed, "params.rho");
    auto subsystem = get_as<std::vector<int>>(params, "subsystem", "params");
    auto part = Bipartition::keep(psi.n, subsystem);
    auto oracle = parse_oracle(params.at("oracle"),
                               static_cast<int>(subsystem.size()), "params.oracle");
    const std::string bm = get_as<std::string>(params, "basis_mode", "params");
    if (bm != "fixed-z" && bm != "random-pauli")
      throw ConfigError("params.basis_mode must be fixed-z or random-pauli");

    json runs = json::array();
    long accepts = 0;
    for (long r = 0; r < reps; ++r) {
      ProtocolSettings s = detail::settings_from(params, rep_seed(r), workers,
                                                 want_trials && r == 0, "params");
      s.mode = bm == "fixed-z" ? BasisAssignment::Mode::FixedZ
                               : BasisAssignment::Mode::UniformRandomPauli;
      if (params.contains("threshold")) {
        const json& thr = params.at("threshold");
        check_keys(thr, {"rule"}, {"value"}, "params.threshold");
        const std::string rule = thr.at("rule").get<std::string>();
        if (rule == "lq-over-3") {
          s.rule = ProtocolSettings::ThresholdRule::LqOverThree;
        } else if (rule == "explicit") {
          s.rule = ProtocolSettings::ThresholdRule::Explicit;
          s.explicit_threshold = thr.at("value").get<double>();
        } else {
          throw ConfigError("params.threshold.rule must be lq-over-3 or explicit");
        }
      }
      CertificationReport rep = run_protocol1(rho, psi, part, oracle, s);
      if (rep.accept) ++accepts;
      json j = to_json(rep);
      j["config"] = digest;
      runs.push_back(j);
      if (s.keep_trials) art.trial_lines = detail::trial_log(rep.trials, digest);
    }
    art.summary["runs"] = runs;
    art.summary["accepts"] = accepts;
    art.summary["repetitions"] = reps;
    return art;
  }

  if (kind == "fully-inseparable") {
    check_keys(params, {"target", "rho", "pairs"}, {"delta", "lq_budget"}, "params");
    PureState psi = parse_state(params.at("target"), seed, "params.target");
    RhoModel rho = parse_rho(params.at("rho"), psi, seed, "params.rho");
    std::vector<std::pair<int, int>> pairs;
    if (params.at("pairs").is_string()) {
      if (params.at("pairs").get<std::string>() != "nearest-neighbor")
        throw ConfigError("params.pairs must be nearest-neighbor or an explicit list");
      for (int i = 0; i + 1 < psi.n; ++i) pairs.emplace_back(i, i + 1);
    } else {
      for (const auto& p : params.at("pairs"))
        pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    }
    const double delta = params.contains("delta") ? params.at("delta").get<double>() : 0.05;
    const long budget =
        params.contains("lq_budget") ? params.at("lq_budget").get<long>() : 20000;

    json runs = json::array();
    long accepts = 0;
    for (long r = 0; r < reps; ++r) {
      auto rep = run_fully_inseparable(rho, psi, pairs, delta, budget, rep_seed(r),
                                       workers, want_trials && r == 0);
      if (rep.accept) ++accepts;
      json j = to_json(rep);
      j["config"] = digest;
      runs.push_back(j);
      if (want_trials && r == 0) art.trial_lines = detail::trial_log(rep.trials, digest);
    }
    art.summary["runs"] = runs;
    art.summary["accepts"] = accepts;
    art.summary["repetitions"] = reps;
    return art;
  }

  if (kind == "fidelity-cert") {
    check_keys(params, {"target", "rho", "n_a", "F", "c"},
               {"gap", "delta", "sample_override"}, "params");
    PureState psi = parse_state(params.at("target"), seed, "params.target");
    RhoModel rho = parse_rho(params.at("rho"), psi, seed, "params.rho");
    const int n_a = get_as<int>(params, "n_a", "params");
    double gap;
    if (!params.contains("gap") ||
        (params.at("gap").is_string() && params.at("gap") == "measured")) {
      auto obs = build_observable(psi, n_a, BasesMode::All);
      gap = spectral_gap(obs, psi);
    } else {
      gap = params.at("gap").get<double>();
    }
    json runs = json::array();
    long accepts = 0;
    for (long r = 0; r < reps; ++r) {
      ProtocolSettings s = detail::settings_from(params, rep_seed(r), workers,
                                                 want_trials && r == 0, "params");
      auto rep = run_fidelity_cert(rho, psi, n_a, gap,
                                   get_as<double>(params, "F", "params"),
                                   get_as<double>(params, "c", "params"), s);
      if (rep.accept) ++accepts;
      json j = to_json(rep);
      j["config"] = digest;
      runs.push_back(j);
      if (s.keep_trials) art.trial_lines = detail::trial_log(rep.trials, digest);
    }
    art.summary["gap"] = gap;
    art.summary["runs"] = runs;
    art.summary["accepts"] = accepts;
    art.summary["repetitions"] = reps;
    return art;
  }

  if (kind == "complexity-cert") {
    check_keys(params, {"target", "rho", "dims", "w", "d", "variant"},
               {"c", "delta", "allow_toy", "toy_free_ceiling", "t", "p_prime",
                "sample_override"},
               "params");
    ComplexityCertConfig cfg;
    cfg.geometry = make_lattice_geometry(get_as<std::vector<int>>(params, "dims", "params"),
                                         get_as<int>(params, "w", "params"),
                                         get_as<int>(params, "d", "params"));
    const std::string variant = get_as<std::string>(params, "variant", "params");
    if (variant == "unitary")
      cfg.variant = ComplexityCertConfig::Variant::Unitary;
    else if (variant == "measurement-assisted")
      cfg.variant = ComplexityCertConfig::Variant::MeasurementAssisted;
    else
      throw ConfigError("params.variant must be unitary or measurement-assisted");
    if (params.contains("c")) cfg.c = params.at("c").get<double>();
    if (params.contains("delta")) cfg.delta = params.at("delta").get<double>();
    if (params.contains("allow_toy")) cfg.allow_toy = params.at("allow_toy").get<bool>();
    if (params.contains("toy_free_ceiling"))
      cfg.toy_free_ceiling = params.at("toy_free_ceiling").get<double>();
    if (params.contains("t")) cfg.t = params.at("t").get<double>();
    if (params.contains("p_prime")) cfg.p_prime = params.at("p_prime").get<double>();

    PureState psi = parse_state(params.at("target"), seed, "params.target");
    RhoModel rho = parse_rho(params.at("rho"), psi, seed, "params.rho");

    json runs = json::array();
    long accepts = 0;
    for (long r = 0; r < reps; ++r) {
      ProtocolSettings s = detail::settings_from(params, rep_seed(r), workers,
                                                 want_trials && r == 0, "params");
      s.delta = cfg.delta;
      auto rep = run_complexity_cert(rho, psi, cfg, s);
      if (rep.accept) ++accepts;
      json j = to_json(rep);
      j["config"] = digest;
      runs.push_back(j);
      if (s.keep_trials) art.trial_lines = detail::trial_log(rep.trials, digest);
    }
    art.summary["runs"] = runs;
    art.summary["accepts"] = accepts;
    art.summary["repetitions"] = reps;
    return art;
  }

  if (kind == "magic-scan") {
    check_keys(params, {"n_list", "alphas", "n_a", "cliffords"}, {}, "params");
    auto result = magic_scan(get_as<std::vector<int>>(params, "n_list", "params"),
                             get_as<std::vector<double>>(params, "alphas", "params"),
                             get_as<int>(params, "n_a", "params"),
                             get_as<long>(params, "cliffords", "params"), seed);
    CsvWriter agg("n,alpha,n_a,cliffords,mean_lm,stderr_lm", digest);
    json points = json::array();
    for (const auto& p : result.points) {
      agg.row(p.n, p.alpha, p.n_a, p.cliffords, p.mean_lm, p.std_error);
      points.push_back(json{{"n", p.n},
                            {"alpha", p.alpha},
                            {"mean_lm", p.mean_lm},
                            {"stderr_lm", p.std_error}});
    }
    CsvWriter raw("n,alpha,clifford,lm", digest);
    for (const auto& r : result.rows) raw.row(r.n, r.alpha, r.clifford_index, r.lm);
    art.csv_files["magic_scan.csv"] = agg.str();
    art.csv_files["magic_scan_raw.csv"] = raw.str();
    art.summary["points"] = points;
    return art;
  }

  if (kind == "hamiltonian-scan") {
    check_keys(params, {"model", "n", "grid", "samples"}, {}, "params");
    auto rows = hamiltonian_scan(get_as<std::string>(params, "model", "params"),
                                 get_as<int>(params, "n", "params"),
                                 get_as<std::vector<double>>(params, "grid", "params"),
                                 get_as<long>(params, "samples", "params"), seed);
    CsvWriter csv("parameter,le,std_error,n,seed", digest);
    json jrows = json::array();
    for (const auto& r : rows) {
      csv.row(r.parameter, r.le, r.std_error, r.n, std::to_string(r.seed));
      jrows.push_back(json{{"parameter", r.parameter},
                           {"le", r.le},
                           {"std_error", r.std_error},
                           {"member", r.member},
                           {"degeneracy", r.degeneracy}});
    }
    art.csv_files["ham_scan.csv"] = csv.str();
    art.summary["rows"] = jrows;
    return art;
  }

  if (kind == "gap-scan") {
    check_keys(params, {"n_list", "n_a", "states", "bases"}, {}, "params");
    auto rows = averaged_truncated_gaps(get_as<std::vector<int>>(params, "n_list", "params"),
                                        get_as<int>(params, "n_a", "params"),
                                        get_as<int>(params, "states", "params"),
                                        get_as<int>(params, "bases", "params"), seed);
    CsvWriter csv("n,n_a,seed,i,gap,mean,std", digest);
    for (const auto& r : rows)
      csv.row(r.n, r.n_a, r.state_index, r.i, r.gap, r.mean, r.std_dev);
    art.csv_files["gap_scan.csv"] = csv.str();
    json means = json::array();
    for (const auto& r : rows)
      if (r.state_index == 0)
        means.push_back(json{{"n", r.n}, {"i", r.i}, {"mean", r.mean}, {"std", r.std_dev}});
    art.summary["means"] = means;
    return art;
  }

  throw ConfigError("unknown experiment kind '" + kind + "'");
}

inline Artifacts run_experiment_file(const std::filesystem::path& path,
                                     std::optional<std::uint64_t> seed_override,
                                     int workers) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json config;
  try {
    in >> config;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return run_experiment(std::move(config), seed_override, workers);
}

}  // namespace locq
