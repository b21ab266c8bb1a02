// serialize.hpp
// JSON and CSV output for reports, trial logs, ensembles, and circuits.
// Summaries use sorted-key JSON so reruns with the same seed are
// byte-identical apart from the wall-time field.

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "locq/ensemble.hpp"
#include "locq/models.hpp"
#include "locq/protocol.hpp"
#include "locq/version.hpp"

namespace locq {

using json = nlohmann::json;

// FNV-1a over the canonical dump; stable across runs and platforms.
inline std::string config_digest(const json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json to_json(const GapInfo& g) {
  return json{{"value", g.value},
              {"std_error", g.std_error},
              {"exact", g.exact},
              {"samples", g.samples}};
}

inline json to_json(const TrialRecord& r) {
  json j{{"i", r.index},
         {"b", r.b_labels},
         {"a", r.a_labels},
         {"omega", r.omega},
         {"offset", r.offset}};
  if (r.dead_branch) j["dead"] = true;
  return j;
}

inline json to_json(const CertificationReport& r) {
  json j{{"verdict", r.accept ? "accept" : "reject"},
         {"omega", r.omega},
         {"eta_star", r.eta_star},
         {"trials", r.total_trials},
         {"formula_trials", r.formula_trials},
         {"mom", {{"block_size", r.mom.block_size}, {"block_count", r.mom.block_count}}},
         {"gap", to_json(r.gap)},
         {"variance", r.variance_used},
         {"variance_mode", r.variance_mode},
         {"seed", r.seed},
         {"dead_branches", r.dead_branches}};
  if (r.unsound_toy) j["unsound_toy"] = true;
  if (!r.extras.empty()) {
    json e;
    for (const auto& [k, v] : r.extras) e[k] = v;
    j["extras"] = e;
  }
  return j;
}

inline json to_json(const InseparableReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back(json{{"qubits", {p.qa, p.qb}},
                         {"le", to_json(p.le)},
                         {"omega", p.omega},
                         {"eta_star", p.eta_star},
                         {"verdict", p.accept ? "accept" : "reject"}});
  return json{{"verdict", r.accept ? "accept" : "reject"},
              {"trials", r.total_trials},
              {"mom", {{"block_size", r.mom.block_size}, {"block_count", r.mom.block_count}}},
              {"delta_per_pair", r.delta_per_pair},
              {"seed", r.seed},
              {"pairs", pairs}};
}

inline json to_json(const ProjectedEnsemble& ens) {
  json entries = json::array();
  for (const auto& e : ens.entries) {
    json amps = json::array();
    for (const auto& a : e.state.amps) {
      amps.push_back(a.real());
      amps.push_back(a.imag());
    }
    entries.push_back(
        json{{"p", e.p}, {"label", labels_to_string(e.labels)}, {"amplitudes", amps}});
  }
  return json{{"partition", {{"A", ens.part.A}, {"B", ens.part.B}}},
              {"mode", ens.mode == ProjectedEnsemble::Mode::Exact
                           ? "exact-enumeration"
                           : "monte-carlo-sample"},
              {"entries", entries}};
}

inline ProjectedEnsemble ensemble_from_json(const json& j) {
  ProjectedEnsemble ens;
  ens.part.A = j.at("partition").at("A").get<std::vector<int>>();
  ens.part.B = j.at("partition").at("B").get<std::vector<int>>();
  ens.mode = j.at("mode").get<std::string>() == "exact-enumeration"
                 ? ProjectedEnsemble::Mode::Exact
                 : ProjectedEnsemble::Mode::MonteCarlo;
  for (const auto& e : j.at("entries")) {
    ProjectedEnsemble::Entry entry;
    entry.p = e.at("p").get<double>();
    entry.labels = labels_from_string(e.at("label").get<std::string>());
    const auto& amps = e.at("amplitudes");
    entry.state.n = 0;
    std::size_t count = amps.size() / 2;
    while (dim_of(entry.state.n) < count) ++entry.state.n;
    entry.state.amps.resize(count);
    for (std::size_t i = 0; i < count; ++i)
      entry.state.amps[i] = cplx(amps[2 * i].get<double>(), amps[2 * i + 1].get<double>());
    ens.entries.push_back(std::move(entry));
  }
  return ens;
}

inline json to_json(const CircuitSpec& spec) {
  json layers = json::array();
  auto gate_to_json = [](const CircuitGate& g) {
    json m = json::array();
    for (Eigen::Index r = 0; r < g.matrix.rows(); ++r)
      for (Eigen::Index c = 0; c < g.matrix.cols(); ++c) {
        m.push_back(g.matrix(r, c).real());
        m.push_back(g.matrix(r, c).imag());
      }
    return json{{"name", g.name}, {"targets", g.targets}, {"matrix", m}};
  };
  for (const auto& l : spec.layers) {
    json jl;
    json gs = json::array();
    for (const auto& g : l.gates) gs.push_back(gate_to_json(g));
    jl["gates"] = gs;
    if (!l.measured_qubits.empty()) jl["measure"] = l.measured_qubits;
    if (!l.conditional.empty()) {
      json cond;
      for (const auto& [rec, gates_] : l.conditional) {
        json cgs = json::array();
        for (const auto& g : gates_) cgs.push_back(gate_to_json(g));
        cond[rec] = cgs;
      }
      jl["conditional"] = cond;
    }
    layers.push_back(std::move(jl));
  }
  return json{{"n", spec.n}, {"layers", layers}};
}

// CSV with "# key=value" comment headers; every scan artifact embeds the
// config digest and toolkit version this way.
class CsvWriter {
 public:
  CsvWriter(std::string header_row, const std::string& digest) {
    out_ << "# version=" << kVersion << "\n";
    out_ << "# config=" << digest << "\n";
    out_ << header_row << "\n";
  }

  template <typename... Ts>
  void row(Ts&&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << format(std::forward<Ts>(fields)), first = false), ...);
    out_ << "\n";
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }
  static std::string format(int v) { return std::to_string(v); }
  static std::string format(long v) { return std::to_string(v); }
  static std::string format(std::size_t v) { return std::to_string(v); }
  static std::string format(const std::string& v) { return v; }
  static std::string format(const char* v) { return v; }

  std::ostringstream out_;
};

}  // namespace locq
