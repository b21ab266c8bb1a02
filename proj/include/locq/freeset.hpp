// freeset.hpp
// Maximal-fidelity oracles over free projected-state sets: separable states
// across a cut, stabilizer states, and entanglement-thresholded sets with
// Fannes-type fidelity bounds.

#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>

#include <nlohmann/json.hpp>

#include "locq/qstate.hpp"
#include "locq/states.hpp"

namespace locq {

// --- separable free set --------------------------------------------------

// sup over separable states of tr(sigma phi) for pure phi equals the largest
// squared Schmidt coefficient across the cut.
inline double separable_fidelity(const PureState& phi, const Bipartition& cut) {
  return schmidt_spectrum(phi, cut).front();
}

// --- stabilizer free set --------------------------------------------------

struct StabilizerDictionary {
  int n = 0;
  std::vector<PureState> states;

  std::size_t count() const { return states.size(); }
};

inline std::size_t stabilizer_state_count(int n) {
  std::size_t c = dim_of(n);
  for (int k = 1; k <= n; ++k) c *= dim_of(k) + 1;
  return c;
}

namespace detail {

// Global-phase-invariant fingerprint: rotate the largest-magnitude amplitude
// to the positive real axis, then round to a 1e-9 grid.
inline std::string phase_invariant_fingerprint(const PureState& s) {
  std::size_t ref = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    double m = std::abs(s.amps[i]);
    if (m > best + 1e-9) {
      best = m;
      ref = i;
    }
  }
  cplx rot = std::conj(s.amps[ref]) / std::abs(s.amps[ref]);
  std::string out;
  out.reserve(s.dim() * 24);
  char buf[48];
  for (const auto& a : s.amps) {
    cplx v = a * rot;
    auto snap = [](double x) {
      double r = std::round(x * 1e9) / 1e9;
      return r == 0.0 ? 0.0 : r;  // avoid -0
    };
    std::snprintf(buf, sizeof buf, "%.9f,%.9f;", snap(v.real()), snap(v.imag()));
    out += buf;
  }
  return out;
}

// Enumerates all n-qubit stabilizer states from the canonical affine form:
// sum over x in F_2^k of i^(c.x) (-1)^(sum_{i<j} q_ij x_i x_j) |Rx + t>,
// with R an n x k reduced column-echelon basis, t a coset representative
// supported off the pivot rows, c in Z_4^k, and q strictly upper binary.
// The parameter tuples are in bijection with the states.
inline std::vector<PureState> enumerate_affine_stabilizers(int n) {
  std::vector<PureState> out;
  const std::size_t dim = dim_of(n);

  for (int k = 0; k <= n; ++k) {
    // pivot row subsets r_0 < ... < r_{k-1}
    std::vector<int> pivots(k);
    std::function<void(int, int)> choose = [&](int start, int depth) {
      if (depth == k) {
        // free positions of R: rows below the pivot that are not pivots
        std::vector<std::pair<int, int>> free_slots;  // (row, col)
        std::vector<bool> is_pivot(n, false);
        for (int p : pivots) is_pivot[p] = true;
        for (int j = 0; j < k; ++j)
          for (int i = pivots[j] + 1; i < n; ++i)
            if (!is_pivot[i]) free_slots.emplace_back(i, j);

        std::vector<int> tfree;  // non-pivot rows carry the coset bits
        for (int i = 0; i < n; ++i)
          if (!is_pivot[i]) tfree.push_back(i);

        const std::size_t n_r = std::size_t{1} << free_slots.size();
        const std::size_t n_t = std::size_t{1} << tfree.size();
        const std::size_t n_c = std::size_t{1} << (2 * k);
        const std::size_t n_q = std::size_t{1} << (k * (k - 1) / 2);

        std::vector<std::uint32_t> r_cols(k);
        for (std::size_t rbits = 0; rbits < n_r; ++rbits) {
          for (int j = 0; j < k; ++j) r_cols[j] = 1u << (n - 1 - pivots[j]);
          for (std::size_t s = 0; s < free_slots.size(); ++s)
            if ((rbits >> s) & 1u)
              r_cols[free_slots[s].second] |= 1u << (n - 1 - free_slots[s].first);

          for (std::size_t tbits = 0; tbits < n_t; ++tbits) {
            std::uint32_t t = 0;
            for (std::size_t s = 0; s < tfree.size(); ++s)
              if ((tbits >> s) & 1u) t |= 1u << (n - 1 - tfree[s]);

            // support points |Rx + t| for all x
            const std::size_t npts = std::size_t{1} << k;
            std::vector<std::uint32_t> support(npts);
            for (std::size_t x = 0; x < npts; ++x) {
              std::uint32_t u = t;
              for (int j = 0; j < k; ++j)
                if ((x >> j) & 1u) u ^= r_cols[j];
              support[x] = u;
            }

            const double amp = 1.0 / std::sqrt(static_cast<double>(npts));
            static const cplx kI4[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0),
                                        cplx(0, -1)};
            for (std::size_t c = 0; c < n_c; ++c) {
              for (std::size_t q = 0; q < n_q; ++q) {
                PureState s;
                s.n = n;
                s.amps.assign(dim, cplx{0.0, 0.0});
                for (std::size_t x = 0; x < npts; ++x) {
                  int phase = 0;
                  for (int j = 0; j < k; ++j)
                    if ((x >> j) & 1u) phase += static_cast<int>((c >> (2 * j)) & 3u);
                  int qi = 0;
                  for (int j1 = 0; j1 < k; ++j1)
                    for (int j2 = j1 + 1; j2 < k; ++j2, ++qi)
                      if (((x >> j1) & 1u) && ((x >> j2) & 1u) && ((q >> qi) & 1u))
                        phase += 2;
                  s.amps[support[x]] = amp * kI4[phase & 3];
                }
                out.push_back(std::move(s));
              }
            }
          }
        }
        return;
      }
      for (int r = start; r <= n - (k - depth); ++r) {
        pivots[depth] = r;
        choose(r + 1, depth + 1);
      }
    };
    choose(0, 0);
  }
  return out;
}

inline std::filesystem::path stabilizer_cache_path(int n) {
  const char* env = std::getenv("LOCQ_CACHE_DIR");
  std::filesystem::path dir = env ? env : ".locq-cache";
  return dir / ("stabilizers_n" + std::to_string(n) + ".json");
}

inline bool load_stabilizer_cache(int n, std::vector<PureState>& states) {
  auto path = stabilizer_cache_path(n);
  std::ifstream in(path);
  if (!in) return false;
  nlohmann::json j;
  try {
    in >> j;
  } catch (...) {
    return false;
  }
  if (!j.contains("count") || !j.contains("states") || !j.contains("n"))
    return false;
  if (j["n"].get<int>() != n) return false;
  if (j["count"].get<std::size_t>() != stabilizer_state_count(n)) return false;
  const auto& arr = j["states"];
  if (arr.size() != stabilizer_state_count(n)) return false;
  std::vector<PureState> loaded;
  loaded.reserve(arr.size());
  const std::size_t dim = dim_of(n);
  for (const auto& flat : arr) {
    if (flat.size() != 2 * dim) return false;
    PureState s;
    s.n = n;
    s.amps.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
      s.amps[i] = cplx(flat[2 * i].get<double>(), flat[2 * i + 1].get<double>());
    loaded.push_back(std::move(s));
  }
  states = std::move(loaded);
  return true;
}

inline void store_stabilizer_cache(int n, const std::vector<PureState>& states) {
  auto path = stabilizer_cache_path(n);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) return;  // caching is best-effort
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : states) {
    nlohmann::json flat = nlohmann::json::array();
    for (const auto& a : s.amps) {
      flat.push_back(a.real());
      flat.push_back(a.imag());
    }
    arr.push_back(std::move(flat));
  }
  nlohmann::json j{{"n", n}, {"count", states.size()}, {"states", std::move(arr)}};
  auto tmp = path;
  tmp += ".tmp";
  std::ofstream out(tmp);
  if (!out) return;
  out << j.dump();
  out.close();
  std::filesystem::rename(tmp, path, ec);
}

}  // namespace detail

inline StabilizerDictionary enumerate_stabilizer_states(int n) {
  if (n < 1 || n > 3)
    throw UnsupportedSize("stabilizer dictionaries are built for n <= 3");
  StabilizerDictionary dict;
  dict.n = n;
  if (detail::load_stabilizer_cache(n, dict.states)) return dict;

  dict.states = detail::enumerate_affine_stabilizers(n);

  // fingerprint dedup as a consistency guard; the affine form is already
  // duplicate-free
  std::unordered_set<std::string> seen;
  for (const auto& s : dict.states) {
    if (!seen.insert(detail::phase_invariant_fingerprint(s)).second)
      throw Error("duplicate stabilizer state in enumeration");
  }
  if (dict.states.size() != stabilizer_state_count(n))
    throw Error("stabilizer enumeration count mismatch");

  detail::store_stabilizer_cache(n, dict.states);
  return dict;
}

// Shared immutable dictionaries; built once per size.
inline const StabilizerDictionary& stabilizer_dictionary(int n) {
  static std::mutex mu;
  static std::map<int, StabilizerDictionary> dicts;
  std::lock_guard<std::mutex> lock(mu);
  auto it = dicts.find(n);
  if (it == dicts.end()) it = dicts.emplace(n, enumerate_stabilizer_states(n)).first;
  return it->second;
}

inline double stabilizer_fidelity(const PureState& phi,
                                  const StabilizerDictionary& dict) {
  if (phi.n != dict.n)
    throw SizeMismatch("state size does not match the dictionary");
  double best = 0.0;
  const std::size_t dim = phi.dim();
  for (const auto& s : dict.states) {
    cplx ov{0.0, 0.0};
    for (std::size_t i = 0; i < dim; ++i) ov += std::conj(s.amps[i]) * phi.amps[i];
    best = std::max(best, std::norm(ov));
  }
  return std::min(best, 1.0);
}

// --- entanglement-thresholded free sets -----------------------------------

// Fannes-type fidelity bound for a pure state with entanglement e (bits)
// across a cut whose smaller side has l_size qubits, against the set of
// states with entanglement at most `ceiling`: when e > ceiling + 1 the trace
// distance is at least (e - ceiling - 1) / (2 l_size).
inline double fannes_fidelity_bound(double e, double ceiling, double l_size) {
  if (l_size <= 0.0) throw InvalidArgument("cut size must be positive");
  if (e <= ceiling + 1.0) return 1.0;  // vacuous regime
  double x = (e - ceiling - 1.0) / (2.0 * l_size);
  x = std::min(x, 1.0);
  return 1.0 - x * x;
}

// Free set: projected states of depth-d circuits on the 2w x 2w geometry,
// whose L|R entanglement is at most 8wd. |L| = 2w^2.
inline double complexity_fidelity_bound(double e, int w, int d) {
  if (w < 1 || d < 1) throw InvalidArgument("w and d must be positive");
  return fannes_fidelity_bound(e, 8.0 * w * d, 2.0 * w * w);
}

// Measurement-assisted analogue: the p-likely free set has entanglement
// ceiling 12wd/(1 - p_prime).
inline double plikely_fidelity_bound(double e, int w, int d, double p_prime) {
  if (w < 1 || d < 1) throw InvalidArgument("w and d must be positive");
  if (!(p_prime > 0.0 && p_prime < 1.0))
    throw InvalidProbability("p' must lie strictly between 0 and 1");
  return fannes_fidelity_bound(e, 12.0 * w * d / (1.0 - p_prime), 2.0 * w * w);
}

// t + (1 - t) * 1[fid <= t]
inline double thresholded_witness_weight(double fid, double t) {
  if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("t must lie in (0,1)");
  return fid <= t ? 1.0 : t;
}

// --- oracle ---------------------------------------------------------------

// Maximal fidelity of a pure projected state against a free projected-state
// set. Only pure inputs are accepted; mixed projected states never reach the
// oracle because targets are pure.
class FidelityOracle {
 public:
  enum class Kind { Separable, Stabilizer, EntanglementThreshold, ExplicitBound };

  static FidelityOracle separable(Bipartition cut) {
    FidelityOracle o;
    o.kind_ = Kind::Separable;
    o.cut_ = std::move(cut);
    o.label_ = "separable";
    o.fn_ = [cut = o.cut_](const PureState& s) {
      return separable_fidelity(s, cut);
    };
    return o;
  }

  static FidelityOracle stabilizer(int n_a) {
    FidelityOracle o;
    o.kind_ = Kind::Stabilizer;
    o.label_ = "stabilizer";
    const StabilizerDictionary& dict = stabilizer_dictionary(n_a);
    o.fn_ = [&dict](const PureState& s) { return stabilizer_fidelity(s, dict); };
    return o;
  }

  // Entanglement-thresholded set across `cut` inside A with an explicit
  // entropy ceiling; `l_size` enters the Fannes denominator.
  static FidelityOracle entanglement_threshold(Bipartition cut, double ceiling,
                                               double l_size) {
    FidelityOracle o;
    o.kind_ = Kind::EntanglementThreshold;
    o.cut_ = std::move(cut);
    o.label_ = "entanglement-threshold";
    o.fn_ = [cut = o.cut_, ceiling, l_size](const PureState& s) {
      return fannes_fidelity_bound(entanglement_entropy(s, cut), ceiling, l_size);
    };
    return o;
  }

  static FidelityOracle explicit_bound(std::function<double(const PureState&)> fn,
                                       std::string label = "explicit-bound") {
    FidelityOracle o;
    o.kind_ = Kind::ExplicitBound;
    o.label_ = std::move(label);
    o.fn_ = std::move(fn);
    return o;
  }

  double operator()(const PureState& proj) const {
    double v = fn_(proj);
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw Error("oracle returned a value outside [0,1]");
    return std::clamp(v, 0.0, 1.0);
  }

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }

 private:
  Kind kind_ = Kind::ExplicitBound;
  Bipartition cut_;
  std::string label_;
  std::function<double(const PureState&)> fn_;
};

}  // namespace locq
