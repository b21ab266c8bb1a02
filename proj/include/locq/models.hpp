// models.hpp
// State and circuit generators: Haar unitaries and states, brickwork
// circuits with optional mid-circuit measurements, the magic-injection
// model, and global depolarizing noise.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "locq/clifford.hpp"
#include "locq/qstate.hpp"
#include "locq/states.hpp"

namespace locq {

// Haar-distributed unitary via QR of a complex Ginibre matrix with the R
// diagonal phases absorbed into Q.
inline Matrix haar_unitary(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = cplx(rng.gaussian(), rng.gaussian());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    cplx d = rmat(c, c);
    q.col(c) *= d / std::abs(d);
  }
  return q;
}

inline Matrix haar_two_qubit_unitary(Rng& rng) { return haar_unitary(4, rng); }

inline PureState haar_state(int n, Rng& rng) {
  PureState s;
  s.n = n;
  s.amps.resize(dim_of(n));
  for (auto& a : s.amps) a = cplx(rng.gaussian(), rng.gaussian());
  s.renormalize();
  return s;
}

// --- circuits ---------------------------------------------------------------

struct CircuitGate {
  std::string name;          // named Clifford gates or "U" for raw matrices
  std::vector<int> targets;  // 1 or 2 qubits
  Matrix matrix;
};

struct CircuitLayer {
  std::vector<CircuitGate> gates;
  // alternative gate lists keyed by the measurement record collected so far;
  // when non-empty the keys must cover every possible record
  std::map<std::string, std::vector<CircuitGate>> conditional;
  std::vector<int> measured_qubits;  // computational-basis mid-circuit reads
};

struct CircuitSpec {
  int n = 0;
  std::vector<CircuitLayer> layers;

  int total_measurements() const {
    int c = 0;
    for (const auto& l : layers) c += static_cast<int>(l.measured_qubits.size());
    return c;
  }
};

inline Matrix named_gate_matrix(CliffordGate g) {
  switch (g) {
    case CliffordGate::H: return gates::H();
    case CliffordGate::S: return gates::S();
    case CliffordGate::Sdg: return gates::Sdg();
    case CliffordGate::X: return gates::X();
    case CliffordGate::Y: return gates::Y();
    case CliffordGate::Z: return gates::Z();
    case CliffordGate::CX: return gates::CX();
    default: return gates::CZ();
  }
}

namespace detail {

inline void check_layer_supports(const CircuitLayer& layer, int n) {
  std::vector<bool> used(n, false);
  auto claim = [&](int q) {
    if (q < 0 || q >= n) throw InvalidArgument("circuit target out of range");
    if (used[q]) throw InvalidArgument("overlapping supports within a layer");
    used[q] = true;
  };
  for (const auto& g : layer.gates)
    for (int q : g.targets) claim(q);
  for (int q : layer.measured_qubits) claim(q);
}

}  // namespace detail

inline void validate_circuit(const CircuitSpec& spec) {
  int record_len = 0;
  for (const auto& layer : spec.layers) {
    detail::check_layer_supports(layer, spec.n);
    if (!layer.conditional.empty()) {
      const std::size_t expect = dim_of(record_len);
      if (layer.conditional.size() != expect)
        throw InvalidArgument("conditional branches must cover all outcome prefixes");
      for (const auto& [key, gates_] : layer.conditional) {
        if (static_cast<int>(key.size()) != record_len)
          throw InvalidArgument("conditional key length must match the record");
        CircuitLayer probe;
        probe.gates = gates_;
        probe.measured_qubits = layer.measured_qubits;
        detail::check_layer_supports(probe, spec.n);
      }
    }
    record_len += static_cast<int>(layer.measured_qubits.size());
  }
}

struct CircuitRunResult {
  PureState state;
  std::string record;        // measurement outcomes in execution order
  double record_probability = 1.0;
};

inline CircuitRunResult run_circuit(const CircuitSpec& spec, const PureState& initial,
                                    Rng& rng) {
  if (initial.n != spec.n) throw SizeMismatch("initial state does not match circuit");
  validate_circuit(spec);
  CircuitRunResult out;
  out.state = initial;
  for (const auto& layer : spec.layers) {
    const std::vector<CircuitGate>* gates_ = &layer.gates;
    if (!layer.conditional.empty()) {
      auto it = layer.conditional.find(out.record);
      if (it == layer.conditional.end())
        throw Error("missing conditional branch for record " + out.record);
      gates_ = &it->second;
    }
    for (const auto& g : *gates_)
      out.state = apply_unitary(out.state, g.matrix, g.targets);
    for (int q : layer.measured_qubits) {
      const std::size_t stride = dim_of(out.state.n - 1 - q);
      double p1 = 0.0;
      for (std::size_t base = 0; base < out.state.dim(); base += 2 * stride)
        for (std::size_t off = 0; off < stride; ++off)
          p1 += std::norm(out.state.amps[base + off + stride]);
      const int bit = rng.uniform() < p1 ? 1 : 0;
      const double p = bit ? p1 : 1.0 - p1;
      const double inv = 1.0 / std::sqrt(std::max(p, 1e-300));
      for (std::size_t base = 0; base < out.state.dim(); base += 2 * stride)
        for (std::size_t off = 0; off < stride; ++off) {
          out.state.amps[base + off + (bit ? stride : 0)] *= inv;
          out.state.amps[base + off + (bit ? 0 : stride)] = cplx{0.0, 0.0};
        }
      out.record += bit ? '1' : '0';
      out.record_probability *= p;
    }
  }
  return out;
}

// --- brickwork circuits -------------------------------------------------------

// Staggered nearest-neighbor layers with Haar-random two-qubit gates and open
// boundaries. 1D: odd layers couple (2x, 2x+1), even layers (2x-1, 2x).
// 2D (m x m, row-major): layers cycle through the two staggerings of each
// coordinate axis, rows first.
inline CircuitSpec brickwork_circuit(const std::vector<int>& dims, int depth, Rng& rng) {
  if (dims.empty() || dims.size() > 2) throw InvalidArgument("dims must be 1D or 2D");
  for (int d : dims)
    if (d < 1) throw InvalidArgument("lattice dimensions must be positive");
  if (depth < 0) throw InvalidArgument("depth must be non-negative");

  CircuitSpec spec;
  const int m0 = dims[0];
  const int m1 = dims.size() == 2 ? dims[1] : 1;
  spec.n = m0 * m1;

  auto qubit = [&](int r, int c) { return r * m1 + c; };

  for (int layer = 1; layer <= depth; ++layer) {
    CircuitLayer l;
    auto add_pair = [&](int qa, int qb) {
      CircuitGate g;
      g.name = "U";
      g.targets = {qa, qb};
      g.matrix = haar_two_qubit_unitary(rng);
      l.gates.push_back(std::move(g));
    };
    if (dims.size() == 1) {
      const bool odd = layer % 2 == 1;
      for (int x = odd ? 0 : 1; x + 1 < m0; x += 2) add_pair(x, x + 1);
    } else {
      const int phase = (layer - 1) % 4;
      const bool along_rows = phase < 2;     // coordinate 1 = row index
      const bool stagger = (phase % 2) == 1; // second staggering starts at 1
      if (along_rows) {
        for (int c = 0; c < m1; ++c)
          for (int r = stagger ? 1 : 0; r + 1 < m0; r += 2)
            add_pair(qubit(r, c), qubit(r + 1, c));
      } else {
        for (int r = 0; r < m0; ++r)
          for (int c = stagger ? 1 : 0; c + 1 < m1; c += 2)
            add_pair(qubit(r, c), qubit(r, c + 1));
      }
    }
    spec.layers.push_back(std::move(l));
  }
  return spec;
}

inline PureState brickwork_state(const std::vector<int>& dims, int depth, Rng& rng) {
  CircuitSpec spec = brickwork_circuit(dims, depth, rng);
  return run_circuit(spec, zero_state(spec.n), rng).state;
}

// --- random Clifford as a circuit ----------------------------------------------

inline CircuitSpec random_clifford_unitary(int n, Rng& rng) {
  if (n < 1 || n > 14) throw UnsupportedSize("Clifford circuits support 1..14 qubits");
  CircuitSpec spec;
  spec.n = n;
  for (const NamedGate& g : random_clifford_gates(n, rng)) {
    CircuitLayer l;
    CircuitGate cg;
    cg.name = to_string(g.kind);
    cg.targets = g.q1 >= 0 ? std::vector<int>{g.q0, g.q1} : std::vector<int>{g.q0};
    cg.matrix = named_gate_matrix(g.kind);
    l.gates.push_back(std::move(cg));
    spec.layers.push_back(std::move(l));
  }
  return spec;
}

// --- magic injection -------------------------------------------------------------

// C [R_Z(alpha)|+>]^(x n) for a uniformly random Clifford C.
inline PureState magic_injection_state(int n, double alpha, Rng& rng) {
  if (alpha < 0.0 || alpha > M_PI / 4 + 1e-12)
    throw InvalidArgument("alpha must lie in [0, pi/4]");
  PureState s = plus_state(n);
  Matrix rz = gates::RZ(alpha);
  for (int q = 0; q < n; ++q) s = apply_unitary(s, rz, {q});
  CircuitSpec c = random_clifford_unitary(n, rng);
  Rng unused(0);
  return run_circuit(c, s, unused).state;
}

// --- depolarizing noise ------------------------------------------------------------

inline DensityState depolarize(const PureState& psi, double p) {
  if (p < 0.0 || p > 1.0) throw InvalidProbability("p must lie in [0,1]");
  if (psi.n > 10) throw UnsupportedSize("density form caps at 10 qubits; use the mixture");
  DensityState rho = DensityState::from_pure(psi);
  const auto d = static_cast<Eigen::Index>(rho.dim());
  rho.mat = (1.0 - p) * rho.mat +
            (p / static_cast<double>(d)) * Matrix::Identity(d, d);
  return rho;
}

// Branch mixture usable at any size: psi with weight 1-p, a uniformly random
// computational basis state with weight p.
struct DepolarizedMixture {
  PureState psi;
  double p = 0.0;

  PureState sample_branch(Rng& rng) const {
    if (rng.uniform() < 1.0 - p) return psi;
    return PureState::computational(psi.n, rng.below(dim_of(psi.n)));
  }
};

inline DepolarizedMixture depolarize_mixture(PureState psi, double p) {
  if (p < 0.0 || p > 1.0) throw InvalidProbability("p must lie in [0,1]");
  return DepolarizedMixture{std::move(psi), p};
}

}  // namespace locq
