// ensemble.hpp
// Projected ensembles: enumeration under a fixed local basis assignment,
// Born sampling with fixed-Z or uniform-random Pauli bases, the localizable
// quantumness metrics, and design-moment diagnostics.

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "locq/freeset.hpp"
#include "locq/qstate.hpp"

namespace locq {

// --- outcome labels over {0, 1, +, -, +i, -i} ------------------------------

enum class Label : std::uint8_t { Zero, One, Plus, Minus, PlusI, MinusI };

inline const char* label_token(Label l) {
  switch (l) {
    case Label::Zero: return "0";
    case Label::One: return "1";
    case Label::Plus: return "+";
    case Label::Minus: return "-";
    case Label::PlusI: return "+i";
    default: return "-i";
  }
}

inline Label label_for(PauliBasis b, int bit) {
  switch (b) {
    case PauliBasis::Z: return bit ? Label::One : Label::Zero;
    case PauliBasis::X: return bit ? Label::Minus : Label::Plus;
    default: return bit ? Label::MinusI : Label::PlusI;
  }
}

inline PauliBasis basis_of(Label l) {
  switch (l) {
    case Label::Zero:
    case Label::One: return PauliBasis::Z;
    case Label::Plus:
    case Label::Minus: return PauliBasis::X;
    default: return PauliBasis::Y;
  }
}

inline int bit_of_label(Label l) {
  return (l == Label::One || l == Label::Minus || l == Label::MinusI) ? 1 : 0;
}

// Single-qubit statevector of the label's eigenstate.
inline std::array<cplx, 2> label_amplitudes(Label l) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (l) {
    case Label::Zero: return {cplx(1, 0), cplx(0, 0)};
    case Label::One: return {cplx(0, 0), cplx(1, 0)};
    case Label::Plus: return {cplx(s, 0), cplx(s, 0)};
    case Label::Minus: return {cplx(s, 0), cplx(-s, 0)};
    case Label::PlusI: return {cplx(s, 0), cplx(0, s)};
    default: return {cplx(s, 0), cplx(0, -s)};
  }
}

inline std::string labels_to_string(const std::vector<Label>& ls) {
  std::string out;
  for (Label l : ls) out += label_token(l);
  return out;
}

// Greedy parse; '+'/'-' followed by 'i' consumes both characters.
inline std::vector<Label> labels_from_string(const std::string& s) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    switch (s[i]) {
      case '0': out.push_back(Label::Zero); break;
      case '1': out.push_back(Label::One); break;
      case '+':
        if (i + 1 < s.size() && s[i + 1] == 'i') {
          out.push_back(Label::PlusI);
          ++i;
        } else {
          out.push_back(Label::Plus);
        }
        break;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == 'i') {
          out.push_back(Label::MinusI);
          ++i;
        } else {
          out.push_back(Label::Minus);
        }
        break;
      default:
        throw InvalidArgument("unknown outcome label character");
    }
  }
  return out;
}

// --- basis assignments ------------------------------------------------------

struct BasisAssignment {
  enum class Mode { FixedZ, UniformRandomPauli };

  Mode mode = Mode::FixedZ;
  std::vector<PauliBasis> bases;  // used verbatim in fixed mode

  static BasisAssignment fixed_z(int n_b) {
    BasisAssignment a;
    a.mode = Mode::FixedZ;
    a.bases.assign(n_b, PauliBasis::Z);
    return a;
  }

  static BasisAssignment fixed(std::vector<PauliBasis> b) {
    BasisAssignment a;
    a.mode = Mode::FixedZ;
    a.bases = std::move(b);
    return a;
  }

  static BasisAssignment uniform_random(int n_b) {
    BasisAssignment a;
    a.mode = Mode::UniformRandomPauli;
    a.bases.assign(n_b, PauliBasis::Z);
    return a;
  }
};

inline std::vector<PauliBasis> draw_bases(int n_b, Rng& rng) {
  std::vector<PauliBasis> out(n_b);
  for (auto& b : out) b = static_cast<PauliBasis>(rng.below(3));
  return out;
}

// --- enumeration -------------------------------------------------------------

struct ProjectedEnsemble {
  enum class Mode { Exact, MonteCarlo };

  struct Entry {
    double p = 0.0;
    std::vector<Label> labels;
    PureState state;
  };

  Bipartition part;
  Mode mode = Mode::Exact;
  std::vector<Entry> entries;
};

namespace detail {

// Rotates every B qubit so that the basis eigenvectors become |0>, |1>.
inline PureState rotate_b_to_computational(const PureState& psi,
                                           const Bipartition& part,
                                           const std::vector<PauliBasis>& bases) {
  PureState rotated = psi;
  cplx m[4];
  for (std::size_t j = 0; j < part.B.size(); ++j) {
    basis_rotation(bases[j], m);
    apply_1q(rotated.amps, rotated.n, part.B[j], m);
  }
  return rotated;
}

}  // namespace detail

// Visits (probability, labels, projected state) for every outcome of a fixed
// basis string with probability above the cutoff. Probabilities are
// conditioned on the basis string.
inline void for_each_projected(const PureState& psi, const Bipartition& part,
                               const std::vector<PauliBasis>& bases,
                               const std::function<void(double, const std::vector<Label>&,
                                                        const PureState&)>& fn) {
  part.check();
  if (part.n() != psi.n) throw SizeMismatch("partition does not match state");
  if (bases.size() != part.B.size())
    throw InvalidArgument("basis assignment length must equal |B|");
  const int n_b = static_cast<int>(part.B.size());
  if (n_b > 24) throw TooLargeToEnumerate("|B| > 24");

  PureState rotated = detail::rotate_b_to_computational(psi, part, bases);
  std::vector<Label> labels(n_b);
  const std::size_t outcomes = dim_of(n_b);
  for (std::size_t z = 0; z < outcomes; ++z) {
    try {
      auto [p, proj] = projected_state(rotated, part, z);
      for (int j = 0; j < n_b; ++j)
        labels[j] = label_for(bases[j], static_cast<int>((z >> (n_b - 1 - j)) & 1u));
      fn(p, labels, proj);
    } catch (const ZeroProbabilityOutcome&) {
    }
  }
}

inline ProjectedEnsemble enumerate_ensemble(const PureState& psi,
                                            const Bipartition& part,
                                            const BasisAssignment& basis) {
  if (basis.mode != BasisAssignment::Mode::FixedZ)
    throw InvalidArgument("enumeration requires a fixed basis assignment");
  ProjectedEnsemble ens;
  ens.part = part;
  ens.mode = ProjectedEnsemble::Mode::Exact;
  for_each_projected(psi, part, basis.bases,
                     [&](double p, const std::vector<Label>& ls, const PureState& s) {
                       ens.entries.push_back({p, ls, s});
                     });
  return ens;
}

// Enumerates all 3^{n_b} basis strings (first basis varying fastest on the
// last qubit). Guarded by the random-basis exact cap.
inline void for_each_basis_string(int n_b,
                                  const std::function<void(const std::vector<PauliBasis>&)>& fn) {
  if (n_b > 8) throw TooLargeToEnumerate("exact random-basis enumeration caps at |B| <= 8");
  std::vector<PauliBasis> bases(n_b, PauliBasis::X);
  std::size_t total = 1;
  for (int i = 0; i < n_b; ++i) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (int j = n_b - 1; j >= 0; --j) {
      bases[j] = static_cast<PauliBasis>(c % 3);
      c /= 3;
    }
    fn(bases);
  }
}

// --- Born sampling ------------------------------------------------------------

struct SampledProjection {
  std::vector<Label> labels;       // outcome on B, in B list order
  std::vector<PauliBasis> bases;   // chosen basis per B qubit
  PureState projected;             // normalized state on A
};

namespace detail {

// Measures the B qubits sequentially in the given bases, collapsing in place.
// Returns outcome bits (B list order, most significant first).
inline std::size_t measure_b_inplace(PureState& state, const Bipartition& part,
                                     const std::vector<PauliBasis>& bases, Rng& rng) {
  const int n_b = static_cast<int>(part.B.size());
  std::size_t zbits = 0;
  cplx m[4];
  for (int j = 0; j < n_b; ++j) {
    const int q = part.B[j];
    basis_rotation(bases[j], m);
    apply_1q(state.amps, state.n, q, m);
    const std::size_t stride = dim_of(state.n - 1 - q);
    double p1 = 0.0;
    for (std::size_t base = 0; base < state.dim(); base += 2 * stride)
      for (std::size_t off = 0; off < stride; ++off)
        p1 += std::norm(state.amps[base + off + stride]);
    const int bit = rng.uniform() < p1 ? 1 : 0;
    const double inv = 1.0 / std::sqrt(std::max(bit ? p1 : 1.0 - p1, 1e-300));
    for (std::size_t base = 0; base < state.dim(); base += 2 * stride)
      for (std::size_t off = 0; off < stride; ++off) {
        state.amps[base + off + (bit ? stride : 0)] *= inv;
        state.amps[base + off + (bit ? 0 : stride)] = cplx{0.0, 0.0};
      }
    zbits = (zbits << 1) | static_cast<std::size_t>(bit);
  }
  return zbits;
}

}  // namespace detail

inline SampledProjection sample_projected(const PureState& state, const Bipartition& part,
                                          BasisAssignment::Mode mode, Rng& rng) {
  part.check();
  if (part.n() != state.n) throw SizeMismatch("partition does not match state");
  const int n_b = static_cast<int>(part.B.size());
  SampledProjection out;
  out.bases = (mode == BasisAssignment::Mode::UniformRandomPauli)
                  ? draw_bases(n_b, rng)
                  : std::vector<PauliBasis>(n_b, PauliBasis::Z);
  PureState work = state;
  std::size_t zbits = detail::measure_b_inplace(work, part, out.bases, rng);
  out.labels.resize(n_b);
  for (int j = 0; j < n_b; ++j)
    out.labels[j] = label_for(out.bases[j], static_cast<int>((zbits >> (n_b - 1 - j)) & 1u));
  out.projected = projected_state(work, part, zbits).second;
  return out;
}

// Density-matrix variant; the projected state on A stays a density matrix.
struct SampledProjectionMixed {
  std::vector<Label> labels;
  std::vector<PauliBasis> bases;
  DensityState projected;
};

inline SampledProjectionMixed sample_projected(const DensityState& state,
                                               const Bipartition& part,
                                               BasisAssignment::Mode mode, Rng& rng) {
  part.check();
  if (part.n() != state.n) throw SizeMismatch("partition does not match state");
  const int n_b = static_cast<int>(part.B.size());
  SampledProjectionMixed out;
  out.bases = (mode == BasisAssignment::Mode::UniformRandomPauli)
                  ? draw_bases(n_b, rng)
                  : std::vector<PauliBasis>(n_b, PauliBasis::Z);

  DensityState work = state;
  const auto d = static_cast<Eigen::Index>(work.dim());
  std::size_t zbits = 0;
  for (int j = 0; j < n_b; ++j) {
    const int q = part.B[j];
    cplx m[4];
    detail::basis_rotation(out.bases[j], m);
    // rho <- (G_q) rho (G_q)^dag via row and column sweeps
    const std::size_t stride = dim_of(work.n - 1 - q);
    for (Eigen::Index col = 0; col < d; ++col)
      for (std::size_t base = 0; base < work.dim(); base += 2 * stride)
        for (std::size_t off = 0; off < stride; ++off) {
          cplx a0 = work.mat(static_cast<Eigen::Index>(base + off), col);
          cplx a1 = work.mat(static_cast<Eigen::Index>(base + off + stride), col);
          work.mat(static_cast<Eigen::Index>(base + off), col) = m[0] * a0 + m[1] * a1;
          work.mat(static_cast<Eigen::Index>(base + off + stride), col) = m[2] * a0 + m[3] * a1;
        }
    for (Eigen::Index row = 0; row < d; ++row)
      for (std::size_t base = 0; base < work.dim(); base += 2 * stride)
        for (std::size_t off = 0; off < stride; ++off) {
          cplx a0 = work.mat(row, static_cast<Eigen::Index>(base + off));
          cplx a1 = work.mat(row, static_cast<Eigen::Index>(base + off + stride));
          work.mat(row, static_cast<Eigen::Index>(base + off)) =
              a0 * std::conj(m[0]) + a1 * std::conj(m[1]);
          work.mat(row, static_cast<Eigen::Index>(base + off + stride)) =
              a0 * std::conj(m[2]) + a1 * std::conj(m[3]);
        }
    // probability of bit 1 and collapse
    double p1 = 0.0;
    for (std::size_t base = 0; base < work.dim(); base += 2 * stride)
      for (std::size_t off = 0; off < stride; ++off)
        p1 += work.mat(static_cast<Eigen::Index>(base + off + stride),
                       static_cast<Eigen::Index>(base + off + stride))
                  .real();
    const int bit = rng.uniform() < p1 ? 1 : 0;
    const double p = std::max(bit ? p1 : 1.0 - p1, 1e-300);
    for (std::size_t r = 0; r < work.dim(); ++r)
      for (std::size_t c = 0; c < work.dim(); ++c) {
        const bool rk = ((r / stride) % 2 == static_cast<std::size_t>(bit));
        const bool ck = ((c / stride) % 2 == static_cast<std::size_t>(bit));
        if (!rk || !ck)
          work.mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
      }
    work.mat /= p;
    zbits = (zbits << 1) | static_cast<std::size_t>(bit);
  }
  out.labels.resize(n_b);
  for (int j = 0; j < n_b; ++j)
    out.labels[j] = label_for(out.bases[j], static_cast<int>((zbits >> (n_b - 1 - j)) & 1u));
  out.projected = projected_state(work, part, zbits).second;
  return out;
}

// --- localizable quantumness ---------------------------------------------------

struct LqEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool exact = false;
  long samples = 0;
};

// Exact ensemble average of 1 - Fid over one fixed basis string.
inline double lq_for_fixed_basis(const PureState& psi, const Bipartition& part,
                                 const std::vector<PauliBasis>& bases,
                                 const FidelityOracle& oracle) {
  double acc = 0.0;
  for_each_projected(psi, part, bases,
                     [&](double p, const std::vector<Label>&, const PureState& s) {
                       acc += p * (1.0 - oracle(s));
                     });
  if (acc < -1e-9) throw Error("localizable quantumness below zero");
  return std::clamp(acc, 0.0, 1.0);
}

// LQ_P(psi): exact in fixed-Z mode; exact in random mode when |B| <= 8 (all
// 3^{|B|} strings enumerated), Monte Carlo with `budget` samples otherwise.
inline LqEstimate localizable_quantumness(const PureState& psi, const Bipartition& part,
                                          const FidelityOracle& oracle,
                                          BasisAssignment::Mode mode, long budget = 0,
                                          Rng* rng = nullptr) {
  LqEstimate out;
  const int n_b = static_cast<int>(part.B.size());
  if (mode == BasisAssignment::Mode::FixedZ) {
    out.estimate = lq_for_fixed_basis(psi, part,
                                      std::vector<PauliBasis>(n_b, PauliBasis::Z), oracle);
    out.exact = true;
    return out;
  }
  if (n_b <= 8) {
    double acc = 0.0;
    double weight = 1.0;
    for (int i = 0; i < n_b; ++i) weight /= 3.0;
    for_each_basis_string(n_b, [&](const std::vector<PauliBasis>& bases) {
      acc += weight * lq_for_fixed_basis(psi, part, bases, oracle);
    });
    out.estimate = std::clamp(acc, 0.0, 1.0);
    out.exact = true;
    return out;
  }
  if (budget <= 0 || rng == nullptr)
    throw InvalidArgument("Monte-Carlo LQ needs a positive budget and an rng");
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < budget; ++i) {
    auto draw = sample_projected(psi, part, mode, *rng);
    double v = 1.0 - oracle(draw.projected);
    sum += v;
    sum2 += v * v;
  }
  out.samples = budget;
  out.estimate = std::clamp(sum / budget, 0.0, 1.0);
  if (budget > 1) {
    double var = std::max(0.0, (sum2 - sum * sum / budget) / (budget - 1));
    out.std_error = std::sqrt(var / budget);
  }
  return out;
}

// --- design-moment diagnostic ----------------------------------------------------

namespace detail {

inline Matrix kth_tensor_power_projector(const PureState& s, int k) {
  Eigen::Map<const Eigen::VectorXcd> v(s.amps.data(),
                                       static_cast<Eigen::Index>(s.dim()));
  Eigen::VectorXcd acc = v;
  for (int i = 1; i < k; ++i) {
    Eigen::VectorXcd next(acc.size() * v.size());
    for (Eigen::Index a = 0; a < acc.size(); ++a)
      next.segment(a * v.size(), v.size()) = acc(a) * v;
    acc = std::move(next);
  }
  return acc * acc.adjoint();
}

}  // namespace detail

// Trace-norm distance between the ensemble's k-th moment and the Haar k-th
// moment (normalized symmetric-subspace projector). k in {1, 2}.
inline double design_moment_distance(const ProjectedEnsemble& ens, int k) {
  if (ens.mode != ProjectedEnsemble::Mode::Exact)
    throw InvalidArgument("design moments need an exact ensemble");
  if (k != 1 && k != 2) throw InvalidArgument("k must be 1 or 2");
  if (ens.entries.empty()) throw InvalidArgument("empty ensemble");
  const int n_a = ens.entries.front().state.n;
  if (k * n_a > 12) throw TooLargeToEnumerate("moment operator exceeds 12 qubits");

  const auto d = static_cast<Eigen::Index>(dim_of(n_a));
  const Eigen::Index dk = (k == 1) ? d : d * d;
  Matrix moment = Matrix::Zero(dk, dk);
  for (const auto& e : ens.entries)
    moment += e.p * detail::kth_tensor_power_projector(e.state, k);

  Matrix haar;
  if (k == 1) {
    haar = Matrix::Identity(d, d) / static_cast<double>(d);
  } else {
    Matrix swap = Matrix::Zero(dk, dk);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
    haar = (Matrix::Identity(dk, dk) + swap) /
           (static_cast<double>(d) * static_cast<double>(d + 1));
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(moment - haar, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace locq
