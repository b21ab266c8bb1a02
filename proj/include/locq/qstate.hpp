// qstate.hpp
// Dense pure/mixed state representation and the linear-algebra primitives the
// rest of the toolkit consumes.
//
// Qubit ordering is big-endian throughout: qubit 0 is the most significant
// bit of the amplitude index, and outcome strings print qubit 0 first.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

#include "locq/errors.hpp"
#include "locq/rng.hpp"

namespace locq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTol = 1e-10;
inline constexpr double kZeroProbCutoff = 1e-14;

inline std::size_t dim_of(int n) { return std::size_t{1} << n; }

// Bit of qubit q in amplitude index i (qubit 0 = most significant).
inline int bit_of(std::size_t i, int q, int n) {
  return static_cast<int>((i >> (n - 1 - q)) & 1u);
}

struct Bipartition {
  std::vector<int> A;
  std::vector<int> B;

  int n() const { return static_cast<int>(A.size() + B.size()); }

  void check() const {
    std::vector<int> all(A);
    all.insert(all.end(), B.begin(), B.end());
    std::vector<int> sorted(all);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != static_cast<int>(i))
        throw InvalidArgument("bipartition must cover {0..n-1} without overlap");
    }
  }

  // A = `a`, B = the remaining qubits in ascending order.
  static Bipartition keep(int n, std::vector<int> a) {
    Bipartition part;
    part.A = std::move(a);
    std::vector<bool> in_a(n, false);
    for (int q : part.A) {
      if (q < 0 || q >= n) throw InvalidArgument("qubit index out of range");
      in_a[q] = true;
    }
    for (int q = 0; q < n; ++q)
      if (!in_a[q]) part.B.push_back(q);
    part.check();
    return part;
  }
};

struct PureState {
  int n = 0;
  std::vector<cplx> amps;

  std::size_t dim() const { return amps.size(); }

  static PureState computational(int n, std::size_t basis_index) {
    PureState s;
    s.n = n;
    s.amps.assign(dim_of(n), cplx{0.0, 0.0});
    s.amps.at(basis_index) = cplx{1.0, 0.0};
    return s;
  }

  static PureState from_amplitudes(int n, std::vector<cplx> a) {
    PureState s;
    s.n = n;
    s.amps = std::move(a);
    if (s.amps.size() != dim_of(n))
      throw InvalidArgument("amplitude vector length must be 2^n");
    double err = std::abs(s.norm2() - 1.0);
    if (err > kNormTol) throw InvalidArgument("state is not normalized");
    return s;
  }

  double norm2() const {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
  }

  void renormalize() {
    double nrm = std::sqrt(norm2());
    if (nrm <= 0.0) throw InvalidArgument("cannot normalize the zero vector");
    for (auto& a : amps) a /= nrm;
  }
};

struct DensityState {
  int n = 0;
  Matrix mat;

  std::size_t dim() const { return static_cast<std::size_t>(mat.rows()); }

  static DensityState from_pure(const PureState& psi) {
    DensityState rho;
    rho.n = psi.n;
    Eigen::Map<const Eigen::VectorXcd> v(psi.amps.data(),
                                         static_cast<Eigen::Index>(psi.dim()));
    rho.mat = v * v.adjoint();
    return rho;
  }

  static DensityState maximally_mixed(int n) {
    DensityState rho;
    rho.n = n;
    auto d = static_cast<Eigen::Index>(dim_of(n));
    rho.mat = Matrix::Identity(d, d) / static_cast<double>(d);
    return rho;
  }

  void check(bool with_spectrum = false) const {
    if (dim() != dim_of(n) || mat.rows() != mat.cols())
      throw InvalidArgument("density matrix must be 2^n x 2^n");
    if ((mat - mat.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw InvalidArgument("density matrix is not Hermitian");
    if (std::abs(mat.trace().real() - 1.0) > 1e-10 ||
        std::abs(mat.trace().imag()) > 1e-10)
      throw InvalidArgument("density matrix trace must be 1");
    if (with_spectrum) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(mat,
                                               Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-8)
        throw InvalidArgument("density matrix has a negative eigenvalue");
    }
  }
};

inline cplx inner(const PureState& a, const PureState& b) {
  if (a.n != b.n) throw SizeMismatch("states act on different qubit counts");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
  return s;
}

// --- gate application --------------------------------------------------

namespace detail {

// Single-qubit gate m (row-major 2x2) on qubit q, no unitarity check.
inline void apply_1q(std::vector<cplx>& amps, int n, int q, const cplx m[4]) {
  const std::size_t stride = dim_of(n - 1 - q);
  const std::size_t dim = amps.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      cplx a0 = amps[base + off];
      cplx a1 = amps[base + off + stride];
      amps[base + off] = m[0] * a0 + m[1] * a1;
      amps[base + off + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

// k-qubit gate (row-major 2^k x 2^k) on arbitrary distinct targets.
inline void apply_kq(std::vector<cplx>& amps, int n, const std::vector<int>& targets,
                     const Matrix& gate) {
  const int k = static_cast<int>(targets.size());
  const std::size_t gd = dim_of(k);
  std::vector<std::size_t> strides(k);
  std::size_t mask = 0;
  for (int j = 0; j < k; ++j) {
    strides[j] = dim_of(n - 1 - targets[j]);
    mask |= strides[j];
  }
  std::vector<cplx> in(gd), out(gd);
  const std::size_t dim = amps.size();
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & mask) continue;
    for (std::size_t g = 0; g < gd; ++g) {
      std::size_t idx = base;
      for (int j = 0; j < k; ++j)
        if ((g >> (k - 1 - j)) & 1u) idx |= strides[j];
      in[g] = amps[idx];
    }
    for (std::size_t r = 0; r < gd; ++r) {
      cplx acc{0.0, 0.0};
      for (std::size_t c = 0; c < gd; ++c)
        acc += gate(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      out[r] = acc;
    }
    for (std::size_t g = 0; g < gd; ++g) {
      std::size_t idx = base;
      for (int j = 0; j < k; ++j)
        if ((g >> (k - 1 - j)) & 1u) idx |= strides[j];
      amps[idx] = out[g];
    }
  }
}

inline bool is_unitary(const Matrix& u, double tol) {
  Matrix d = u * u.adjoint() - Matrix::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

}  // namespace detail

inline PureState apply_unitary(const PureState& state, const Matrix& gate,
                               const std::vector<int>& targets) {
  const int k = static_cast<int>(targets.size());
  if (gate.rows() != gate.cols() ||
      gate.rows() != static_cast<Eigen::Index>(dim_of(k)))
    throw SizeMismatch("gate dimension must be 2^k for k targets");
  std::vector<int> sorted(targets);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("gate targets must be distinct");
  for (int q : targets)
    if (q < 0 || q >= state.n) throw InvalidArgument("gate target out of range");
  if (!detail::is_unitary(gate, kNormTol)) throw NonUnitaryGate("gate is not unitary");

  PureState out = state;
  if (k == 1) {
    cplx m[4] = {gate(0, 0), gate(0, 1), gate(1, 0), gate(1, 1)};
    detail::apply_1q(out.amps, out.n, targets[0], m);
  } else {
    detail::apply_kq(out.amps, out.n, targets, gate);
  }
  return out;
}

// --- projection onto computational outcomes on B -----------------------

// Composes the full index from sub-indices on the ordered qubit lists.
struct IndexMap {
  std::vector<std::size_t> a_strides;
  std::vector<std::size_t> b_strides;

  IndexMap(const Bipartition& part, int n) {
    for (int q : part.A) a_strides.push_back(dim_of(n - 1 - q));
    for (int q : part.B) b_strides.push_back(dim_of(n - 1 - q));
  }

  std::size_t compose(std::size_t a, std::size_t b) const {
    std::size_t idx = 0;
    const int ka = static_cast<int>(a_strides.size());
    const int kb = static_cast<int>(b_strides.size());
    for (int j = 0; j < ka; ++j)
      if ((a >> (ka - 1 - j)) & 1u) idx |= a_strides[j];
    for (int j = 0; j < kb; ++j)
      if ((b >> (kb - 1 - j)) & 1u) idx |= b_strides[j];
    return idx;
  }
};

// Probability and normalized post-measurement state on A after observing the
// computational outcome `outcome_bits` on B (bit j of the outcome = qubit
// part.B[j], most significant first).
inline std::pair<double, PureState> projected_state(const PureState& state,
                                                    const Bipartition& part,
                                                    std::size_t outcome_bits) {
  part.check();
  if (part.n() != state.n) throw SizeMismatch("partition does not match state");
  IndexMap map(part, state.n);
  const std::size_t da = dim_of(static_cast<int>(part.A.size()));
  PureState proj;
  proj.n = static_cast<int>(part.A.size());
  proj.amps.resize(da);
  double p = 0.0;
  for (std::size_t a = 0; a < da; ++a) {
    cplx amp = state.amps[map.compose(a, outcome_bits)];
    proj.amps[a] = amp;
    p += std::norm(amp);
  }
  if (p < kZeroProbCutoff)
    throw ZeroProbabilityOutcome("outcome probability below cutoff");
  double inv = 1.0 / std::sqrt(p);
  for (auto& a : proj.amps) a *= inv;
  return {p, proj};
}

inline std::pair<double, DensityState> projected_state(const DensityState& state,
                                                       const Bipartition& part,
                                                       std::size_t outcome_bits) {
  part.check();
  if (part.n() != state.n) throw SizeMismatch("partition does not match state");
  IndexMap map(part, state.n);
  const std::size_t da = dim_of(static_cast<int>(part.A.size()));
  DensityState proj;
  proj.n = static_cast<int>(part.A.size());
  proj.mat.resize(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(da));
  for (std::size_t r = 0; r < da; ++r)
    for (std::size_t c = 0; c < da; ++c)
      proj.mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          state.mat(static_cast<Eigen::Index>(map.compose(r, outcome_bits)),
                    static_cast<Eigen::Index>(map.compose(c, outcome_bits)));
  double p = proj.mat.trace().real();
  if (p < kZeroProbCutoff)
    throw ZeroProbabilityOutcome("outcome probability below cutoff");
  proj.mat /= p;
  return {p, proj};
}

// --- Schmidt spectrum, entropy, purity ----------------------------------

// Squared Schmidt coefficients across cut.A | cut.B, descending. Computed
// from the eigenvalues of the smaller reduced density matrix.
inline std::vector<double> schmidt_spectrum(const PureState& state,
                                            const Bipartition& cut) {
  cut.check();
  if (cut.n() != state.n) throw SizeMismatch("cut does not match state");
  const int nl = static_cast<int>(cut.A.size());
  const int nr = static_cast<int>(cut.B.size());
  const std::size_t dl = dim_of(nl), dr = dim_of(nr);
  IndexMap map(cut, state.n);

  const bool left_smaller = dl <= dr;
  const std::size_t ds = left_smaller ? dl : dr;
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(ds),
                          static_cast<Eigen::Index>(ds));
  // g[i,j] = sum_k M[i,k] conj(M[j,k]) over the larger index,
  // with M[l,r] = amplitude at (l, r).
  for (std::size_t i = 0; i < ds; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cplx acc{0.0, 0.0};
      const std::size_t dother = left_smaller ? dr : dl;
      for (std::size_t k = 0; k < dother; ++k) {
        cplx mi = left_smaller ? state.amps[map.compose(i, k)]
                               : state.amps[map.compose(k, i)];
        cplx mj = left_smaller ? state.amps[map.compose(j, k)]
                               : state.amps[map.compose(k, j)];
        acc += mi * std::conj(mj);
      }
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
      g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(acc);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  std::vector<double> vals(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  for (auto& v : vals) v = std::clamp(v, 0.0, 1.0);
  std::sort(vals.begin(), vals.end(), std::greater<>());
  return vals;
}

// Von Neumann entanglement entropy in bits; eigenvalues below 1e-14
// contribute zero.
inline double entanglement_entropy(const PureState& state, const Bipartition& cut) {
  auto spec = schmidt_spectrum(state, cut);
  double h = 0.0;
  for (double lam : spec)
    if (lam > 1e-14) h -= lam * std::log2(lam);
  return std::max(h, 0.0);
}

// tr(rho_keep^2); uses the complement when that side is smaller.
inline double reduced_purity(const PureState& state, const std::vector<int>& keep) {
  Bipartition cut = [&] {
    if (static_cast<int>(keep.size()) * 2 <= state.n)
      return Bipartition::keep(state.n, keep);
    // purity of a pure state's marginal is symmetric under complementation
    Bipartition c = Bipartition::keep(state.n, keep);
    std::swap(c.A, c.B);
    return c;
  }();
  auto spec = schmidt_spectrum(state, cut);
  double s = 0.0;
  for (double lam : spec) s += lam * lam;
  return s;
}

inline double state_fidelity(const PureState& pure, const PureState& other) {
  return std::norm(inner(pure, other));
}

inline double state_fidelity(const PureState& pure, const DensityState& rho) {
  if (pure.n != rho.n) throw SizeMismatch("states act on different qubit counts");
  Eigen::Map<const Eigen::VectorXcd> v(pure.amps.data(),
                                       static_cast<Eigen::Index>(pure.dim()));
  return std::real(cplx((v.adjoint() * rho.mat * v)(0, 0)));
}

// --- single-qubit measurement -------------------------------------------

enum class PauliBasis : std::uint8_t { X = 0, Y = 1, Z = 2 };

inline const char* to_string(PauliBasis b) {
  switch (b) {
    case PauliBasis::X: return "X";
    case PauliBasis::Y: return "Y";
    default: return "Z";
  }
}

namespace detail {

// Rotation taking the basis eigenvectors to |0>, |1>: X -> H, Y -> H S^dag.
inline void basis_rotation(PauliBasis b, cplx m[4]) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  switch (b) {
    case PauliBasis::Z:
      m[0] = 1.0; m[1] = 0.0; m[2] = 0.0; m[3] = 1.0;
      break;
    case PauliBasis::X:
      m[0] = inv_sqrt2; m[1] = inv_sqrt2; m[2] = inv_sqrt2; m[3] = -inv_sqrt2;
      break;
    case PauliBasis::Y:
      m[0] = inv_sqrt2; m[1] = cplx(0.0, -inv_sqrt2);
      m[2] = inv_sqrt2; m[3] = cplx(0.0, inv_sqrt2);
      break;
  }
}

}  // namespace detail

// Measures one qubit in the X/Y/Z eigenbasis. Returns the outcome bit (0 for
// the +1 eigenvector of the chosen Pauli) and the collapsed state.
inline std::pair<int, PureState> measure_qubit(const PureState& state, int qubit,
                                               PauliBasis basis, Rng& rng) {
  if (qubit < 0 || qubit >= state.n) throw InvalidArgument("qubit out of range");
  PureState rotated = state;
  cplx m[4];
  detail::basis_rotation(basis, m);
  detail::apply_1q(rotated.amps, rotated.n, qubit, m);

  const std::size_t stride = dim_of(state.n - 1 - qubit);
  double p1 = 0.0;
  for (std::size_t base = 0; base < rotated.dim(); base += 2 * stride)
    for (std::size_t off = 0; off < stride; ++off)
      p1 += std::norm(rotated.amps[base + off + stride]);
  const int outcome = rng.uniform() < p1 ? 1 : 0;

  const double p = outcome ? p1 : 1.0 - p1;
  const double inv = 1.0 / std::sqrt(std::max(p, 1e-300));
  for (std::size_t base = 0; base < rotated.dim(); base += 2 * stride)
    for (std::size_t off = 0; off < stride; ++off) {
      cplx& keep = rotated.amps[base + off + (outcome ? stride : 0)];
      cplx& kill = rotated.amps[base + off + (outcome ? 0 : stride)];
      keep *= inv;
      kill = cplx{0.0, 0.0};
    }

  // rotate back so the collapsed qubit holds the basis eigenvector
  cplx minv[4] = {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
  detail::apply_1q(rotated.amps, rotated.n, qubit, minv);
  return {outcome, rotated};
}

}  // namespace locq
