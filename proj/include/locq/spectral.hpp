// spectral.hpp
// Conditional-fidelity observables for state certification: the random-basis
// operator assembled from per-basis blocks, truncated variants averaging a
// sampled basis list, and spectral gaps by deflation.

#pragma once

#include <numeric>
#include <vector>

#include "locq/ensemble.hpp"
#include "locq/freeset.hpp"
#include "locq/models.hpp"

namespace locq {

// Hermitian observable on the full n-qubit space with A = qubits 0..n_A-1.
struct FidelityObservable {
  int n = 0;
  int n_a = 0;
  Matrix op;
  long bases_included = 0;
  long dead_branches = 0;  // zero-probability blocks omitted
};

namespace detail {

inline void conjugate_by_1q(Matrix& m, const cplx u[4], int q, int n) {
  const std::size_t stride = dim_of(n - 1 - q);
  const auto d = static_cast<Eigen::Index>(m.rows());
  // rows: m <- U m
  for (Eigen::Index col = 0; col < d; ++col)
    for (std::size_t base = 0; base < static_cast<std::size_t>(d); base += 2 * stride)
      for (std::size_t off = 0; off < stride; ++off) {
        cplx a0 = m(static_cast<Eigen::Index>(base + off), col);
        cplx a1 = m(static_cast<Eigen::Index>(base + off + stride), col);
        m(static_cast<Eigen::Index>(base + off), col) = u[0] * a0 + u[1] * a1;
        m(static_cast<Eigen::Index>(base + off + stride), col) = u[2] * a0 + u[3] * a1;
      }
  // columns: m <- m U^dag
  for (Eigen::Index row = 0; row < d; ++row)
    for (std::size_t base = 0; base < static_cast<std::size_t>(d); base += 2 * stride)
      for (std::size_t off = 0; off < stride; ++off) {
        cplx a0 = m(row, static_cast<Eigen::Index>(base + off));
        cplx a1 = m(row, static_cast<Eigen::Index>(base + off + stride));
        m(row, static_cast<Eigen::Index>(base + off)) =
            a0 * std::conj(u[0]) + a1 * std::conj(u[1]);
        m(row, static_cast<Eigen::Index>(base + off + stride)) =
            a0 * std::conj(u[2]) + a1 * std::conj(u[3]);
      }
}

}  // namespace detail

// One basis string's operator: sum_z |psi_x(b,z)><psi_x(b,z)| (x) |x(b,z)><x(b,z)|,
// dead branches omitted. With an oracle, each live block also subtracts
// Fid(psi_x) * I_A (x) |x><x|.
inline FidelityObservable per_basis_observable(const PureState& psi, int n_a,
                                               const std::vector<PauliBasis>& bases,
                                               const FidelityOracle* offsets = nullptr) {
  const int n = psi.n;
  if (n > 12) throw TooLargeToEnumerate("observable materialization caps at 12 qubits");
  const int n_b = n - n_a;
  if (n_a < 1 || n_b < 1) throw InvalidArgument("need at least one qubit on each side");
  if (static_cast<int>(bases.size()) != n_b)
    throw InvalidArgument("basis string length must equal n_B");

  Bipartition part;
  part.A.resize(n_a);
  std::iota(part.A.begin(), part.A.end(), 0);
  part.B.resize(n_b);
  std::iota(part.B.begin(), part.B.end(), n_a);

  FidelityObservable obs;
  obs.n = n;
  obs.n_a = n_a;
  const auto dim = static_cast<Eigen::Index>(dim_of(n));
  obs.op = Matrix::Zero(dim, dim);

  PureState rotated = detail::rotate_b_to_computational(psi, part, bases);
  const std::size_t da = dim_of(n_a);
  const std::size_t db = dim_of(n_b);
  std::vector<cplx> block(da);
  for (std::size_t z = 0; z < db; ++z) {
    double p = 0.0;
    for (std::size_t a = 0; a < da; ++a) {
      block[a] = rotated.amps[a * db + z];
      p += std::norm(block[a]);
    }
    if (p < kZeroProbCutoff) {
      ++obs.dead_branches;
      continue;
    }
    const double inv = 1.0 / p;
    for (std::size_t a1 = 0; a1 < da; ++a1)
      for (std::size_t a2 = 0; a2 < da; ++a2)
        obs.op(static_cast<Eigen::Index>(a1 * db + z),
               static_cast<Eigen::Index>(a2 * db + z)) +=
            block[a1] * std::conj(block[a2]) * inv;
    if (offsets) {
      PureState proj;
      proj.n = n_a;
      proj.amps = block;
      proj.renormalize();
      const double fid = (*offsets)(proj);
      for (std::size_t a = 0; a < da; ++a)
        obs.op(static_cast<Eigen::Index>(a * db + z),
               static_cast<Eigen::Index>(a * db + z)) -= fid;
    }
  }

  // rotate the B factor back: |x> = G^dag |z>
  for (int j = 0; j < n_b; ++j) {
    cplx g[4];
    detail::basis_rotation(bases[j], g);
    cplx gdag[4] = {std::conj(g[0]), std::conj(g[2]), std::conj(g[1]), std::conj(g[3])};
    detail::conjugate_by_1q(obs.op, gdag, part.B[j], n);
  }
  obs.bases_included = 1;
  return obs;
}

enum class BasesMode { All, Sampled };

// Untruncated operator (mode All: all 3^{n_B} strings, n_B <= 8) or the
// truncated average over an explicit basis list.
inline FidelityObservable build_observable(const PureState& psi, int n_a, BasesMode mode,
                                           const std::vector<std::vector<PauliBasis>>& sampled = {},
                                           const FidelityOracle* offsets = nullptr) {
  const int n_b = psi.n - n_a;
  FidelityObservable acc;
  acc.n = psi.n;
  acc.n_a = n_a;
  const auto dim = static_cast<Eigen::Index>(dim_of(psi.n));
  acc.op = Matrix::Zero(dim, dim);

  if (mode == BasesMode::All) {
    if (n_b > 8) throw TooLargeToEnumerate("all-bases mode caps at n_B <= 8");
    for_each_basis_string(n_b, [&](const std::vector<PauliBasis>& bases) {
      FidelityObservable one = per_basis_observable(psi, n_a, bases, offsets);
      acc.op += one.op;
      acc.dead_branches += one.dead_branches;
      ++acc.bases_included;
    });
  } else {
    if (sampled.empty()) throw InvalidArgument("sampled mode needs a basis list");
    for (const auto& bases : sampled) {
      FidelityObservable one = per_basis_observable(psi, n_a, bases, offsets);
      acc.op += one.op;
      acc.dead_branches += one.dead_branches;
      ++acc.bases_included;
    }
  }
  acc.op /= static_cast<double>(acc.bases_included);
  return acc;
}

inline double observable_expectation(const FidelityObservable& obs, const PureState& s) {
  if (s.n != obs.n) throw SizeMismatch("state does not match observable");
  Eigen::Map<const Eigen::VectorXcd> v(s.amps.data(),
                                       static_cast<Eigen::Index>(s.dim()));
  return std::real(cplx((v.adjoint() * obs.op * v)(0, 0)));
}

// Delta = 1 - max_{phi perp psi} tr(O phi), by deflating psi and taking the
// top eigenvalue of P O P.
inline double spectral_gap(const FidelityObservable& obs, const PureState& psi) {
  if (psi.n != obs.n) throw SizeMismatch("state does not match observable");
  Eigen::Map<const Eigen::VectorXcd> v(psi.amps.data(),
                                       static_cast<Eigen::Index>(psi.dim()));
  const auto d = static_cast<Eigen::Index>(psi.dim());
  Matrix p = Matrix::Identity(d, d) - v * v.adjoint();
  Matrix deflated = p * obs.op * p;
  Eigen::SelfAdjointEigenSolver<Matrix> es(deflated, Eigen::EigenvaluesOnly);
  double gap = 1.0 - es.eigenvalues().maxCoeff();
  if (gap < -1e-9) throw Error("spectral gap below -1e-9; observable is inconsistent");
  return std::max(gap, 0.0);
}

// --- truncated-gap scan -------------------------------------------------------

struct GapScanRow {
  int n = 0;
  int n_a = 0;
  long state_index = 0;
  int i = 0;         // number of bases averaged
  double gap = 0.0;
  double mean = 0.0;  // across states at this (n, i)
  double std_dev = 0.0;
};

// Draws `count` distinct basis strings uniformly without replacement.
inline std::vector<std::vector<PauliBasis>> draw_basis_strings(int n_b, int count,
                                                               Rng& rng) {
  long total = 1;
  for (int i = 0; i < n_b; ++i) total *= 3;
  if (count > total)
    throw InvalidArgument("cannot draw more distinct basis strings than exist");
  std::vector<long> codes(static_cast<std::size_t>(total));
  std::iota(codes.begin(), codes.end(), 0L);
  for (int i = 0; i < count; ++i) {
    const auto j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(total - i)));
    std::swap(codes[i], codes[j]);
  }
  std::vector<std::vector<PauliBasis>> out;
  for (int i = 0; i < count; ++i) {
    long c = codes[i];
    std::vector<PauliBasis> bases(n_b);
    for (int j = n_b - 1; j >= 0; --j) {
      bases[j] = static_cast<PauliBasis>(c % 3);
      c /= 3;
    }
    out.push_back(std::move(bases));
  }
  return out;
}

// Averaged truncated gaps over `n_states` circuit-generated states (1D
// brickwork of depth 10n) for 1 <= i <= n_bases.
inline std::vector<GapScanRow> averaged_truncated_gaps(const std::vector<int>& n_list,
                                                       int n_a, int n_states, int n_bases,
                                                       std::uint64_t master_seed) {
  std::vector<GapScanRow> rows;
  for (int n : n_list) {
    if (n > 10) throw TooLargeToEnumerate("gap scan caps at n <= 10");
    const int n_b = n - n_a;
    long pool = 1;
    for (int i = 0; i < n_b; ++i) pool *= 3;
    const int n_bases_n = static_cast<int>(std::min<long>(n_bases, pool));
    std::vector<std::vector<double>> gaps(static_cast<std::size_t>(n_states));
    for (int s = 0; s < n_states; ++s) {
      Rng rng = Rng::substream(master_seed, (static_cast<std::uint64_t>(n) << 32) | s);
      PureState psi = brickwork_state({n}, 10 * n, rng);
      auto bases = draw_basis_strings(n_b, n_bases_n, rng);

      const auto dim = static_cast<Eigen::Index>(dim_of(n));
      Matrix sum = Matrix::Zero(dim, dim);
      FidelityObservable obs;
      obs.n = n;
      obs.n_a = n_a;
      for (int i = 1; i <= n_bases_n; ++i) {
        sum += per_basis_observable(psi, n_a, bases[i - 1]).op;
        obs.op = sum / static_cast<double>(i);
        obs.bases_included = i;
        gaps[s].push_back(spectral_gap(obs, psi));
      }
    }
    for (int i = 1; i <= n_bases_n; ++i) {
      double mean = 0.0;
      for (int s = 0; s < n_states; ++s) mean += gaps[s][i - 1];
      mean /= n_states;
      double var = 0.0;
      for (int s = 0; s < n_states; ++s) {
        double d = gaps[s][i - 1] - mean;
        var += d * d;
      }
      const double sd = n_states > 1 ? std::sqrt(var / (n_states - 1)) : 0.0;
      for (int s = 0; s < n_states; ++s)
        rows.push_back({n, n_a, s, i, gaps[s][i - 1], mean, sd});
    }
  }
  return rows;
}

}  // namespace locq
