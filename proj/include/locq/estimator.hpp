// estimator.hpp
// Statistics layer: single-copy shadow estimates of conditional fidelity,
// median-of-means aggregation, and the certification sample-size formulas.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "locq/ensemble.hpp"
#include "locq/qstate.hpp"

namespace locq {

struct MoMParameters {
  long block_size = 1;   // B
  long block_count = 1;  // K
  long total() const { return block_size * block_count; }
};

// tr{ psi (x)_j (3|x_j><x_j| - I) } for a pure target on A. Computed by
// contracting the per-qubit 2x2 factors against the state, never
// materializing the 2^{n_A} x 2^{n_A} operator. |result| <= 2^{n_A}.
inline double shadow_fidelity_estimate(const PureState& target_proj,
                                       const Label* x, int len) {
  if (len != target_proj.n)
    throw SizeMismatch("outcome string length must equal the target's qubit count");
  const std::size_t dim = target_proj.dim();
  std::array<cplx, 16> small;
  std::vector<cplx> heap;
  cplx* work;
  if (dim <= small.size()) {
    std::copy(target_proj.amps.begin(), target_proj.amps.end(), small.begin());
    work = small.data();
  } else {
    heap = target_proj.amps;
    work = heap.data();
  }
  for (int j = 0; j < len; ++j) {
    auto a = label_amplitudes(x[j]);
    // 3|x><x| - I
    cplx m[4] = {3.0 * a[0] * std::conj(a[0]) - 1.0, 3.0 * a[0] * std::conj(a[1]),
                 3.0 * a[1] * std::conj(a[0]), 3.0 * a[1] * std::conj(a[1]) - 1.0};
    const std::size_t stride = dim_of(len - 1 - j);
    for (std::size_t base = 0; base < dim; base += 2 * stride)
      for (std::size_t off = 0; off < stride; ++off) {
        cplx a0 = work[base + off];
        cplx a1 = work[base + off + stride];
        work[base + off] = m[0] * a0 + m[1] * a1;
        work[base + off + stride] = m[2] * a0 + m[3] * a1;
      }
  }
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < dim; ++i)
    acc += std::conj(target_proj.amps[i]) * work[i];
  return acc.real();
}

inline double shadow_fidelity_estimate(const PureState& target_proj,
                                       const std::vector<Label>& x) {
  return shadow_fidelity_estimate(target_proj, x.data(), static_cast<int>(x.size()));
}

// Same contraction against an arbitrary Hermitian observable on A;
// used for linearity checks and witness estimation.
inline double shadow_expectation(const Matrix& obs, const std::vector<Label>& x) {
  const int n = static_cast<int>(x.size());
  if (obs.rows() != obs.cols() || obs.rows() != static_cast<Eigen::Index>(dim_of(n)))
    throw SizeMismatch("observable dimension must be 2^{|x|}");
  // tr(O (x) M) with M = (x)_j (3|x_j><x_j| - I): contract M columns through O
  std::vector<cplx> col(dim_of(n));
  cplx acc{0.0, 0.0};
  for (std::size_t c = 0; c < dim_of(n); ++c) {
    std::fill(col.begin(), col.end(), cplx{0.0, 0.0});
    col[c] = 1.0;
    for (int j = 0; j < n; ++j) {
      auto a = label_amplitudes(x[j]);
      cplx m[4] = {3.0 * a[0] * std::conj(a[0]) - 1.0, 3.0 * a[0] * std::conj(a[1]),
                   3.0 * a[1] * std::conj(a[0]), 3.0 * a[1] * std::conj(a[1]) - 1.0};
      detail::apply_1q(col, n, j, m);
    }
    for (std::size_t r = 0; r < dim_of(n); ++r)
      acc += obs(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) * col[r];
  }
  return acc.real();
}

// Median of K block means; for even K the lower-middle order statistic
// (k = ceil(K/2)) keeps the estimator deterministic.
inline double median_of_means(const std::vector<double>& values,
                              const MoMParameters& params) {
  if (params.block_size < 1 || params.block_count < 1)
    throw InvalidArgument("block size and count must be >= 1");
  if (static_cast<long>(values.size()) != params.total())
    throw LengthMismatch("value count must equal B*K");
  std::vector<double> means(params.block_count);
  for (long l = 0; l < params.block_count; ++l) {
    double s = 0.0;
    for (long i = l * params.block_size; i < (l + 1) * params.block_size; ++i)
      s += values[static_cast<std::size_t>(i)];
    means[static_cast<std::size_t>(l)] = s / static_cast<double>(params.block_size);
  }
  const long k = (params.block_count + 1) / 2;  // ceil(K/2)
  std::nth_element(means.begin(), means.begin() + (k - 1), means.end());
  return means[static_cast<std::size_t>(k - 1)];
}

// B = ceil(6 sigma^2 / eps^2), K = ceil(4.5 ln(1/delta)); both floored at 1.
inline MoMParameters mom_parameters(double sigma2, double epsilon, double delta) {
  if (!(sigma2 > 0.0) || !(epsilon > 0.0) || !(delta > 0.0) || !(delta < 1.0))
    throw InvalidArgument("need sigma2, eps > 0 and 0 < delta < 1");
  const double b = std::ceil(6.0 * sigma2 / (epsilon * epsilon));
  if (!(b < 9e15))
    throw InvalidArgument("required block size overflows; precision target too small");
  MoMParameters p;
  p.block_size = std::max(1L, static_cast<long>(b));
  p.block_count = std::max(1L, static_cast<long>(std::ceil(4.5 * std::log(1.0 / delta))));
  return p;
}

// Worst-case single-copy variance of the conditional-fidelity estimator.
inline double shadow_variance_bound(int n_a) {
  return std::pow(4.0, n_a) + 1.0;
}

// T = ceil(243 ln(1/delta) (4^{n_A}+1) / LQ^2).
inline long protocol_sample_size(double lq, double delta, int n_a) {
  if (!(lq > 0.0)) throw ZeroGap("certification gap must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw InvalidArgument("delta must lie in (0,1)");
  const double t = 243.0 * std::log(1.0 / delta) * shadow_variance_bound(n_a) / (lq * lq);
  if (!(t < 9e15))
    throw ZeroGap("certification gap too small; required sample count overflows");
  return std::max(1L, static_cast<long>(std::ceil(t)));
}

// --- exact conditional fidelity -----------------------------------------

namespace detail {

// One fixed basis string: sum_z p_rho(z) [tr(psi_z rho_z) - Fid(psi_z)].
// Branches where the target has zero weight contribute nothing (the witness
// omits those blocks).
template <typename StateT>
double eta_for_fixed_basis(const StateT& rho, const PureState& psi,
                           const Bipartition& part,
                           const std::vector<PauliBasis>& bases,
                           const FidelityOracle& oracle) {
  const int n_b = static_cast<int>(part.B.size());
  if (n_b > 24) throw TooLargeToEnumerate("|B| > 24");
  PureState psi_rot = rotate_b_to_computational(psi, part, bases);

  StateT rho_rot = [&] {
    if constexpr (std::is_same_v<StateT, PureState>) {
      return rotate_b_to_computational(rho, part, bases);
    } else {
      StateT r = rho;
      cplx m[4];
      const auto d = static_cast<Eigen::Index>(r.dim());
      for (int j = 0; j < n_b; ++j) {
        basis_rotation(bases[j], m);
        const std::size_t stride = dim_of(r.n - 1 - part.B[j]);
        for (Eigen::Index col = 0; col < d; ++col)
          for (std::size_t base = 0; base < r.dim(); base += 2 * stride)
            for (std::size_t off = 0; off < stride; ++off) {
              cplx a0 = r.mat(static_cast<Eigen::Index>(base + off), col);
              cplx a1 = r.mat(static_cast<Eigen::Index>(base + off + stride), col);
              r.mat(static_cast<Eigen::Index>(base + off), col) = m[0] * a0 + m[1] * a1;
              r.mat(static_cast<Eigen::Index>(base + off + stride), col) =
                  m[2] * a0 + m[3] * a1;
            }
        for (Eigen::Index row = 0; row < d; ++row)
          for (std::size_t base = 0; base < r.dim(); base += 2 * stride)
            for (std::size_t off = 0; off < stride; ++off) {
              cplx a0 = r.mat(row, static_cast<Eigen::Index>(base + off));
              cplx a1 = r.mat(row, static_cast<Eigen::Index>(base + off + stride));
              r.mat(row, static_cast<Eigen::Index>(base + off)) =
                  a0 * std::conj(m[0]) + a1 * std::conj(m[1]);
              r.mat(row, static_cast<Eigen::Index>(base + off + stride)) =
                  a0 * std::conj(m[2]) + a1 * std::conj(m[3]);
            }
      }
      return r;
    }
  }();

  double eta = 0.0;
  const std::size_t outcomes = dim_of(n_b);
  for (std::size_t z = 0; z < outcomes; ++z) {
    double p_rho;
    double overlap;
    try {
      auto [p, proj] = projected_state(rho_rot, part, z);
      p_rho = p;
      try {
        auto [pt, target] = projected_state(psi_rot, part, z);
        (void)pt;
        overlap = state_fidelity(target, proj) - oracle(target);
      } catch (const ZeroProbabilityOutcome&) {
        overlap = 0.0;  // dead target branch: witness block omitted
      }
    } catch (const ZeroProbabilityOutcome&) {
      continue;  // rho never produces this outcome
    }
    eta += p_rho * overlap;
  }
  return eta;
}

}  // namespace detail

// eta_psi(rho) = sum_z p_rho(z) [tr(psi_z rho_z) - Fid(psi_z)], exactly.
// Random mode averages over all 3^{|B|} basis strings (|B| <= 8).
template <typename StateT>
double exact_conditional_fidelity(const StateT& rho, const PureState& psi,
                                  const Bipartition& part, const FidelityOracle& oracle,
                                  BasisAssignment::Mode mode) {
  part.check();
  if (part.n() != psi.n || psi.n != rho.n)
    throw SizeMismatch("partition does not match the states");
  const int n_b = static_cast<int>(part.B.size());
  if (mode == BasisAssignment::Mode::FixedZ) {
    return detail::eta_for_fixed_basis(rho, psi, part,
                                       std::vector<PauliBasis>(n_b, PauliBasis::Z), oracle);
  }
  double weight = 1.0;
  for (int i = 0; i < n_b; ++i) weight /= 3.0;
  double acc = 0.0;
  for_each_basis_string(n_b, [&](const std::vector<PauliBasis>& bases) {
    acc += weight * detail::eta_for_fixed_basis(rho, psi, part, bases, oracle);
  });
  return acc;
}

}  // namespace locq
