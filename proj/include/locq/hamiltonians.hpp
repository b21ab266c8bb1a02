// hamiltonians.hpp
// Ground states of the periodic XXZ and J1-J2 spin chains by exact
// diagonalization. Both Hamiltonians conserve total magnetization, so the
// dense solves run per magnetization sector (n <= 12); n = 13..14 use
// matrix-free Lanczos with full reorthogonalization and deflation.
// Degeneracy is detected with an absolute 1e-8 threshold.

#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "locq/qstate.hpp"

namespace locq {

struct GroundSpace {
  double energy = 0.0;
  std::vector<PureState> basis;  // orthonormal; may be truncated for n >= 13
  bool possibly_truncated = false;

  int degeneracy() const { return static_cast<int>(basis.size()); }
  bool degenerate() const { return basis.size() > 1; }
};

// Thrown by the single-state accessors when the ground space is degenerate.
struct DegenerateGroundSpace : Error {
  explicit DegenerateGroundSpace(GroundSpace g)
      : Error("ground space is degenerate"), space(std::move(g)) {}
  GroundSpace space;
};

// Couplings: list of (i, j, J) bonds; H = sum_bonds J * (XX + YY + delta_zz * ZZ)
// with per-bond delta. Represented via a generic two-body spin form below.
struct SpinChainModel {
  int n = 0;
  // bond = (qubit a, qubit b, xy coupling, zz coupling)
  struct Bond {
    int a, b;
    double xy, zz;
  };
  std::vector<Bond> bonds;

  // H = -sum[XX + YY + delta ZZ], periodic
  static SpinChainModel xxz(int n, double delta) {
    SpinChainModel m;
    m.n = n;
    for (int i = 0; i < n; ++i)
      m.bonds.push_back({i, (i + 1) % n, -1.0, -delta});
    return m;
  }

  // H = J1 sum sigma.sigma^{i+1} + J2 sum sigma.sigma^{i+2}, periodic, J1 = 1
  static SpinChainModel j1j2(int n, double j2) {
    SpinChainModel m;
    m.n = n;
    for (int i = 0; i < n; ++i) m.bonds.push_back({i, (i + 1) % n, 1.0, 1.0});
    for (int i = 0; i < n; ++i) m.bonds.push_back({i, (i + 2) % n, j2, j2});
    return m;
  }
};

namespace ed_detail {

// H|s> accumulated into out (dense full space, real arithmetic).
// Matrix elements: ZZ diagonal zz * z_a z_b; (XX + YY) flips anti-aligned
// pairs with coefficient 2 * xy.
inline void apply_hamiltonian(const SpinChainModel& m, const std::vector<double>& in,
                              std::vector<double>& out) {
  const int n = m.n;
  const std::size_t dim = dim_of(n);
  out.assign(dim, 0.0);
  for (const auto& bond : m.bonds) {
    const std::size_t ma = dim_of(n - 1 - bond.a);
    const std::size_t mb = dim_of(n - 1 - bond.b);
    for (std::size_t s = 0; s < dim; ++s) {
      const bool ba = s & ma, bb = s & mb;
      out[s] += bond.zz * (ba == bb ? 1.0 : -1.0) * in[s];
      if (ba != bb) out[s ^ ma ^ mb] += 2.0 * bond.xy * in[s];
    }
  }
}

inline std::vector<std::size_t> sector_states(int n, int k) {
  std::vector<std::size_t> states;
  const std::size_t dim = dim_of(n);
  for (std::size_t s = 0; s < dim; ++s)
    if (std::popcount(s) == k) states.push_back(s);
  return states;
}

inline Eigen::MatrixXd sector_matrix(const SpinChainModel& m,
                                     const std::vector<std::size_t>& states) {
  const int n = m.n;
  std::map<std::size_t, int> index;
  for (std::size_t i = 0; i < states.size(); ++i)
    index[states[i]] = static_cast<int>(i);
  const auto d = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    const std::size_t s = states[static_cast<std::size_t>(col)];
    for (const auto& bond : m.bonds) {
      const std::size_t ma = dim_of(n - 1 - bond.a);
      const std::size_t mb = dim_of(n - 1 - bond.b);
      const bool ba = s & ma, bb = s & mb;
      h(col, col) += bond.zz * (ba == bb ? 1.0 : -1.0);
      if (ba != bb) h(index.at(s ^ ma ^ mb), col) += 2.0 * bond.xy;
    }
  }
  return h;
}

inline PureState embed_sector_vector(int n, const std::vector<std::size_t>& states,
                                     const Eigen::VectorXd& v) {
  PureState psi;
  psi.n = n;
  psi.amps.assign(dim_of(n), cplx{0.0, 0.0});
  for (std::size_t i = 0; i < states.size(); ++i)
    psi.amps[states[i]] = cplx(v(static_cast<Eigen::Index>(i)), 0.0);
  psi.renormalize();
  return psi;
}

inline double residual_norm(const SpinChainModel& m, const PureState& psi, double e) {
  std::vector<double> re(psi.dim()), im(psi.dim()), hre, him;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    re[i] = psi.amps[i].real();
    im[i] = psi.amps[i].imag();
  }
  apply_hamiltonian(m, re, hre);
  apply_hamiltonian(m, im, him);
  double r2 = 0.0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    double dr = hre[i] - e * re[i];
    double di = him[i] - e * im[i];
    r2 += dr * dr + di * di;
  }
  return std::sqrt(r2);
}

// Lanczos with full reorthogonalization for the lowest eigenpair in the
// orthogonal complement of `deflate`.
inline std::pair<double, std::vector<double>> lanczos_lowest(
    const SpinChainModel& m, const std::vector<std::vector<double>>& deflate,
    Rng& rng, double tol, int max_iter) {
  const std::size_t dim = dim_of(m.n);
  auto project_out = [&](std::vector<double>& v) {
    for (const auto& d : deflate) {
      double ip = 0.0;
      for (std::size_t i = 0; i < dim; ++i) ip += d[i] * v[i];
      for (std::size_t i = 0; i < dim; ++i) v[i] -= ip * d[i];
    }
  };
  auto norm_of = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };

  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.gaussian();
  project_out(v);
  double nv = norm_of(v);
  for (auto& x : v) x /= nv;
  basis.push_back(v);

  std::vector<double> w;
  double best_e = 0.0;
  std::vector<double> best_vec;
  for (int it = 0; it < max_iter; ++it) {
    apply_hamiltonian(m, basis.back(), w);
    project_out(w);
    double a = 0.0;
    for (std::size_t i = 0; i < dim; ++i) a += basis.back()[i] * w[i];
    alpha.push_back(a);
    // full reorthogonalization (twice for stability)
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        double ip = 0.0;
        for (std::size_t i = 0; i < dim; ++i) ip += b[i] * w[i];
        for (std::size_t i = 0; i < dim; ++i) w[i] -= ip * b[i];
      }
    }
    double nb = norm_of(w);

    // Ritz values of the tridiagonal matrix
    const auto k = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) {
        tri(i, i + 1) = beta[static_cast<std::size_t>(i)];
        tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    best_e = es.eigenvalues()(0);
    // residual estimate: |beta_k * last component of the Ritz vector|
    const double res_est = nb * std::abs(es.eigenvectors()(k - 1, 0));
    if (res_est < tol || nb < 1e-12 ||
        basis.size() == dim - deflate.size() || it == max_iter - 1) {
      best_vec.assign(dim, 0.0);
      for (Eigen::Index j = 0; j < k; ++j) {
        const double c = es.eigenvectors()(j, 0);
        const auto& b = basis[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < dim; ++i) best_vec[i] += c * b[i];
      }
      double nrm = norm_of(best_vec);
      for (auto& x : best_vec) x /= nrm;
      break;
    }
    beta.push_back(nb);
    for (auto& x : w) x /= nb;
    basis.push_back(w);
  }
  return {best_e, best_vec};
}

}  // namespace ed_detail

// Lowest eigenvalue and an orthonormal basis of the (near-)degenerate ground
// space; residual of each returned vector is at most 1e-8.
inline GroundSpace solve_ground_space(const SpinChainModel& model,
                                      double degeneracy_tol = 1e-8) {
  const int n = model.n;
  if (n < 2 || n > 14) throw UnsupportedSize("chain solver supports 2..14 qubits");
  GroundSpace out;

  if (n <= 12) {
    // dense per magnetization sector, eigenvalues first
    std::vector<std::vector<std::size_t>> sectors(n + 1);
    std::vector<Eigen::VectorXd> values(n + 1);
    double global_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
      sectors[k] = ed_detail::sector_states(n, k);
      Eigen::MatrixXd h = ed_detail::sector_matrix(model, sectors[k]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
      values[k] = es.eigenvalues();
      global_min = std::min(global_min, values[k](0));
    }
    out.energy = global_min;
    for (int k = 0; k <= n; ++k) {
      int hits = 0;
      for (Eigen::Index i = 0; i < values[k].size(); ++i)
        if (values[k](i) <= global_min + degeneracy_tol) ++hits;
      if (hits == 0) continue;
      Eigen::MatrixXd h = ed_detail::sector_matrix(model, sectors[k]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      for (int i = 0; i < hits; ++i)
        out.basis.push_back(
            ed_detail::embed_sector_vector(n, sectors[k], es.eigenvectors().col(i)));
    }
  } else {
    // full-space Lanczos; deflated restarts expose degenerate partners
    std::uint64_t seed = 0x10c9ULL;
    for (const auto& b : model.bonds) {
      seed = seed * 1099511628211ULL + static_cast<std::uint64_t>(b.a * 31 + b.b);
      std::uint64_t xy_bits, zz_bits;
      std::memcpy(&xy_bits, &b.xy, 8);
      std::memcpy(&zz_bits, &b.zz, 8);
      seed ^= xy_bits + 0x9e3779b97f4a7c15ULL + (seed << 6);
      seed ^= zz_bits + 0x9e3779b97f4a7c15ULL + (seed << 6);
    }
    Rng rng(seed);
    std::vector<std::vector<double>> deflate;
    std::vector<double> energies;
    const int want = 3;
    for (int j = 0; j < want; ++j) {
      auto [e, vec] = ed_detail::lanczos_lowest(model, deflate, rng, 1e-10, 700);
      energies.push_back(e);
      deflate.push_back(std::move(vec));
    }
    out.energy = *std::min_element(energies.begin(), energies.end());
    for (int j = 0; j < want; ++j) {
      if (energies[j] <= out.energy + degeneracy_tol) {
        PureState psi;
        psi.n = n;
        psi.amps.resize(dim_of(n));
        for (std::size_t i = 0; i < psi.dim(); ++i)
          psi.amps[i] = cplx(deflate[j][i], 0.0);
        out.basis.push_back(std::move(psi));
      }
    }
    // all three converged eigenpairs degenerate: the space may extend further
    out.possibly_truncated = (out.basis.size() == want);
  }

  for (const auto& psi : out.basis)
    if (ed_detail::residual_norm(model, psi, out.energy) > 1e-8)
      throw Error("ground-state residual exceeds 1e-8");
  return out;
}

inline GroundSpace solve_xxz_ground(int n, double delta) {
  return solve_ground_space(SpinChainModel::xxz(n, delta));
}

inline GroundSpace solve_j1j2_ground(int n, double j2) {
  if (n % 2 != 0) throw InvalidArgument("J1-J2 chain size must be even");
  return solve_ground_space(SpinChainModel::j1j2(n, j2));
}

// Single-state accessors matching the scan interfaces; degenerate ground
// spaces surface as an exception carrying the basis.
inline PureState xxz_ground_state(int n, double delta) {
  GroundSpace g = solve_xxz_ground(n, delta);
  if (g.degenerate()) throw DegenerateGroundSpace(std::move(g));
  return g.basis.front();
}

inline PureState j1j2_ground_state(int n, double j2) {
  GroundSpace g = solve_j1j2_ground(n, j2);
  if (g.degenerate()) throw DegenerateGroundSpace(std::move(g));
  return g.basis.front();
}

// --- dimerized combinations in a degenerate ground space ---------------

// Searches the span of a (small) degenerate basis for states that factor as
// singlet(a,b) (x) rest, by solving for the null space of the Gram matrix of
// the non-singlet components. Exactly recovers dimer states at the
// Majumdar-Ghosh point.
inline std::optional<PureState> singlet_factor_state(const GroundSpace& g, int qa,
                                                     int qb) {
  if (g.basis.empty()) return std::nullopt;
  const int n = g.basis.front().n;
  const std::size_t dim = dim_of(n);
  const std::size_t ma = dim_of(n - 1 - qa);
  const std::size_t mb = dim_of(n - 1 - qb);

  // component of v outside singlet(a,b) (x) anything
  auto non_singlet = [&](const PureState& v) {
    std::vector<cplx> h(v.amps);
    for (std::size_t s = 0; s < dim; ++s) {
      if ((s & ma) || (s & mb)) continue;
      const std::size_t s01 = s | mb, s10 = s | ma;
      const cplx a01 = v.amps[s01], a10 = v.amps[s10];
      const cplx overlap = (a01 - a10) / std::sqrt(2.0);
      h[s01] = a01 - overlap / std::sqrt(2.0);
      h[s10] = a10 + overlap / std::sqrt(2.0);
    }
    return h;
  };

  const auto d = static_cast<Eigen::Index>(g.basis.size());
  std::vector<std::vector<cplx>> hs;
  for (const auto& b : g.basis) hs.push_back(non_singlet(b));
  Matrix gram(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t s = 0; s < dim; ++s)
        acc += std::conj(hs[static_cast<std::size_t>(i)][s]) *
               hs[static_cast<std::size_t>(j)][s];
      gram(i, j) = acc;
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.eigenvalues()(0) > 1e-9) return std::nullopt;

  PureState out;
  out.n = n;
  out.amps.assign(dim, cplx{0.0, 0.0});
  for (Eigen::Index j = 0; j < d; ++j) {
    const cplx c = es.eigenvectors()(j, 0);
    const auto& b = g.basis[static_cast<std::size_t>(j)];
    for (std::size_t s = 0; s < dim; ++s) out.amps[s] += c * b.amps[s];
  }
  out.renormalize();
  return out;
}

}  // namespace locq
