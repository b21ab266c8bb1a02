// clifford.hpp
// Uniform random Clifford sampling and synthesis to an H/S/CX-family gate
// sequence. The symplectic part is drawn by the transvection construction
// (hyperbolic pair by pair), which maps uniform random choices bijectively
// onto the symplectic group; 2n random sign bits fix the Pauli part.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locq/errors.hpp"
#include "locq/rng.hpp"

namespace locq {

enum class CliffordGate : std::uint8_t { H, S, Sdg, X, Y, Z, CX, CZ };

struct NamedGate {
  CliffordGate kind;
  int q0 = 0;
  int q1 = -1;  // second target for CX/CZ
};

inline const char* to_string(CliffordGate g) {
  switch (g) {
    case CliffordGate::H: return "H";
    case CliffordGate::S: return "S";
    case CliffordGate::Sdg: return "Sdg";
    case CliffordGate::X: return "X";
    case CliffordGate::Y: return "Y";
    case CliffordGate::Z: return "Z";
    case CliffordGate::CX: return "CX";
    default: return "CZ";
  }
}

// --- binary symplectic layer ----------------------------------------------

namespace clifford_detail {

// Pauli vectors are interleaved: bit 2j = x_j, bit 2j+1 = z_j. n <= 16.
using PV = std::uint64_t;

inline int sympl_ip(PV a, PV b) {
  const PV even = 0x5555555555555555ULL;
  PV xa = a & even, za = (a >> 1) & even;
  PV xb = b & even, zb = (b >> 1) & even;
  return static_cast<int>(__builtin_parityll((xa & zb) ^ (za & xb)));
}

inline PV transvect(PV h, PV v) { return sympl_ip(v, h) ? v ^ h : v; }

// Pair (h_first, h_second) with T_{h_second}(T_{h_first}(x)) = y.
inline std::pair<PV, PV> find_transvection(PV x, PV y, int nn) {
  if (x == y) return {0, 0};
  if (sympl_ip(x, y) == 1) return {x ^ y, 0};

  auto site = [](PV v, int j) -> int { return static_cast<int>((v >> (2 * j)) & 3u); };
  auto anti = [](int p) -> int {
    // a Pauli anticommuting with p (bits: 1 = X, 2 = Z, 3 = Y)
    switch (p) {
      case 1: return 2;
      case 2: return 1;
      default: return 1;
    }
  };

  const int n = nn / 2;
  PV z = 0;
  for (int j = 0; j < n; ++j) {
    int xs = site(x, j), ys = site(y, j);
    if (xs != 0 && ys != 0) {
      int zs = xs ^ ys;       // the third Pauli when they differ
      if (zs == 0) zs = anti(xs);
      z = static_cast<PV>(zs) << (2 * j);
      return {x ^ z, z ^ y};  // x -> z -> y
    }
  }
  // no common site: one site from each support
  PV zx = 0, zy = 0;
  for (int j = 0; j < n; ++j) {
    if (site(x, j) != 0 && site(y, j) == 0 && zx == 0)
      zx = static_cast<PV>(anti(site(x, j))) << (2 * j);
    if (site(y, j) != 0 && site(x, j) == 0 && zy == 0)
      zy = static_cast<PV>(anti(site(y, j))) << (2 * j);
  }
  z = zx | zy;
  return {x ^ z, z ^ y};
}

// Uniform random element of Sp(2n, 2); rows are the images of the
// interleaved basis vectors e_0 .. e_{2n-1}.
inline std::vector<PV> random_symplectic(int n, Rng& rng) {
  if (n == 0) return {};
  const int nn = 2 * n;

  // recursive part on sites 1..n-1, embedded at bit offset 2
  std::vector<PV> inner = random_symplectic(n - 1, rng);
  std::vector<PV> rows(nn);
  rows[0] = 1;       // e_0 (X_0)
  rows[1] = 2;       // e_1 (Z_0)
  for (int i = 0; i < nn - 2; ++i) rows[2 + i] = inner[i] << 2;

  // f1: uniform nonzero image of e_0
  PV f1 = 1 + rng.below((PV{1} << nn) - 1);
  auto [h_first, h_second] = find_transvection(PV{1}, f1, nn);

  // N: fixes e_0, sends e_1 to an arbitrary vector with <f-frame pairing> = 1
  const PV b0 = rng.u64() & 1u;
  PV eprime = 1;  // e_0
  for (int j = 2; j < nn; ++j)
    if (rng.u64() & 1u) eprime |= PV{1} << j;

  for (auto& r : rows) {
    r = transvect(eprime, r);
    if (!b0) r = transvect(PV{1}, r);  // T_{e_0}
    r = transvect(h_first, r);
    r = transvect(h_second, r);
  }
  return rows;
}

}  // namespace clifford_detail

// --- tableau ----------------------------------------------------------------

// Rows 0..n-1 are the images of X_i under conjugation, rows n..2n-1 the
// images of Z_i; each row is (x bits, z bits, sign).
struct CliffordTableau {
  int n = 0;
  std::vector<std::uint32_t> x, z;
  std::vector<std::uint8_t> sign;

  static CliffordTableau identity(int n) {
    CliffordTableau t;
    t.n = n;
    t.x.assign(2 * n, 0);
    t.z.assign(2 * n, 0);
    t.sign.assign(2 * n, 0);
    for (int i = 0; i < n; ++i) {
      t.x[i] = 1u << i;
      t.z[n + i] = 1u << i;
    }
    return t;
  }

  bool is_identity() const {
    auto id = identity(n);
    return x == id.x && z == id.z && sign == id.sign;
  }

  // Left-multiplication by a gate: every image row conjugates by it.
  void prepend(const NamedGate& g) {
    const std::uint32_t m0 = 1u << g.q0;
    const std::uint32_t m1 = g.q1 >= 0 ? (1u << g.q1) : 0;
    for (std::size_t r = 0; r < x.size(); ++r) {
      std::uint32_t& xr = x[r];
      std::uint32_t& zr = z[r];
      std::uint8_t& sr = sign[r];
      switch (g.kind) {
        case CliffordGate::H: {
          if ((xr & m0) && (zr & m0)) sr ^= 1;
          std::uint32_t xb = xr & m0, zb = zr & m0;
          xr = (xr & ~m0) | zb;
          zr = (zr & ~m0) | xb;
          break;
        }
        case CliffordGate::S:
          if ((xr & m0) && (zr & m0)) sr ^= 1;
          zr ^= xr & m0;
          break;
        case CliffordGate::Sdg:
          if ((xr & m0) && !(zr & m0)) sr ^= 1;
          zr ^= xr & m0;
          break;
        case CliffordGate::X:
          if (zr & m0) sr ^= 1;
          break;
        case CliffordGate::Y:
          if (((zr & m0) != 0) != ((xr & m0) != 0)) sr ^= 1;
          break;
        case CliffordGate::Z:
          if (xr & m0) sr ^= 1;
          break;
        case CliffordGate::CX: {
          bool xc = xr & m0, zc = zr & m0;
          bool xt = xr & m1, zt = zr & m1;
          if (xc && zt && (xt == zc)) sr ^= 1;
          if (xc) xr ^= m1;
          if (zt) zr ^= m0;
          break;
        }
        case CliffordGate::CZ: {
          bool xa = xr & m0, xb = xr & m1;
          bool za = zr & m0, zb = zr & m1;
          if (xa && xb && (za != zb)) sr ^= 1;
          if (xb) zr ^= m0;
          if (xa) zr ^= m1;
          break;
        }
      }
    }
  }
};

// Uniform random Clifford as a tableau.
inline CliffordTableau random_clifford_tableau(int n, Rng& rng) {
  if (n < 1 || n > 16) throw UnsupportedSize("Clifford sampling supports 1..16 qubits");
  auto sym = clifford_detail::random_symplectic(n, rng);
  CliffordTableau t;
  t.n = n;
  t.x.assign(2 * n, 0);
  t.z.assign(2 * n, 0);
  t.sign.assign(2 * n, 0);
  for (int i = 0; i < n; ++i) {
    // interleaved basis: e_{2i} = X_i, e_{2i+1} = Z_i
    for (int j = 0; j < n; ++j) {
      if ((sym[2 * i] >> (2 * j)) & 1u) t.x[i] |= 1u << j;
      if ((sym[2 * i] >> (2 * j + 1)) & 1u) t.z[i] |= 1u << j;
      if ((sym[2 * i + 1] >> (2 * j)) & 1u) t.x[n + i] |= 1u << j;
      if ((sym[2 * i + 1] >> (2 * j + 1)) & 1u) t.z[n + i] |= 1u << j;
    }
    t.sign[i] = static_cast<std::uint8_t>(rng.u64() & 1u);
    t.sign[n + i] = static_cast<std::uint8_t>(rng.u64() & 1u);
  }
  return t;
}

// --- synthesis ---------------------------------------------------------------

// Reduces the tableau to the identity by prepending gates; the sampled
// Clifford is then the reversed, daggered gate list.
inline std::vector<NamedGate> synthesize_clifford(CliffordTableau t) {
  const int n = t.n;
  std::vector<NamedGate> applied;
  auto emit = [&](CliffordGate k, int a, int b = -1) {
    NamedGate g{k, a, b};
    t.prepend(g);
    applied.push_back(g);
  };
  auto swap_cols = [&](int a, int b) {
    emit(CliffordGate::CX, a, b);
    emit(CliffordGate::CX, b, a);
    emit(CliffordGate::CX, a, b);
  };

  for (int q = 0; q < n; ++q) {
    const std::uint32_t mq = 1u << q;

    // Z-row(q) -> +/- Z_q
    {
      int pivot = -1;
      for (int k = q; k < n && pivot < 0; ++k)
        if (t.z[n + q] & (1u << k)) pivot = k;
      if (pivot < 0) {
        for (int k = q; k < n && pivot < 0; ++k)
          if (t.x[n + q] & (1u << k)) {
            emit(CliffordGate::H, k);
            pivot = k;
          }
      }
      if (pivot != q) swap_cols(q, pivot);
      for (int k = q + 1; k < n; ++k)
        if (t.z[n + q] & (1u << k)) emit(CliffordGate::CX, k, q);
      // clear x support per site: (1,0) -> H; (1,1) -> S then H; then CX into q
      for (int k = q + 1; k < n; ++k) {
        bool xk = t.x[n + q] & (1u << k);
        bool zk = t.z[n + q] & (1u << k);
        if (!xk && !zk) continue;
        if (xk && zk) emit(CliffordGate::S, k);
        if (t.x[n + q] & (1u << k)) emit(CliffordGate::H, k);
        if (t.z[n + q] & (1u << k)) emit(CliffordGate::CX, k, q);
      }
      if (t.x[n + q] & mq) {
        // Y at the pivot site: HSH sends (1,1) -> (0,1)
        emit(CliffordGate::H, q);
        emit(CliffordGate::S, q);
        emit(CliffordGate::H, q);
      }
    }

    // X-row(q) -> +/- X_q, using only gates that fix Z_q
    {
      // anticommutation with Z_q guarantees x support at q
      for (int k = q + 1; k < n; ++k)
        if (t.x[q] & (1u << k)) emit(CliffordGate::CX, q, k);
      for (int k = q + 1; k < n; ++k)
        if (t.z[q] & (1u << k)) emit(CliffordGate::CZ, q, k);
      if (t.z[q] & mq) emit(CliffordGate::S, q);
    }

    if (t.sign[n + q]) emit(CliffordGate::X, q);
    if (t.sign[q]) emit(CliffordGate::Z, q);
  }

  if (!t.is_identity()) throw Error("clifford synthesis failed to reach identity");

  // U = applied_1^dag ... applied_m^dag reversed
  std::vector<NamedGate> circuit;
  circuit.reserve(applied.size());
  for (auto it = applied.rbegin(); it != applied.rend(); ++it) {
    NamedGate g = *it;
    if (g.kind == CliffordGate::S) g.kind = CliffordGate::Sdg;
    else if (g.kind == CliffordGate::Sdg) g.kind = CliffordGate::S;
    circuit.push_back(g);
  }
  return circuit;
}

inline std::vector<NamedGate> random_clifford_gates(int n, Rng& rng) {
  return synthesize_clifford(random_clifford_tableau(n, rng));
}

}  // namespace locq
