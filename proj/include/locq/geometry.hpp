// geometry.hpp
// Lattice partitions for complexity certification: A is a 2w x 2w block (or
// a length-2w segment in 1D) split into halves L and R; L1/R1 collect the
// qubits of each half within graph distance d of the complement B.

#pragma once

#include <deque>
#include <string>
#include <vector>

#include "locq/qstate.hpp"

namespace locq {

struct LatticeGeometry {
  std::vector<int> dims;  // (m) or (m0, m1)
  int w = 1;
  int d = 1;
  std::vector<int> A, B, L, R, L1, L2, R1, R2;

  int n() const {
    int t = 1;
    for (int m : dims) t *= m;
    return t;
  }
  double eta_ratio() const { return static_cast<double>(w) / d; }
};

// Builds the partition with A centered on the lattice. Throws
// GeometryInvalid when the block does not fit or the lattice exceeds the
// dense-simulation cap of 16 qubits.
inline LatticeGeometry make_lattice_geometry(std::vector<int> dims, int w, int d) {
  if (dims.empty() || dims.size() > 2)
    throw GeometryInvalid("lattice must be 1D or 2D");
  if (w < 1 || d < 1) throw GeometryInvalid("w and d must be positive");

  LatticeGeometry g;
  g.dims = std::move(dims);
  g.w = w;
  g.d = d;

  const int side = 2 * w;
  long total = 1;
  for (int m : g.dims) {
    if (m < 1) throw GeometryInvalid("lattice dimensions must be positive");
    if (side > m)
      throw GeometryInvalid("block of side " + std::to_string(side) +
                            " does not fit in a lattice of extent " + std::to_string(m));
    total *= m;
  }
  if (total > 16)
    throw GeometryInvalid("lattice with " + std::to_string(total) +
                          " qubits exceeds the 16-qubit statevector cap");

  const int m0 = g.dims[0];
  const int m1 = g.dims.size() == 2 ? g.dims[1] : 1;
  auto qubit = [&](int r, int c) { return r * m1 + c; };

  std::vector<bool> in_a(static_cast<std::size_t>(total), false);
  std::vector<bool> in_l(static_cast<std::size_t>(total), false);
  if (g.dims.size() == 1) {
    const int c0 = (m0 - side) / 2;
    for (int x = c0; x < c0 + side; ++x) {
      in_a[x] = true;
      if (x < c0 + w) in_l[x] = true;
    }
  } else {
    const int r0 = (m0 - side) / 2;
    const int c0 = (m1 - side) / 2;
    for (int r = r0; r < r0 + side; ++r)
      for (int c = c0; c < c0 + side; ++c) {
        in_a[qubit(r, c)] = true;
        if (c < c0 + w) in_l[qubit(r, c)] = true;
      }
  }

  for (int q = 0; q < total; ++q) (in_a[q] ? g.A : g.B).push_back(q);
  if (g.B.empty()) throw GeometryInvalid("complement B is empty");
  for (int q : g.A) (in_l[q] ? g.L : g.R).push_back(q);

  // graph distance to B by multi-source BFS
  std::vector<int> dist(static_cast<std::size_t>(total), -1);
  std::deque<int> queue;
  for (int q : g.B) {
    dist[q] = 0;
    queue.push_back(q);
  }
  auto visit = [&](int q, int from) {
    if (q >= 0 && q < total && dist[q] < 0) {
      dist[q] = dist[from] + 1;
      queue.push_back(q);
    }
  };
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    if (g.dims.size() == 1) {
      if (q > 0) visit(q - 1, q);
      if (q + 1 < total) visit(q + 1, q);
    } else {
      int r = q / m1, c = q % m1;
      if (r > 0) visit(qubit(r - 1, c), q);
      if (r + 1 < m0) visit(qubit(r + 1, c), q);
      if (c > 0) visit(qubit(r, c - 1), q);
      if (c + 1 < m1) visit(qubit(r, c + 1), q);
    }
  }
  for (int q : g.L) (dist[q] <= d ? g.L1 : g.L2).push_back(q);
  for (int q : g.R) (dist[q] <= d ? g.R1 : g.R2).push_back(q);
  return g;
}

inline Bipartition geometry_partition(const LatticeGeometry& g) {
  Bipartition part;
  part.A = g.A;
  part.B = g.B;
  part.check();
  return part;
}

// Cut of the projected state (defined on A, in A list order) into L | R.
inline Bipartition geometry_lr_cut(const LatticeGeometry& g) {
  Bipartition cut;
  for (std::size_t i = 0; i < g.A.size(); ++i) {
    const int q = g.A[i];
    bool left = false;
    for (int l : g.L)
      if (l == q) left = true;
    (left ? cut.A : cut.B).push_back(static_cast<int>(i));
  }
  return cut;
}

}  // namespace locq
