// states.hpp
// Gate constants and builders for the named states used across the toolkit.

#pragma once

#include <cmath>

#include "locq/qstate.hpp"

namespace locq {
namespace gates {

inline Matrix I2() { return Matrix::Identity(2, 2); }

inline Matrix X() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix Y() {
  Matrix m(2, 2);
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

inline Matrix Z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix H() {
  Matrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline Matrix S() {
  Matrix m(2, 2);
  m << 1, 0, 0, cplx(0, 1);
  return m;
}

inline Matrix Sdg() {
  Matrix m(2, 2);
  m << 1, 0, 0, cplx(0, -1);
  return m;
}

// exp(-i alpha Z / 2)
inline Matrix RZ(double alpha) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -alpha / 2.0);
  m(1, 1) = std::polar(1.0, alpha / 2.0);
  return m;
}

inline Matrix CX() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

inline Matrix CZ() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1;
  return m;
}

inline Matrix SWAP() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return m;
}

}  // namespace gates

inline PureState zero_state(int n) { return PureState::computational(n, 0); }

inline PureState plus_state(int n) {
  PureState s;
  s.n = n;
  const double a = 1.0 / std::sqrt(static_cast<double>(dim_of(n)));
  s.amps.assign(dim_of(n), cplx{a, 0.0});
  return s;
}

// (|0..0> + |1..1>)/sqrt(2); n = 2 gives the Bell pair.
inline PureState ghz_state(int n) {
  PureState s;
  s.n = n;
  s.amps.assign(dim_of(n), cplx{0.0, 0.0});
  const double a = 1.0 / std::sqrt(2.0);
  s.amps.front() = cplx{a, 0.0};
  s.amps.back() = cplx{a, 0.0};
  return s;
}

inline PureState bell_state() { return ghz_state(2); }

inline PureState tensor(const PureState& a, const PureState& b) {
  PureState out;
  out.n = a.n + b.n;
  out.amps.resize(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j)
      out.amps[i * b.dim() + j] = a.amps[i] * b.amps[j];
  return out;
}

// Open-boundary 1D cluster state: |+>^n then CZ on every neighboring pair.
inline PureState cluster_state_1d(int n) {
  PureState s = plus_state(n);
  for (int q = 0; q + 1 < n; ++q) s = apply_unitary(s, gates::CZ(), {q, q + 1});
  return s;
}

inline PureState single_qubit_state(cplx a0, cplx a1) {
  double nrm = std::sqrt(std::norm(a0) + std::norm(a1));
  return PureState::from_amplitudes(1, {a0 / nrm, a1 / nrm});
}

// R_Z(alpha)|+>; alpha = pi/4 is the T state.
inline PureState rotated_plus(double alpha) {
  const double s = 1.0 / std::sqrt(2.0);
  return single_qubit_state(cplx{s, 0.0}, std::polar(s, alpha));
}

}  // namespace locq
