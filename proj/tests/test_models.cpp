#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "locq/ensemble.hpp"
#include "locq/hamiltonians.hpp"
#include "locq/models.hpp"
#include "locq/geometry.hpp"

using namespace locq;

namespace {

Matrix circuit_matrix(const CircuitSpec& spec) {
  const auto d = static_cast<Eigen::Index>(dim_of(spec.n));
  Matrix u(d, d);
  Rng unused(0);
  for (Eigen::Index c = 0; c < d; ++c) {
    auto out = run_circuit(spec, PureState::computational(spec.n, c), unused);
    for (Eigen::Index r = 0; r < d; ++r) u(r, c) = out.state.amps[static_cast<std::size_t>(r)];
  }
  return u;
}

Matrix pauli_matrix_from_row(const CliffordTableau& t, int row) {
  Matrix acc = Matrix::Identity(1, 1);
  for (int q = 0; q < t.n; ++q) {
    bool x = t.x[row] & (1u << q);
    bool z = t.z[row] & (1u << q);
    Matrix p = x ? (z ? gates::Y() : gates::X()) : (z ? gates::Z() : gates::I2());
    Matrix next(acc.rows() * 2, acc.cols() * 2);
    for (Eigen::Index r = 0; r < acc.rows(); ++r)
      for (Eigen::Index c = 0; c < acc.cols(); ++c)
        next.block(r * 2, c * 2, 2, 2) = acc(r, c) * p;
    acc = std::move(next);
  }
  if (t.sign[row]) acc = -acc;
  return acc;
}

std::string unitary_fingerprint(const Matrix& u) {
  // strip global phase using the first column's largest entry
  Eigen::Index ref = 0;
  double best = -1;
  for (Eigen::Index r = 0; r < u.rows(); ++r)
    if (std::abs(u(r, 0)) > best + 1e-9) {
      best = std::abs(u(r, 0));
      ref = r;
    }
  cplx rot = std::conj(u(ref, 0)) / std::abs(u(ref, 0));
  std::string out;
  char buf[64];
  for (Eigen::Index r = 0; r < u.rows(); ++r)
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      cplx v = u(r, c) * rot;
      auto snap = [](double x) {
        double s = std::round(x * 1e6) / 1e6;
        return s == 0.0 ? 0.0 : s;
      };
      std::snprintf(buf, sizeof buf, "%.6f,%.6f;", snap(v.real()), snap(v.imag()));
      out += buf;
    }
  return out;
}

}  // namespace

TEST_CASE("haar unitaries are unitary with normalized columns") {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix u = haar_two_qubit_unitary(rng);
    CHECK((u * u.adjoint() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    for (int c = 0; c < 4; ++c)
      CHECK(u.col(c).norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("two-qubit Haar gate purity recursion on a product state") {
  // E tr(rho_{01}^2) after a Haar gate on qubits (1,2) of a product state is
  // 2/5 (tr(rho_0^2) + tr(rho_{012}^2)) = 4/5.
  Rng rng(4242);
  auto start = tensor(tensor(rotated_plus(0.3), rotated_plus(0.8)),
                      tensor(rotated_plus(1.2), zero_state(1)));
  const int draws = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    auto u = haar_two_qubit_unitary(rng);
    auto evolved = apply_unitary(start, u, {1, 2});
    double p = reduced_purity(evolved, {0, 1});
    sum += p;
    sum2 += p * p;
  }
  double mean = sum / draws;
  double se = std::sqrt(std::max(0.0, (sum2 - sum * sum / draws) / (draws - 1)) / draws);
  CHECK(std::abs(mean - 0.8) < 4 * se);
}

TEST_CASE("brickwork pairing follows the staggered rule") {
  Rng rng(1);
  auto d1 = brickwork_circuit({4}, 1, rng);
  REQUIRE(d1.layers.size() == 1);
  REQUIRE(d1.layers[0].gates.size() == 2);
  CHECK(d1.layers[0].gates[0].targets == std::vector<int>{0, 1});
  CHECK(d1.layers[0].gates[1].targets == std::vector<int>{2, 3});

  auto d2 = brickwork_circuit({4}, 2, rng);
  REQUIRE(d2.layers.size() == 2);
  REQUIRE(d2.layers[1].gates.size() == 1);  // boundary qubits idle
  CHECK(d2.layers[1].gates[0].targets == std::vector<int>{1, 2});

  auto d0 = brickwork_circuit({4}, 0, rng);
  CHECK(d0.layers.empty());
  auto out = run_circuit(d0, ghz_state(4), rng);
  CHECK(std::abs(inner(out.state, ghz_state(4)) - cplx(1, 0)) < 1e-12);

  // 2D 4x4: first layer couples rows (0,1) and (2,3) within each column
  auto c2d = brickwork_circuit({4, 4}, 4, rng);
  REQUIRE(c2d.layers[0].gates.size() == 8);
  CHECK(c2d.layers[0].gates[0].targets == std::vector<int>{0, 4});
  // second layer staggers rows: pairs (1,2) per column
  CHECK(c2d.layers[1].gates[0].targets == std::vector<int>{4, 8});
  // third layer couples columns (0,1),(2,3) within each row
  CHECK(c2d.layers[2].gates[0].targets == std::vector<int>{0, 1});
}

TEST_CASE("run_circuit measurement statistics and record probability") {
  Rng rng(77);
  CircuitSpec spec;
  spec.n = 1;
  CircuitLayer l;
  l.gates.push_back({"H", {0}, gates::H()});
  spec.layers.push_back(l);
  CircuitLayer meas;
  meas.measured_qubits = {0};
  spec.layers.push_back(meas);

  int ones = 0;
  const int runs = 10000;
  for (int i = 0; i < runs; ++i) {
    auto out = run_circuit(spec, zero_state(1), rng);
    if (out.record == "1") ++ones;
    CHECK(out.record_probability == doctest::Approx(0.5).epsilon(1e-12));
  }
  double freq = static_cast<double>(ones) / runs;
  CHECK(std::abs(freq - 0.5) < 4 * std::sqrt(0.25 / runs));
}

TEST_CASE("run_circuit conditional feedforward teleports a state") {
  auto phi = rotated_plus(0.7);

  CircuitSpec spec;
  spec.n = 3;
  CircuitLayer prep;
  prep.gates.push_back({"H", {1}, gates::H()});
  spec.layers.push_back(prep);
  CircuitLayer ent;
  ent.gates.push_back({"CX", {1, 2}, gates::CX()});
  spec.layers.push_back(ent);
  CircuitLayer bellmeas;
  bellmeas.gates.push_back({"CX", {0, 1}, gates::CX()});
  spec.layers.push_back(bellmeas);
  CircuitLayer had;
  had.gates.push_back({"H", {0}, gates::H()});
  spec.layers.push_back(had);
  CircuitLayer meas;
  meas.measured_qubits = {0, 1};
  spec.layers.push_back(meas);

  CircuitLayer fix;
  for (const std::string rec : {"00", "01", "10", "11"}) {
    std::vector<CircuitGate> gs;
    Matrix corr = Matrix::Identity(2, 2);
    if (rec[1] == '1') corr = gates::X() * corr;
    if (rec[0] == '1') corr = gates::Z() * corr;
    if (rec != "00") gs.push_back({"U", {2}, corr});
    fix.conditional[rec] = gs;
  }
  spec.layers.push_back(fix);

  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto out = run_circuit(spec, tensor(phi, zero_state(2)), rng);
    auto [p, final_q2] = projected_state(
        out.state, Bipartition::keep(3, {2}),
        static_cast<std::size_t>((out.record[0] - '0') * 2 + (out.record[1] - '0')));
    (void)p;
    CHECK(state_fidelity(final_q2, phi) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("clifford tableau synthesis reproduces the conjugation action") {
  Rng rng(2025);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      auto t = random_clifford_tableau(n, rng);
      CircuitSpec spec;
      spec.n = n;
      for (const NamedGate& g : synthesize_clifford(t)) {
        CircuitLayer l;
        l.gates.push_back({to_string(g.kind),
                           g.q1 >= 0 ? std::vector<int>{g.q0, g.q1}
                                     : std::vector<int>{g.q0},
                           named_gate_matrix(g.kind)});
        spec.layers.push_back(std::move(l));
      }
      Matrix u = circuit_matrix(spec);
      CHECK((u * u.adjoint() - Matrix::Identity(u.rows(), u.cols()))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
      for (int i = 0; i < n; ++i) {
        Matrix x_i = pauli_matrix_from_row(CliffordTableau::identity(n), i);
        Matrix z_i = pauli_matrix_from_row(CliffordTableau::identity(n), n + i);
        CHECK((u * x_i * u.adjoint() - pauli_matrix_from_row(t, i)).cwiseAbs().maxCoeff() <
              1e-9);
        CHECK((u * z_i * u.adjoint() - pauli_matrix_from_row(t, n + i))
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
      }
    }
  }
}

TEST_CASE("single-qubit Clifford sampling covers all 24 elements uniformly") {
  Rng rng(909);
  std::map<std::string, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto spec = random_clifford_unitary(1, rng);
    counts[unitary_fingerprint(circuit_matrix(spec))]++;
  }
  CHECK(counts.size() == 24);
  const double p = 1.0 / 24.0;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  for (const auto& [fp, c] : counts) {
    double freq = static_cast<double>(c) / draws;
    CHECK(std::abs(freq - p) < 4 * sigma);
  }
}

TEST_CASE("random Clifford circuits map |0..0> to stabilizer states") {
  Rng rng(31337);
  for (int n = 1; n <= 3; ++n) {
    const auto& dict = stabilizer_dictionary(n);
    for (int rep = 0; rep < 5; ++rep) {
      auto spec = random_clifford_unitary(n, rng);
      Rng unused(0);
      auto out = run_circuit(spec, zero_state(n), unused);
      CHECK(stabilizer_fidelity(out.state, dict) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("magic injection model") {
  Rng rng(5150);
  // alpha = 0 leaves a stabilizer state
  auto s0 = magic_injection_state(3, 0.0, rng);
  CHECK(stabilizer_fidelity(s0, stabilizer_dictionary(3)) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s0.norm2() == doctest::Approx(1.0).epsilon(1e-10));

  // identity Clifford at n = 1, alpha = pi/4 gives the T state
  CircuitSpec id;
  id.n = 1;
  PureState t_state = plus_state(1);
  t_state = apply_unitary(t_state, gates::RZ(M_PI / 4), {0});
  Rng unused(0);
  auto via_circuit = run_circuit(id, t_state, unused).state;
  CHECK(stabilizer_fidelity(via_circuit, stabilizer_dictionary(1)) ==
        doctest::Approx((2.0 + std::sqrt(2.0)) / 4.0).epsilon(1e-12));

  auto s = magic_injection_state(4, M_PI / 6, rng);
  CHECK(s.norm2() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("xxz ground states") {
  // Delta = 2: degenerate aligned product pair at energy -2n
  auto g = solve_xxz_ground(8, 2.0);
  CHECK(g.degenerate());
  CHECK(g.energy == doctest::Approx(-16.0).epsilon(1e-10));
  REQUIRE(g.basis.size() == 2);
  std::set<std::size_t> supports;
  for (const auto& b : g.basis) {
    std::size_t nonzero = 0, where = 0;
    for (std::size_t i = 0; i < b.dim(); ++i)
      if (std::abs(b.amps[i]) > 1e-9) {
        ++nonzero;
        where = i;
      }
    CHECK(nonzero == 1);
    supports.insert(where);
  }
  CHECK(supports == std::set<std::size_t>{0, 255});
  CHECK_THROWS_AS(xxz_ground_state(8, 2.0), DegenerateGroundSpace);

  // unique critical-phase ground state; translation-invariant exact LE
  auto crit = solve_xxz_ground(6, 0.5);
  CHECK(!crit.degenerate());
  auto psi = xxz_ground_state(6, 0.5);
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
  std::vector<double> le;
  for (int i = 0; i < 6; ++i) {
    auto part = Bipartition::keep(6, {i, (i + 1) % 6});
    le.push_back(localizable_quantumness(psi, part, oracle,
                                         BasisAssignment::Mode::UniformRandomPauli)
                     .estimate);
  }
  for (int i = 1; i < 6; ++i) CHECK(le[i] == doctest::Approx(le[0]).epsilon(1e-8));
  CHECK(le[0] > 0.0);
}

TEST_CASE("j1j2 ground states and Majumdar-Ghosh dimers") {
  auto heis = solve_j1j2_ground(8, 0.0);
  CHECK(!heis.degenerate());

  auto mg = solve_j1j2_ground(8, 0.5);
  CHECK(mg.degenerate());
  CHECK(mg.basis.size() == 2);
  CHECK(mg.energy == doctest::Approx(-12.0).epsilon(1e-9));  // -1.5 n at the MG point

  auto d1 = singlet_factor_state(mg, 0, 1);
  auto d2 = singlet_factor_state(mg, 1, 2);
  REQUIRE(d1.has_value());
  REQUIRE(d2.has_value());

  // dimer with singlet on (0,1): every projected state is the singlet
  auto part = Bipartition::keep(8, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
  auto lq1 = localizable_quantumness(*d1, part, oracle, BasisAssignment::Mode::FixedZ);
  CHECK(lq1.estimate == doctest::Approx(0.5).epsilon(1e-9));
  auto lq2 = localizable_quantumness(*d2, part, oracle, BasisAssignment::Mode::FixedZ);
  CHECK(lq2.estimate == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lanczos agrees with the dense solver") {
  auto model = SpinChainModel::xxz(10, 0.3);
  auto dense = solve_ground_space(model);
  Rng rng(11);
  auto [e, vec] = ed_detail::lanczos_lowest(model, {}, rng, 1e-10, 600);
  CHECK(e == doctest::Approx(dense.energy).epsilon(1e-9));

  // deflated second run finds the degenerate partner at the MG point
  auto mg_model = SpinChainModel::j1j2(8, 0.5);
  auto mg_dense = solve_ground_space(mg_model);
  Rng rng2(12);
  auto [e1, v1] = ed_detail::lanczos_lowest(mg_model, {}, rng2, 1e-10, 600);
  auto [e2, v2] = ed_detail::lanczos_lowest(mg_model, {v1}, rng2, 1e-10, 600);
  CHECK(e1 == doctest::Approx(mg_dense.energy).epsilon(1e-8));
  CHECK(e2 == doctest::Approx(mg_dense.energy).epsilon(1e-8));
}

TEST_CASE("depolarize") {
  auto psi = ghz_state(3);
  auto rho0 = depolarize(psi, 0.0);
  CHECK(state_fidelity(psi, rho0) == doctest::Approx(1.0).epsilon(1e-12));

  auto rho1 = depolarize(psi, 1.0);
  CHECK((rho1.mat - DensityState::maximally_mixed(3).mat).cwiseAbs().maxCoeff() < 1e-14);

  const double p = 0.37;
  auto rho = depolarize(psi, p);
  rho.check();
  const double d = 8.0;
  CHECK(state_fidelity(psi, rho) == doctest::Approx((1 - p) + p / d).epsilon(1e-12));
  const double purity = (rho.mat * rho.mat).trace().real();
  CHECK(purity ==
        doctest::Approx((1 - p) * (1 - p) + 2 * p * (1 - p) / d + p * p / d).epsilon(1e-12));

  // mixture branch sampling reproduces the density matrix in distribution
  Rng rng(88);
  auto mix = depolarize_mixture(psi, p);
  const int draws = 20000;
  double mean_fid = 0.0;
  for (int i = 0; i < draws; ++i)
    mean_fid += state_fidelity(psi, mix.sample_branch(rng)) / draws;
  CHECK(std::abs(mean_fid - ((1 - p) + p / d)) < 0.02);
}

TEST_CASE("measurement-assisted circuits keep the averaged projected entanglement bounded") {
  // one unitary+measurement round on the toy 4x4 lattice: the outcome-averaged
  // E_{L|R} of the projected ensemble stays below 12wd
  // uses the toy lattice geometry
  Rng rng(8088);
  auto geom = make_lattice_geometry({4, 4}, 1, 1);
  auto part = geometry_partition(geom);
  auto lr = geometry_lr_cut(geom);
  const double cap = 12.0 * geom.w * geom.d;

  for (int rep = 0; rep < 3; ++rep) {
    CircuitSpec spec = brickwork_circuit({4, 4}, geom.d, rng);
    CircuitLayer meas;
    meas.measured_qubits = {0, 5, 10, 15};
    spec.layers.push_back(meas);
    auto run = run_circuit(spec, zero_state(16), rng);

    double avg = 0.0;
    for_each_projected(run.state, part, std::vector<PauliBasis>(12, PauliBasis::Z),
                       [&](double p, const std::vector<Label>&, const PureState& s) {
                         avg += p * entanglement_entropy(s, lr);
                       });
    CHECK(avg <= cap + 1e-9);
  }
}

TEST_CASE("size caps raise UnsupportedSize") {
  CHECK_THROWS_AS(solve_xxz_ground(15, 0.5), UnsupportedSize);
  Rng rng(1);
  CHECK_THROWS_AS(random_clifford_unitary(15, rng), UnsupportedSize);
  PureState big = zero_state(11);
  CHECK_THROWS_AS(depolarize(big, 0.5), UnsupportedSize);
}
