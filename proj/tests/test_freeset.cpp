#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <unordered_set>

#include "locq/freeset.hpp"
#include "locq/states.hpp"

using namespace locq;

namespace {

// Independent oracle for the stabilizer set: BFS orbit closure of |0..0>
// under the Clifford generators H_i, S_i, CX_ij.
std::unordered_set<std::string> stabilizer_orbit_fingerprints(int n) {
  std::vector<PureState> frontier{zero_state(n)};
  std::unordered_set<std::string> seen{
      detail::phase_invariant_fingerprint(frontier[0])};
  std::vector<std::pair<Matrix, std::vector<int>>> gens;
  for (int q = 0; q < n; ++q) {
    gens.emplace_back(gates::H(), std::vector<int>{q});
    gens.emplace_back(gates::S(), std::vector<int>{q});
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) gens.emplace_back(gates::CX(), std::vector<int>{a, b});

  std::vector<PureState> states = frontier;
  while (!frontier.empty()) {
    std::vector<PureState> next;
    for (const auto& s : frontier) {
      for (const auto& [g, t] : gens) {
        PureState ns = apply_unitary(s, g, t);
        auto fp = detail::phase_invariant_fingerprint(ns);
        if (seen.insert(fp).second) next.push_back(std::move(ns));
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

}  // namespace

TEST_CASE("separable_fidelity") {
  auto cut = Bipartition::keep(2, {0});
  CHECK(separable_fidelity(bell_state(), cut) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(separable_fidelity(tensor(plus_state(1), zero_state(1)), cut) ==
        doctest::Approx(1.0).epsilon(1e-12));
  std::vector<cplx> a(4, cplx{0, 0});
  a[0] = std::sqrt(0.8);
  a[3] = std::sqrt(0.2);
  CHECK(separable_fidelity(PureState::from_amplitudes(2, a), cut) ==
        doctest::Approx(0.8).epsilon(1e-12));

  // lower bound 2^{-min(|A1|,|B1|)} for arbitrary normalized inputs
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<cplx> v(8);
    for (auto& x : v) x = cplx(rng.gaussian(), rng.gaussian());
    PureState psi;
    psi.n = 3;
    psi.amps = std::move(v);
    psi.renormalize();
    CHECK(separable_fidelity(psi, Bipartition::keep(3, {0})) >= 0.5 - 1e-12);
  }
}

TEST_CASE("stabilizer dictionary counts match the orbit closure") {
  setenv("LOCQ_CACHE_DIR", ".locq-test-cache", 1);
  for (int n = 1; n <= 3; ++n) {
    auto dict = enumerate_stabilizer_states(n);
    CHECK(dict.count() == stabilizer_state_count(n));

    auto orbit = stabilizer_orbit_fingerprints(n);
    CHECK(orbit.size() == dict.count());
    // every enumerated state appears in the independently generated orbit
    std::size_t found = 0;
    for (const auto& s : dict.states)
      if (orbit.count(detail::phase_invariant_fingerprint(s))) ++found;
    CHECK(found == dict.count());
  }
  CHECK(stabilizer_state_count(1) == 6);
  CHECK(stabilizer_state_count(2) == 60);
  CHECK(stabilizer_state_count(3) == 1080);
  CHECK_THROWS_AS(enumerate_stabilizer_states(4), UnsupportedSize);
}

TEST_CASE("stabilizer cache round-trips") {
  setenv("LOCQ_CACHE_DIR", ".locq-test-cache", 1);
  auto first = enumerate_stabilizer_states(2);
  auto second = enumerate_stabilizer_states(2);  // served from cache
  REQUIRE(first.count() == second.count());
  for (std::size_t i = 0; i < first.count(); ++i)
    for (std::size_t j = 0; j < first.states[i].dim(); ++j)
      CHECK(std::abs(first.states[i].amps[j] - second.states[i].amps[j]) < 1e-12);
}

TEST_CASE("stabilizer_fidelity") {
  const auto& dict = stabilizer_dictionary(1);
  CHECK(stabilizer_fidelity(zero_state(1), dict) == doctest::Approx(1.0).epsilon(1e-12));

  const double t_fid = (2.0 + std::sqrt(2.0)) / 4.0;
  CHECK(stabilizer_fidelity(rotated_plus(M_PI / 4), dict) ==
        doctest::Approx(t_fid).epsilon(1e-12));

  const auto& dict3 = stabilizer_dictionary(3);
  CHECK(stabilizer_fidelity(ghz_state(3), dict3) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(stabilizer_fidelity(zero_state(2), dict), SizeMismatch);

  // >= 2^-n for arbitrary states; invariant under single-qubit Cliffords
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<cplx> v(2);
    for (auto& x : v) x = cplx(rng.gaussian(), rng.gaussian());
    PureState psi;
    psi.n = 1;
    psi.amps = std::move(v);
    psi.renormalize();
    double f = stabilizer_fidelity(psi, dict);
    CHECK(f >= 0.5 - 1e-12);
    for (const Matrix& g : {gates::H(), gates::S()}) {
      double fg = stabilizer_fidelity(apply_unitary(psi, g, {0}), dict);
      CHECK(fg == doctest::Approx(f).epsilon(1e-10));
    }
  }
}

TEST_CASE("complexity_fidelity_bound") {
  CHECK(complexity_fidelity_bound(8.0 * 5 * 1 + 1.0, 5, 1) == doctest::Approx(1.0));
  CHECK(complexity_fidelity_bound(46.0, 5, 1) == doctest::Approx(0.9975).epsilon(1e-12));
  CHECK(complexity_fidelity_bound(5.0, 5, 1) == doctest::Approx(1.0));

  // monotone decreasing in e in the non-vacuous regime
  double prev = 2.0;
  for (double e = 42.0; e <= 50.0; e += 1.0) {
    double v = complexity_fidelity_bound(e, 5, 1);
    CHECK(v < prev);
    CHECK(v < 1.0);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("plikely_fidelity_bound") {
  CHECK_THROWS_AS(plikely_fidelity_bound(10.0, 5, 1, 0.0), InvalidProbability);
  CHECK_THROWS_AS(plikely_fidelity_bound(10.0, 5, 1, 1.0), InvalidProbability);

  // ceiling boundary is vacuous
  const double ceiling = 12.0 * 10 * 1 / (1.0 - 0.5);
  CHECK(plikely_fidelity_bound(ceiling + 1.0, 10, 1, 0.5) == doctest::Approx(1.0));

  // p' -> 0 limit matches the generic Fannes form with ceiling 12wd
  const double e = 2.0 * 2 * 10 * 10 * 0.9 + 1.0;  // deep in the non-vacuous regime
  const double direct = fannes_fidelity_bound(e, 12.0 * 10 * 1, 2.0 * 10 * 10);
  CHECK(plikely_fidelity_bound(e, 10, 1, 1e-12) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("thresholded_witness_weight") {
  CHECK(thresholded_witness_weight(0.2, 0.5) == doctest::Approx(1.0));
  CHECK(thresholded_witness_weight(0.9, 0.5) == doctest::Approx(0.5));
  CHECK(thresholded_witness_weight(0.5, 0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(thresholded_witness_weight(0.5, 0.0), InvalidArgument);
  CHECK_THROWS_AS(thresholded_witness_weight(0.5, 1.0), InvalidArgument);
}

TEST_CASE("oracle wrappers") {
  auto sep = FidelityOracle::separable(Bipartition::keep(2, {0}));
  CHECK(sep(bell_state()) == doctest::Approx(0.5).epsilon(1e-12));

  auto stab = FidelityOracle::stabilizer(1);
  CHECK(stab(rotated_plus(M_PI / 4)) ==
        doctest::Approx((2.0 + std::sqrt(2.0)) / 4.0).epsilon(1e-12));

  // two Bell pairs across the {0,1}|{2,3} cut carry 2 bits of entanglement
  PureState two_pairs = zero_state(4);
  two_pairs = apply_unitary(two_pairs, gates::H(), {0});
  two_pairs = apply_unitary(two_pairs, gates::H(), {1});
  two_pairs = apply_unitary(two_pairs, gates::CX(), {0, 2});
  two_pairs = apply_unitary(two_pairs, gates::CX(), {1, 3});
  auto cut = Bipartition::keep(4, {0, 1});
  CHECK(entanglement_entropy(two_pairs, cut) == doctest::Approx(2.0).epsilon(1e-10));
  auto thr = FidelityOracle::entanglement_threshold(cut, 0.5, 2.0);
  CHECK(thr(two_pairs) == doctest::Approx(1.0 - 0.125 * 0.125).epsilon(1e-10));
}

#include "locq/ensemble.hpp"
#include "locq/geometry.hpp"
#include "locq/models.hpp"

TEST_CASE("entanglement entropy is non-increasing on average under local measurement") {
  // measuring one qubit outside L in any Pauli basis cannot raise the
  // outcome-averaged entropy across L | rest
  Rng rng(314);
  for (int rep = 0; rep < 20; ++rep) {
    PureState psi = haar_state(5, rng);
    auto lcut = Bipartition::keep(5, {0, 1});
    const double before = entanglement_entropy(psi, lcut);
    for (PauliBasis b : {PauliBasis::X, PauliBasis::Y, PauliBasis::Z}) {
      // measure qubit 4 in basis b and average over both outcomes
      auto meas_part = Bipartition::keep(5, {0, 1, 2, 3});
      double after = 0.0;
      for_each_projected(psi, meas_part, {b},
                         [&](double p, const std::vector<Label>&, const PureState& s) {
                           after += p * entanglement_entropy(s, Bipartition::keep(4, {0, 1}));
                         });
      CHECK(after <= before + 1e-9);
    }
  }
}

TEST_CASE("depth-d lattice circuits obey the 8wd projected-entanglement ceiling") {
  // toy 4x4 geometry: |L| = 2 makes the ceiling vacuous (E <= 2 < 8), so this
  // exercises the partition plumbing and the inequality itself
  Rng rng(271);
  auto geom = make_lattice_geometry({4, 4}, 1, 1);
  auto part = geometry_partition(geom);
  auto lr = geometry_lr_cut(geom);
  const double ceiling = 8.0 * geom.w * geom.d;
  for (int rep = 0; rep < 3; ++rep) {
    PureState phi = brickwork_state({4, 4}, geom.d, rng);
    double worst = 0.0;
    for_each_projected(phi, part, std::vector<PauliBasis>(12, PauliBasis::Z),
                       [&](double, const std::vector<Label>&, const PureState& s) {
                         worst = std::max(worst, entanglement_entropy(s, lr));
                       });
    CHECK(worst <= ceiling + 1e-9);
  }
}
