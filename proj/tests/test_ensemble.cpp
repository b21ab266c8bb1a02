#include <doctest.h>

#include <cmath>
#include <map>

#include "locq/ensemble.hpp"
#include "locq/states.hpp"

using namespace locq;

TEST_CASE("label round trips") {
  std::vector<Label> all = {Label::Zero, Label::One,    Label::Plus,
                            Label::Minus, Label::PlusI, Label::MinusI};
  CHECK(labels_to_string(all) == "01+-+i-i");
  CHECK(labels_from_string("01+-+i-i") == all);
  CHECK(labels_from_string("+i0-i") ==
        std::vector<Label>{Label::PlusI, Label::Zero, Label::MinusI});
  CHECK_THROWS_AS(labels_from_string("x"), InvalidArgument);
}

TEST_CASE("enumerate_ensemble fixed bases") {
  // Bell, B = {1}, Z basis
  auto ens = enumerate_ensemble(bell_state(), Bipartition::keep(2, {0}),
                                BasisAssignment::fixed_z(1));
  REQUIRE(ens.entries.size() == 2);
  double total = 0.0;
  for (const auto& e : ens.entries) {
    CHECK(e.p == doctest::Approx(0.5).epsilon(1e-12));
    total += e.p;
    std::size_t idx = e.labels[0] == Label::Zero ? 0 : 1;
    CHECK(std::abs(e.state.amps[idx]) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  // GHZ_3, B = {1,2}, Z: only "00" and "11" branches survive
  auto ghz = enumerate_ensemble(ghz_state(3), Bipartition::keep(3, {0}),
                                BasisAssignment::fixed_z(2));
  REQUIRE(ghz.entries.size() == 2);
  CHECK(labels_to_string(ghz.entries[0].labels) == "00");
  CHECK(labels_to_string(ghz.entries[1].labels) == "11");

  // |+>|+>, B = {1}, X basis: single "+" branch with projected |+>
  auto pp = enumerate_ensemble(tensor(plus_state(1), plus_state(1)),
                               Bipartition::keep(2, {0}),
                               BasisAssignment::fixed({PauliBasis::X}));
  REQUIRE(pp.entries.size() == 1);
  CHECK(pp.entries[0].p == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(labels_to_string(pp.entries[0].labels) == "+");
  CHECK(std::abs(pp.entries[0].state.amps[0] - cplx(1 / std::sqrt(2.0), 0)) < 1e-12);
}

TEST_CASE("sample_projected statistics") {
  Rng rng(101);
  auto part = Bipartition::keep(2, {0});

  // Bell fixed-Z outcome frequencies
  int zeros = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto s = sample_projected(bell_state(), part, BasisAssignment::Mode::FixedZ, rng);
    if (s.labels[0] == Label::Zero) ++zeros;
  }
  double freq = static_cast<double>(zeros) / draws;
  CHECK(std::abs(freq - 0.5) < 3 * std::sqrt(0.25 / draws));

  // product state: projected factor is always the A factor
  auto prod = tensor(rotated_plus(0.3), rotated_plus(1.1));
  for (int i = 0; i < 50; ++i) {
    auto s = sample_projected(prod, part, BasisAssignment::Mode::UniformRandomPauli, rng);
    CHECK(std::abs(std::abs(inner(s.projected, rotated_plus(0.3))) - 1.0) < 1e-10);
  }

  // GHZ_3 random mode: basis string ZZ on B drawn with frequency 1/9
  auto part3 = Bipartition::keep(3, {0});
  int zz = 0;
  for (int i = 0; i < draws; ++i) {
    auto s = sample_projected(ghz_state(3), part3,
                              BasisAssignment::Mode::UniformRandomPauli, rng);
    if (s.bases[0] == PauliBasis::Z && s.bases[1] == PauliBasis::Z) ++zz;
  }
  double fzz = static_cast<double>(zz) / draws;
  CHECK(std::abs(fzz - 1.0 / 9.0) < 3 * std::sqrt((1.0 / 9.0) * (8.0 / 9.0) / draws));
}

TEST_CASE("sample_projected on density states") {
  Rng rng(55);
  auto part = Bipartition::keep(2, {0});
  auto rho = DensityState::from_pure(bell_state());
  for (int i = 0; i < 20; ++i) {
    auto s = sample_projected(rho, part, BasisAssignment::Mode::FixedZ, rng);
    // projected state is |0><0| or |1><1|
    double p00 = s.projected.mat(0, 0).real();
    CHECK((std::abs(p00 - 1.0) < 1e-10 || std::abs(p00) < 1e-10));
  }
}

TEST_CASE("localizable quantumness") {
  // GHZ with fixed-Z separable oracle is exactly zero
  for (int n = 3; n <= 6; ++n) {
    auto part = Bipartition::keep(n, {0, 1});
    auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
    auto lq = localizable_quantumness(ghz_state(n), part, oracle,
                                      BasisAssignment::Mode::FixedZ);
    CHECK(lq.exact);
    CHECK(lq.estimate == 0.0);
  }

  // Bell pair on A = {0,1} with a spectator |0> in B: LQ = 1/2
  auto psi = tensor(bell_state(), zero_state(1));
  auto part = Bipartition::keep(3, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
  auto lq = localizable_quantumness(psi, part, oracle, BasisAssignment::Mode::FixedZ);
  CHECK(lq.estimate == doctest::Approx(0.5).epsilon(1e-12));

  // product state with a stabilizer factor on A has zero localizable magic
  auto prod = tensor(zero_state(1), rotated_plus(0.7));
  auto lm = localizable_quantumness(prod, Bipartition::keep(2, {0}),
                                    FidelityOracle::stabilizer(1),
                                    BasisAssignment::Mode::FixedZ);
  CHECK(lm.estimate <= 1e-12);
}

TEST_CASE("random-basis LQ reduces to fixed-Z under an all-Z assignment") {
  Rng rng(7);
  std::vector<cplx> a(16);
  for (auto& v : a) v = cplx(rng.gaussian(), rng.gaussian());
  PureState psi;
  psi.n = 4;
  psi.amps = std::move(a);
  psi.renormalize();

  auto part = Bipartition::keep(4, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
  double forced = lq_for_fixed_basis(psi, part, {PauliBasis::Z, PauliBasis::Z}, oracle);
  auto fixed = localizable_quantumness(psi, part, oracle, BasisAssignment::Mode::FixedZ);
  CHECK(forced == doctest::Approx(fixed.estimate).epsilon(1e-14));
}

TEST_CASE("Monte-Carlo LQ agrees with the exact value") {
  Rng rng(71);
  std::vector<cplx> a(16);
  for (auto& v : a) v = cplx(rng.gaussian(), rng.gaussian());
  PureState psi;
  psi.n = 4;
  psi.amps = std::move(a);
  psi.renormalize();

  auto part = Bipartition::keep(4, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));

  auto exact = localizable_quantumness(psi, part, oracle,
                                       BasisAssignment::Mode::UniformRandomPauli);
  CHECK(exact.exact);

  // force the Monte-Carlo path by sampling directly
  Rng mc(8);
  const long budget = 4000;
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < budget; ++i) {
    auto draw = sample_projected(psi, part, BasisAssignment::Mode::UniformRandomPauli, mc);
    double v = 1.0 - oracle(draw.projected);
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / budget;
  double se = std::sqrt(std::max(0.0, (sum2 - sum * sum / budget) / (budget - 1)) / budget);
  CHECK(std::abs(mean - exact.estimate) < 4 * std::max(se, 1e-6));
}

TEST_CASE("design_moment_distance") {
  // single-state ensemble, k = 1: ||(|0><0|) - I/2||_1 = 1
  ProjectedEnsemble single;
  single.part = Bipartition::keep(2, {0});
  single.mode = ProjectedEnsemble::Mode::Exact;
  single.entries.push_back({1.0, {Label::Zero}, zero_state(1)});
  CHECK(design_moment_distance(single, 1) == doctest::Approx(1.0).epsilon(1e-10));

  // the six single-qubit stabilizer states form a 2-design
  ProjectedEnsemble six;
  six.part = Bipartition::keep(2, {0});
  six.mode = ProjectedEnsemble::Mode::Exact;
  for (Label l : {Label::Zero, Label::One, Label::Plus, Label::Minus, Label::PlusI,
                  Label::MinusI}) {
    auto amp = label_amplitudes(l);
    six.entries.push_back(
        {1.0 / 6.0, {l}, PureState::from_amplitudes(1, {amp[0], amp[1]})});
  }
  CHECK(design_moment_distance(six, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(design_moment_distance(six, 2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Haar mean purity of 2-qubit marginals") {
  Rng rng(2024);
  const int draws = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    std::vector<cplx> a(4);
    for (auto& v : a) v = cplx(rng.gaussian(), rng.gaussian());
    PureState psi;
    psi.n = 2;
    psi.amps = std::move(a);
    psi.renormalize();
    double p = reduced_purity(psi, {0});
    sum += p;
    sum2 += p * p;
  }
  double mean = sum / draws;
  double se = std::sqrt(std::max(0.0, (sum2 - sum * sum / draws) / (draws - 1)) / draws);
  CHECK(std::abs(mean - 0.8) < 4 * se);  // (d_A + d_B) / (d_A d_B + 1) = 4/5
}

TEST_CASE("localizable quantumness stays within the unit interval") {
  Rng rng(1618);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<cplx> a(16);
    for (auto& v : a) v = cplx(rng.gaussian(), rng.gaussian());
    PureState psi;
    psi.n = 4;
    psi.amps = std::move(a);
    psi.renormalize();
    auto part = Bipartition::keep(4, {0, 1});
    for (int kind = 0; kind < 2; ++kind) {
      auto oracle = kind == 0 ? FidelityOracle::separable(Bipartition::keep(2, {0}))
                              : FidelityOracle::stabilizer(2);
      auto lq = localizable_quantumness(psi, part, oracle, BasisAssignment::Mode::FixedZ);
      CHECK(lq.estimate >= 0.0);
      CHECK(lq.estimate <= 1.0);
      auto lqr = localizable_quantumness(psi, part, oracle,
                                         BasisAssignment::Mode::UniformRandomPauli);
      CHECK(lqr.estimate >= 0.0);
      CHECK(lqr.estimate <= 1.0);
    }
  }
}
