#include <doctest.h>

#include <cmath>

#include "locq/protocol.hpp"
#include "locq/spectral.hpp"

using namespace locq;

namespace {

PureState bell_with_spectator() { return tensor(bell_state(), zero_state(1)); }

ProtocolSettings settings_with_seed(std::uint64_t seed) {
  ProtocolSettings s;
  s.delta = 0.05;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("protocol1 accepts the target and rejects separable inputs") {
  auto psi = bell_with_spectator();
  auto part = Bipartition::keep(3, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));

  int accepts = 0, rejects = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    auto rep_t = run_protocol1(RhoModel::pure(psi), psi, part, oracle,
                               settings_with_seed(1000 + r));
    if (rep_t.accept) ++accepts;
    CHECK(rep_t.eta_star == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
    CHECK(rep_t.total_trials >= rep_t.formula_trials);

    auto product = tensor(tensor(zero_state(1), zero_state(1)), zero_state(1));
    auto rep_f = run_protocol1(RhoModel::pure(product), psi, part, oracle,
                               settings_with_seed(2000 + r));
    if (!rep_f.accept) ++rejects;
  }
  CHECK(accepts >= runs - 1);
  CHECK(rejects >= runs - 1);
}

TEST_CASE("protocol1 accepts depolarized targets within the robustness budget") {
  auto psi = bell_with_spectator();
  auto part = Bipartition::keep(3, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));

  // LQ = 1/2; trace distance of depolarizing is p (1 - 2^-n) <= LQ/6
  const double p = 0.09;
  int accepts = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    auto rep = run_protocol1(RhoModel::depolarized(psi, p), psi, part, oracle,
                             settings_with_seed(3000 + r));
    if (rep.accept) ++accepts;
  }
  CHECK(accepts >= runs - 1);
}

TEST_CASE("protocol1 is deterministic across worker counts") {
  auto psi = bell_with_spectator();
  auto part = Bipartition::keep(3, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));

  auto s1 = settings_with_seed(42);
  s1.keep_trials = true;
  s1.sample_override = 4000;
  auto a = run_protocol1(RhoModel::pure(psi), psi, part, oracle, s1);
  auto s3 = s1;
  s3.workers = 3;
  auto b = run_protocol1(RhoModel::pure(psi), psi, part, oracle, s3);

  CHECK(a.omega == b.omega);
  CHECK(a.accept == b.accept);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].b_labels == b.trials[i].b_labels);
    CHECK(a.trials[i].a_labels == b.trials[i].a_labels);
    CHECK(a.trials[i].omega == b.trials[i].omega);
  }
}

TEST_CASE("trial records recompute bit-exactly") {
  auto psi = bell_with_spectator();
  auto part = Bipartition::keep(3, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));

  auto s = settings_with_seed(7);
  s.keep_trials = true;
  s.sample_override = 500;
  auto rep = run_protocol1(RhoModel::pure(psi), psi, part, oracle, s);
  for (const auto& rec : rep.trials) {
    if (rec.dead_branch) continue;
    auto b_labels = labels_from_string(rec.b_labels);
    std::vector<PauliBasis> bases;
    std::size_t z = 0;
    for (Label l : b_labels) {
      bases.push_back(basis_of(l));
      z = (z << 1) | static_cast<std::size_t>(bit_of_label(l));
    }
    auto rotated = detail::rotate_b_to_computational(psi, part, bases);
    auto [pp, target] = projected_state(rotated, part, z);
    (void)pp;
    double omega = shadow_fidelity_estimate(target, labels_from_string(rec.a_labels));
    CHECK(omega == rec.omega);
    CHECK(-oracle(target) == rec.offset);
  }
}

TEST_CASE("protocol1 throws ZeroGap for GHZ under fixed-Z separable certification") {
  auto ghz = ghz_state(4);
  auto part = Bipartition::keep(4, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
  CHECK_THROWS_AS(
      run_protocol1(RhoModel::pure(ghz), ghz, part, oracle, settings_with_seed(1)),
      ZeroGap);
}

TEST_CASE("fully inseparable certification on the 1D cluster state") {
  auto psi = cluster_state_1d(6);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < 6; ++i) pairs.emplace_back(i, i + 1);

  int accepts = 0;
  const int runs = 5;
  for (int r = 0; r < runs; ++r) {
    auto rep = run_fully_inseparable(RhoModel::pure(psi), psi, pairs, 0.05, 0, 500 + r);
    if (rep.accept) ++accepts;
    CHECK(rep.delta_per_pair == doctest::Approx(0.01));
    for (const auto& pr : rep.pairs) CHECK(pr.le.value > 0.0);
  }
  CHECK(accepts == runs);

  // product of 3-qubit clusters across {0,1,2} | {3,4,5}: pair (2,3) rejects
  auto product = tensor(cluster_state_1d(3), cluster_state_1d(3));
  int boundary_rejects = 0;
  for (int r = 0; r < runs; ++r) {
    auto rep =
        run_fully_inseparable(RhoModel::pure(product), psi, pairs, 0.05, 0, 900 + r);
    CHECK(!rep.accept);
    for (const auto& pr : rep.pairs)
      if (pr.qa == 2 && pr.qb == 3 && !pr.accept) ++boundary_rejects;
  }
  CHECK(boundary_rejects == runs);
}

TEST_CASE("fully inseparable estimates equal offline filtering of the dataset") {
  auto psi = cluster_state_1d(4);
  std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 2}, {2, 3}};
  auto rep = run_fully_inseparable(RhoModel::pure(psi), psi, pairs, 0.1, 0, 77, 1, true);
  REQUIRE(!rep.trials.empty());

  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto [qa, qb] = pairs[pi];
    auto part = Bipartition::keep(4, {qa, qb});
    std::vector<double> values(rep.trials.size(), 0.0);
    for (std::size_t i = 0; i < rep.trials.size(); ++i) {
      auto full = labels_from_string(rep.trials[i].b_labels);
      std::vector<Label> r_labels, pair_labels(2);
      for (int q = 0; q < 4; ++q) {
        if (q == qa)
          pair_labels[0] = full[q];
        else if (q == qb)
          pair_labels[1] = full[q];
        else
          r_labels.push_back(full[q]);
      }
      std::vector<PauliBasis> bases;
      std::size_t z = 0;
      for (Label l : r_labels) {
        bases.push_back(basis_of(l));
        z = (z << 1) | static_cast<std::size_t>(bit_of_label(l));
      }
      auto rotated = detail::rotate_b_to_computational(psi, part, bases);
      try {
        auto [pp, target] = projected_state(rotated, part, z);
        (void)pp;
        values[i] = shadow_fidelity_estimate(target, pair_labels) -
                    separable_fidelity(target, Bipartition::keep(2, {0}));
      } catch (const ZeroProbabilityOutcome&) {
        values[i] = 0.0;
      }
    }
    double omega = median_of_means(values, rep.mom);
    CHECK(omega == rep.pairs[pi].omega);
  }
}

TEST_CASE("two-qubit fully-inseparable run reduces to the random-basis protocol") {
  auto psi = bell_state();
  auto rep = run_fully_inseparable(RhoModel::pure(psi), psi, {{0, 1}}, 0.05, 0, 11);
  CHECK(rep.pairs.size() == 1);
  CHECK(rep.pairs[0].le.value > 0.4);  // random-basis LE of the Bell pair
  CHECK(rep.accept);
}

TEST_CASE("fidelity certification accepts the target and rejects orthogonal states") {
  Rng rng(2028);
  PureState psi = haar_state(4, rng);
  auto obs = build_observable(psi, 1, BasesMode::All);
  const double gap = spectral_gap(obs, psi);
  REQUIRE(gap > 0.0);

  // orthogonalized companion state
  PureState phi = haar_state(4, rng);
  cplx ov = inner(psi, phi);
  for (std::size_t i = 0; i < phi.dim(); ++i) phi.amps[i] -= ov * psi.amps[i];
  phi.renormalize();

  int accepts = 0, rejects = 0;
  const int runs = 10;
  for (int r = 0; r < runs; ++r) {
    auto s = settings_with_seed(4000 + r);
    auto rep_t = run_fidelity_cert(RhoModel::pure(psi), psi, 1, gap, 0.5, 0.25, s);
    if (rep_t.accept) ++accepts;
    CHECK(rep_t.eta_star == doctest::Approx(1.0 - 0.75 * gap * 0.5).epsilon(1e-12));

    auto s2 = settings_with_seed(5000 + r);
    auto rep_f = run_fidelity_cert(RhoModel::pure(phi), psi, 1, gap, 0.5, 0.25, s2);
    if (!rep_f.accept) ++rejects;
  }
  CHECK(accepts == runs);
  CHECK(rejects == runs);

  CHECK_THROWS_AS(run_fidelity_cert(RhoModel::pure(psi), psi, 1, 0.0, 0.5, 0.25,
                                    settings_with_seed(1)),
                  ZeroGap);
}

TEST_CASE("threshold witness evaluation") {
  // all projected fidelity bounds <= t: weight 1 everywhere, value 1 on target
  auto psi = tensor(bell_state(), zero_state(1));
  auto part = Bipartition::keep(3, {0, 1});
  auto low_bound = FidelityOracle::explicit_bound(
      [](const PureState&) { return 0.2; }, "const-low");
  CHECK(evaluate_threshold_witness(psi, psi, part, 0.5, low_bound) ==
        doctest::Approx(1.0).epsilon(1e-12));

  auto high_bound = FidelityOracle::explicit_bound(
      [](const PureState&) { return 0.9; }, "const-high");
  CHECK(evaluate_threshold_witness(psi, psi, part, 0.5, high_bound) ==
        doctest::Approx(0.5).epsilon(1e-12));

  // arbitrary rho stays within [0, 1]
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    PureState sigma = haar_state(3, rng);
    double v = evaluate_threshold_witness(sigma, psi, part, 0.5, low_bound);
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("thresholded witness soundness bound on verified free samples") {
  // target: deep 1D brickwork state; free states: depth-1 circuits
  const int n = 8;
  auto geom = make_lattice_geometry({n}, 2, 1);
  auto part = geometry_partition(geom);
  auto lr = geometry_lr_cut(geom);
  const double l_size = static_cast<double>(geom.L.size());

  Rng rng(6060);
  PureState target = brickwork_state({n}, 12, rng);

  const double t = 0.6, p_prime = 0.5;
  const double ceiling = 0.4 / (1.0 - p_prime);
  auto bound = FidelityOracle::explicit_bound(
      [lr, ceiling, l_size](const PureState& s) {
        return fannes_fidelity_bound(entanglement_entropy(s, lr), ceiling, l_size);
      },
      "toy-threshold");

  const double soundness_cap = t + (1.0 - p_prime) * (1.0 - t);
  int verified = 0;
  for (int rep = 0; rep < 10; ++rep) {
    PureState free_state = brickwork_state({n}, 1, rng);
    // verify the premise: most projected branches sit below the ceiling
    double p_low = 0.0;
    for_each_projected(free_state, part,
                       std::vector<PauliBasis>(part.B.size(), PauliBasis::Z),
                       [&](double p, const std::vector<Label>&, const PureState& s) {
                         if (entanglement_entropy(s, lr) <= ceiling) p_low += p;
                       });
    if (p_low < p_prime) continue;
    ++verified;
    double v = evaluate_threshold_witness(free_state, target, part, t, bound);
    CHECK(v <= soundness_cap + 1e-9);
  }
  CHECK(verified >= 5);
}

TEST_CASE("complexity certification at toy geometry") {
  Rng rng(99);
  auto geom = make_lattice_geometry({4, 4}, 1, 1);
  PureState target = brickwork_state({4, 4}, 6, rng);

  ComplexityCertConfig cfg;
  cfg.geometry = geom;
  cfg.variant = ComplexityCertConfig::Variant::Unitary;
  cfg.allow_toy = true;
  cfg.toy_free_ceiling = 0.4;
  cfg.c = 0.5;

  ProtocolSettings s = settings_with_seed(31);
  s.sample_override = 2000;

  auto rep = run_complexity_cert(RhoModel::pure(target), target, cfg, s);
  CHECK(rep.unsound_toy);
  CHECK(rep.gap.value > 0.0);
  CHECK(rep.total_trials <= 2000);
  CHECK(rep.formula_trials > 0);
  CHECK(rep.extras.count("p_high_entanglement") == 1);

  // refusing toy geometry without the flag
  ComplexityCertConfig strict = cfg;
  strict.allow_toy = false;
  CHECK_THROWS_AS(run_complexity_cert(RhoModel::pure(target), target, strict, s),
                  GeometryInvalid);

  // measurement-assisted variant produces a report as well; at |L| = 2 the
  // Fannes bound only bites near maximal entanglement, so the toy witness
  // puts t high and p' near 1
  ComplexityCertConfig ma = cfg;
  ma.variant = ComplexityCertConfig::Variant::MeasurementAssisted;
  ma.toy_free_ceiling = 0.02;
  ma.t = 0.98;
  ma.p_prime = 0.995;
  auto rep_ma = run_complexity_cert(RhoModel::pure(target), target, ma, s);
  CHECK(rep_ma.unsound_toy);
  CHECK(rep_ma.gap.value > 0.0);
  CHECK(rep_ma.extras.count("witness_soundness_value") == 1);
}

TEST_CASE("analytic depolarized eta matches the exact density computation") {
  Rng rng(404);
  auto psi = magic_injection_state(6, M_PI / 6, rng);
  auto part = Bipartition::keep(6, {0, 1, 2});
  auto oracle = FidelityOracle::stabilizer(3);

  auto formula = analytic_eta_depolarized(psi, part, oracle);
  CHECK(formula.eta(0.0) == doctest::Approx(formula.lq).epsilon(1e-12));

  for (double p : {0.0, 0.3, 0.7, 1.0}) {
    auto rho = depolarize(psi, p);
    double exact = exact_conditional_fidelity(rho, psi, part, oracle,
                                              BasisAssignment::Mode::FixedZ);
    CHECK(formula.eta(p) == doctest::Approx(exact).epsilon(1e-9));
  }

  const double pstar = formula.crossover();
  CHECK(formula.eta(pstar) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(pstar > 0.0);
  CHECK(pstar < 1.0);
}

TEST_CASE("round sampling reproduces the exact joint outcome distribution") {
  // fixed bases on a fixed 3-qubit state: empirical joint frequencies of
  // (B outcome, A outcome) match the Born probabilities
  Rng prep(12121);
  PureState psi = haar_state(3, prep);
  auto part = Bipartition::keep(3, {0});
  const std::vector<PauliBasis> b_bases = {PauliBasis::X, PauliBasis::Y};
  const std::vector<PauliBasis> a_bases = {PauliBasis::Z};

  // exact joint distribution over (z on B, x on A)
  std::map<std::string, double> exact;
  for_each_projected(psi, part, b_bases,
                     [&](double p, const std::vector<Label>& ls, const PureState& s) {
                       for (int bit = 0; bit < 2; ++bit) {
                         Label al = label_for(PauliBasis::Z, bit);
                         auto amp = label_amplitudes(al);
                         PureState eig = PureState::from_amplitudes(1, {amp[0], amp[1]});
                         exact[labels_to_string(ls) + "|" + label_token(al)] =
                             p * state_fidelity(eig, s);
                       }
                     });

  RhoModel rho = RhoModel::pure(psi);
  std::map<std::string, long> counts;
  const long draws = 200000;
  std::vector<Label> b_out(2), a_out(1);
  std::vector<cplx> scratch;
  Rng rng(888);
  for (long i = 0; i < draws; ++i) {
    rho.sample_round_into(part, b_bases.data(), a_bases.data(), rng, b_out.data(),
                          a_out.data(), scratch);
    counts[labels_to_string(b_out) + "|" + label_token(a_out[0])]++;
  }
  for (const auto& [key, p] : exact) {
    const double freq = static_cast<double>(counts[key]) / draws;
    const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / draws);
    CHECK(std::abs(freq - p) < 5 * se + 1e-4);
  }
}

TEST_CASE("random-basis trial values are unbiased for the exact conditional fidelity") {
  Rng prep(31415);
  PureState psi = haar_state(4, prep);
  auto part = Bipartition::keep(4, {0, 1});
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
  PureState rho_state = apply_unitary(psi, gates::RZ(0.5), {2});

  const double exact = exact_conditional_fidelity(
      rho_state, psi, part, oracle, BasisAssignment::Mode::UniformRandomPauli);

  BranchEval eval = [&oracle](const PureState& t) {
    return std::pair<double, double>{1.0, -oracle(t)};
  };
  auto batch = run_witness_trials(RhoModel::pure(rho_state), psi, part,
                                  BasisAssignment::Mode::UniformRandomPauli, eval,
                                  200000, 2718, 1, false);
  double sum = 0.0, sum2 = 0.0;
  for (double v : batch.values) {
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / batch.values.size();
  const double var = (sum2 - sum * sum / batch.values.size()) / (batch.values.size() - 1);
  const double se = std::sqrt(var / batch.values.size());
  CHECK(std::abs(mean - exact) < 4 * se);
}

TEST_CASE("fully inseparable identifies the zero-entanglement pair") {
  // product target: the pair straddling the cut has zero localizable
  // entanglement and is reported by index
  auto psi = tensor(bell_state(), bell_state());
  std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 2}, {2, 3}};
  try {
    run_fully_inseparable(RhoModel::pure(psi), psi, pairs, 0.05, 0, 1);
    CHECK(false);
  } catch (const ZeroGap& e) {
    CHECK(e.pair_index == 1);
  }
}
