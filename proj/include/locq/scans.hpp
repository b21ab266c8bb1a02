// scans.hpp
// Parameter-scan drivers: localizable magic over the injection angle and
// system size, and localizable entanglement across Hamiltonian ground-state
// families.

#pragma once

#include <string>
#include <vector>

#include "locq/hamiltonians.hpp"
#include "locq/protocol.hpp"

namespace locq {

// --- magic scan -------------------------------------------------------------

struct MagicScanRow {
  int n = 0;
  double alpha = 0.0;
  long clifford_index = 0;
  double lm = 0.0;  // exact localizable magic by enumeration
};

struct MagicScanPoint {
  int n = 0;
  double alpha = 0.0;
  int n_a = 0;
  long cliffords = 0;
  double mean_lm = 0.0;
  double std_error = 0.0;
};

struct MagicScanResult {
  std::vector<MagicScanRow> rows;
  std::vector<MagicScanPoint> points;
};

// LM for magic-injection states, averaged over `cliffords` random Clifford
// draws per (n, alpha). Clifford seeds depend on (n, index) only, so the
// same scrambler is reused across angles.
inline MagicScanResult magic_scan(const std::vector<int>& n_list,
                                  const std::vector<double>& alphas, int n_a,
                                  long cliffords, std::uint64_t master_seed) {
  MagicScanResult out;
  auto oracle = FidelityOracle::stabilizer(n_a);
  for (int n : n_list) {
    std::vector<Bipartition> part{Bipartition::keep(n, [&] {
      std::vector<int> a(n_a);
      std::iota(a.begin(), a.end(), 0);
      return a;
    }())};
    for (double alpha : alphas) {
      double sum = 0.0, sum2 = 0.0;
      for (long c = 0; c < cliffords; ++c) {
        Rng rng = Rng::substream(master_seed,
                                 (static_cast<std::uint64_t>(n) << 32) |
                                     static_cast<std::uint64_t>(c));
        PureState psi = magic_injection_state(n, alpha, rng);
        auto lq = localizable_quantumness(psi, part[0], oracle,
                                          BasisAssignment::Mode::FixedZ);
        out.rows.push_back({n, alpha, c, lq.estimate});
        sum += lq.estimate;
        sum2 += lq.estimate * lq.estimate;
      }
      MagicScanPoint pt;
      pt.n = n;
      pt.alpha = alpha;
      pt.n_a = n_a;
      pt.cliffords = cliffords;
      pt.mean_lm = sum / static_cast<double>(cliffords);
      if (cliffords > 1) {
        double var = std::max(
            0.0, (sum2 - sum * sum / static_cast<double>(cliffords)) /
                     static_cast<double>(cliffords - 1));
        pt.std_error = std::sqrt(var / static_cast<double>(cliffords));
      }
      out.points.push_back(pt);
    }
  }
  return out;
}

// --- Hamiltonian scan ----------------------------------------------------------

struct HamScanRow {
  double parameter = 0.0;
  double le = 0.0;
  double std_error = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  int member = 0;      // ground-space member index (0 when unique)
  int degeneracy = 1;
};

// Random-basis localizable entanglement of the (0,1) pair, estimated from
// `samples` projected draws per state. Degenerate points report one row per
// ground-space member; at the Majumdar-Ghosh point the two members are the
// extreme dimer combinations recovered from the degenerate span.
inline std::vector<HamScanRow> hamiltonian_scan(const std::string& model, int n,
                                                const std::vector<double>& grid,
                                                long samples,
                                                std::uint64_t master_seed) {
  if (model != "xxz" && model != "j1j2")
    throw InvalidArgument("model must be 'xxz' or 'j1j2'");
  std::vector<HamScanRow> out;
  auto oracle = FidelityOracle::separable(Bipartition::keep(2, {0}));
  auto part = Bipartition::keep(n, {0, 1});

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double param = grid[gi];
    GroundSpace space = model == "xxz" ? solve_xxz_ground(n, param)
                                       : solve_j1j2_ground(n, param);

    std::vector<PureState> members;
    if (space.degenerate()) {
      // dimerized combinations, when the span contains adjacent-pair
      // singlet factors
      auto d1 = singlet_factor_state(space, 0, 1);
      auto d2 = singlet_factor_state(space, 1, 2);
      if (d1 && d2 && space.basis.size() == 2) {
        members.push_back(*d1);
        members.push_back(*d2);
      } else {
        members = space.basis;
      }
    } else {
      members = space.basis;
    }

    for (std::size_t m = 0; m < members.size(); ++m) {
      // common random numbers across grid points: neighbouring parameters
      // see the same basis draws, so scan comparisons are not noise-limited
      Rng rng = Rng::substream(master_seed, m);
      double sum = 0.0, sum2 = 0.0;
      for (long s = 0; s < samples; ++s) {
        auto draw = sample_projected(members[m], part,
                                     BasisAssignment::Mode::UniformRandomPauli, rng);
        const double v = 1.0 - oracle(draw.projected);
        sum += v;
        sum2 += v * v;
      }
      HamScanRow row;
      row.parameter = param;
      row.le = sum / static_cast<double>(samples);
      if (samples > 1) {
        double var = std::max(0.0, (sum2 - sum * sum / static_cast<double>(samples)) /
                                       static_cast<double>(samples - 1));
        row.std_error = std::sqrt(var / static_cast<double>(samples));
      }
      row.n = n;
      row.seed = master_seed;
      row.member = static_cast<int>(m);
      row.degeneracy = static_cast<int>(members.size());
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace locq
