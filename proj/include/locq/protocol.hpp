// protocol.hpp
// End-to-end certification engines. A trial measures B (fixed-Z or random
// Pauli), then A in a random Pauli basis; per-trial witness values combine a
// single-copy shadow estimate with branch weights/offsets computed from the
// target's projections. Median-of-means aggregation and a threshold decision
// close the loop. Every trial derives its random stream from
// (master seed, trial index), so runs are reproducible at any worker count.

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "locq/estimator.hpp"
#include "locq/freeset.hpp"
#include "locq/geometry.hpp"
#include "locq/models.hpp"

namespace locq {

// --- experimental-state model ------------------------------------------------

class RhoModel {
 public:
  static RhoModel pure(PureState s) {
    RhoModel m;
    m.kind_ = Kind::Pure;
    m.pure_ = std::move(s);
    return m;
  }
  static RhoModel density(DensityState s) {
    if (s.n > 10) throw UnsupportedSize("density inputs cap at 10 qubits");
    RhoModel m;
    m.kind_ = Kind::Density;
    m.density_ = std::move(s);
    return m;
  }
  // exact branch mixture for global depolarizing noise at any size
  static RhoModel depolarized(PureState psi, double p) {
    RhoModel m;
    m.kind_ = Kind::Mixture;
    m.mixture_ = depolarize_mixture(std::move(psi), p);
    return m;
  }

  int n() const {
    switch (kind_) {
      case Kind::Pure: return pure_.n;
      case Kind::Density: return density_.n;
      default: return mixture_.psi.n;
    }
  }

  bool is_density() const { return kind_ == Kind::Density; }
  const DensityState& density_state() const { return density_; }
  const PureState& pure_state() const { return pure_; }

  // One experimental round: measure B in `bases`, then A in `a_bases`.
  // Returns (labels on B, labels on A).
  std::pair<std::vector<Label>, std::vector<Label>> sample_round(
      const Bipartition& part, const std::vector<PauliBasis>& b_bases,
      const std::vector<PauliBasis>& a_bases, Rng& rng) const {
    std::vector<Label> b_labels(part.B.size()), a_labels(part.A.size());
    std::vector<cplx> scratch;
    sample_round_into(part, b_bases.data(), a_bases.data(), rng, b_labels.data(),
                      a_labels.data(), scratch);
    return {std::move(b_labels), std::move(a_labels)};
  }

  // Allocation-free variant for hot loops; `scratch` is reused across calls.
  void sample_round_into(const Bipartition& part, const PauliBasis* b_bases,
                         const PauliBasis* a_bases, Rng& rng, Label* b_out,
                         Label* a_out, std::vector<cplx>& scratch) const {
    if (kind_ == Kind::Density) {
      DensityState work = density_;
      auto b_labels = measure_density(work, part.B, b_bases, rng);
      auto a_labels = measure_density(work, part.A, a_bases, rng);
      std::copy(b_labels.begin(), b_labels.end(), b_out);
      std::copy(a_labels.begin(), a_labels.end(), a_out);
      return;
    }
    if (kind_ == Kind::Mixture) {
      PureState branch = mixture_.sample_branch(rng);
      measure_all_compact(branch, part, b_bases, a_bases, rng, b_out, a_out, scratch);
    } else {
      measure_all_compact(pure_, part, b_bases, a_bases, rng, b_out, a_out, scratch);
    }
  }

  // Measures every qubit (B first, then A), compacting the statevector by a
  // factor of two after each read; the post-measurement state is discarded,
  // so the whole round costs O(2^n) instead of O(n 2^n).
  static void measure_all_compact(const PureState& state, const Bipartition& part,
                                  const PauliBasis* b_bases, const PauliBasis* a_bases,
                                  Rng& rng, Label* b_out, Label* a_out,
                                  std::vector<cplx>& scratch) {
    const int n = state.n;
    scratch.resize(state.dim());
    std::copy(state.amps.begin(), state.amps.end(), scratch.begin());
    cplx* w = scratch.data();
    std::size_t dim = state.dim();

    std::uint32_t remaining = (n >= 32) ? ~0u : ((1u << n) - 1u);
    cplx m[4];
    auto measure_one = [&](int q, PauliBasis basis) -> int {
      // stride of q in the compacted space: one doubling per remaining
      // qubit with a larger index (big-endian order)
      int r = 0;
      for (int k = q + 1; k < n; ++k)
        if (remaining & (1u << k)) ++r;
      const std::size_t stride = std::size_t{1} << r;

      detail::basis_rotation(basis, m);
      double p0 = 0.0, p1 = 0.0;
      for (std::size_t base = 0; base < dim; base += 2 * stride)
        for (std::size_t off = 0; off < stride; ++off) {
          const cplx a0 = w[base + off];
          const cplx a1 = w[base + off + stride];
          const cplx v0 = m[0] * a0 + m[1] * a1;
          const cplx v1 = m[2] * a0 + m[3] * a1;
          w[base + off] = v0;
          w[base + off + stride] = v1;
          p0 += std::norm(v0);
          p1 += std::norm(v1);
        }
      const int bit = rng.uniform() < p1 / (p0 + p1) ? 1 : 0;
      // forward gather of the surviving half
      const std::size_t half = dim / 2;
      const std::size_t keep = bit ? stride : 0;
      for (std::size_t i = 0; i < half; ++i) {
        const std::size_t high = i >> r;
        const std::size_t low = i & (stride - 1);
        w[i] = w[(high << (r + 1)) | keep | low];
      }
      dim = half;
      remaining &= ~(1u << q);
      return bit;
    };

    for (std::size_t j = 0; j < part.B.size(); ++j)
      b_out[j] = label_for(b_bases[j], measure_one(part.B[j], b_bases[j]));
    for (std::size_t j = 0; j < part.A.size(); ++j)
      a_out[j] = label_for(a_bases[j], measure_one(part.A[j], a_bases[j]));
  }

 private:
  enum class Kind { Pure, Density, Mixture };
  Kind kind_ = Kind::Pure;
  PureState pure_;
  DensityState density_;
  DepolarizedMixture mixture_;

  static std::vector<Label> measure_density(DensityState& work,
                                            const std::vector<int>& qubits,
                                            const PauliBasis* bases, Rng& rng) {
    std::vector<Label> labels(qubits.size());
    const auto d = static_cast<Eigen::Index>(work.dim());
    cplx m[4];
    for (std::size_t j = 0; j < qubits.size(); ++j) {
      const int q = qubits[j];
      detail::basis_rotation(bases[j], m);
      const std::size_t stride = dim_of(work.n - 1 - q);
      for (Eigen::Index col = 0; col < d; ++col)
        for (std::size_t base = 0; base < work.dim(); base += 2 * stride)
          for (std::size_t off = 0; off < stride; ++off) {
            cplx a0 = work.mat(static_cast<Eigen::Index>(base + off), col);
            cplx a1 = work.mat(static_cast<Eigen::Index>(base + off + stride), col);
            work.mat(static_cast<Eigen::Index>(base + off), col) = m[0] * a0 + m[1] * a1;
            work.mat(static_cast<Eigen::Index>(base + off + stride), col) =
                m[2] * a0 + m[3] * a1;
          }
      for (Eigen::Index row = 0; row < d; ++row)
        for (std::size_t base = 0; base < work.dim(); base += 2 * stride)
          for (std::size_t off = 0; off < stride; ++off) {
            cplx a0 = work.mat(row, static_cast<Eigen::Index>(base + off));
            cplx a1 = work.mat(row, static_cast<Eigen::Index>(base + off + stride));
            work.mat(row, static_cast<Eigen::Index>(base + off)) =
                a0 * std::conj(m[0]) + a1 * std::conj(m[1]);
            work.mat(row, static_cast<Eigen::Index>(base + off + stride)) =
                a0 * std::conj(m[2]) + a1 * std::conj(m[3]);
          }
      double p1 = 0.0;
      for (std::size_t base = 0; base < work.dim(); base += 2 * stride)
        for (std::size_t off = 0; off < stride; ++off)
          p1 += work.mat(static_cast<Eigen::Index>(base + off + stride),
                         static_cast<Eigen::Index>(base + off + stride))
                    .real();
      const int bit = rng.uniform() < p1 ? 1 : 0;
      const double p = std::max(bit ? p1 : 1.0 - p1, 1e-300);
      for (std::size_t r = 0; r < work.dim(); ++r)
        for (std::size_t c = 0; c < work.dim(); ++c) {
          const bool rk = ((r / stride) % 2 == static_cast<std::size_t>(bit));
          const bool ck = ((c / stride) % 2 == static_cast<std::size_t>(bit));
          if (!rk || !ck)
            work.mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
        }
      work.mat /= p;
      labels[j] = label_for(bases[j], bit);
    }
    return labels;
  }
};

// --- trial records and reports --------------------------------------------------

struct TrialRecord {
  long index = 0;
  std::string b_labels;  // outcome labels on B (basis recoverable per label)
  std::string a_labels;  // shadow outcomes on A
  double omega = 0.0;    // weighted shadow value, before the offset
  double offset = 0.0;   // subtracted branch constant (0 on dead branches)
  bool dead_branch = false;

  double value() const { return omega + offset; }
};

struct GapInfo {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = true;
  long samples = 0;
};

struct CertificationReport {
  bool accept = false;
  double omega = 0.0;
  double eta_star = 0.0;
  long total_trials = 0;
  MoMParameters mom;
  long formula_trials = 0;   // ceil of the closed-form sample-size expression
  GapInfo gap;
  double variance_used = 0.0;
  std::string variance_mode = "worst-case";
  std::uint64_t seed = 0;
  std::string config_digest;
  double wall_ms = 0.0;
  bool unsound_toy = false;
  long dead_branches = 0;
  std::map<std::string, double> extras;
  std::vector<TrialRecord> trials;
};

// --- branch tables ---------------------------------------------------------------

// Per-branch data for the witness: target projection plus (weight, offset).
struct BranchInfo {
  bool alive = false;
  PureState target;
  double weight = 1.0;
  double offset = 0.0;
};

using BranchEval = std::function<std::pair<double, double>(const PureState&)>;

namespace detail {

inline BranchInfo make_branch(const PureState& psi_rotated, const Bipartition& part,
                              std::size_t zbits, const BranchEval& eval) {
  BranchInfo info;
  try {
    auto [p, proj] = projected_state(psi_rotated, part, zbits);
    (void)p;
    info.alive = true;
    info.target = std::move(proj);
    auto [w, off] = eval(info.target);
    info.weight = w;
    info.offset = off;
  } catch (const ZeroProbabilityOutcome&) {
    info.alive = false;
  }
  return info;
}

// Mixed-radix code of a label string (B list order).
inline std::size_t label_code(const std::vector<Label>& labels) {
  std::size_t code = 0;
  for (Label l : labels) code = code * 6 + static_cast<std::size_t>(l);
  return code;
}

// Table of branch data for all basis/outcome combinations; fixed-Z tables
// index by outcome bits, random tables by the 6^{|B|} label code.
class BranchTable {
 public:
  BranchTable(const PureState& psi, const Bipartition& part,
              BasisAssignment::Mode mode, BranchEval eval)
      : psi_(psi), part_(part), mode_(mode), eval_(std::move(eval)) {
    const int n_b = static_cast<int>(part_.B.size());
    if (mode_ == BasisAssignment::Mode::FixedZ) {
      if (n_b <= 20) {
        table_.resize(dim_of(n_b));
        PureState rot = psi_;  // Z bases need no rotation
        for (std::size_t z = 0; z < table_.size(); ++z)
          table_[z] = make_branch(rot, part_, z, eval_);
        precomputed_ = true;
      }
    } else {
      double entries = 1.0;
      for (int i = 0; i < n_b; ++i) entries *= 6.0;
      if (entries <= 500000.0) {
        table_.resize(static_cast<std::size_t>(entries));
        std::vector<Label> labels(n_b);
        fill_random_table(0, labels);
        precomputed_ = true;
      }
    }
  }

  bool precomputed() const { return precomputed_; }

  // direct access by 6-ary label code (random mode, precomputed tables only)
  const BranchInfo& by_code(std::size_t code) const { return table_[code]; }

  const BranchInfo& lookup(const std::vector<Label>& labels) {
    if (precomputed_) {
      const std::size_t idx = mode_ == BasisAssignment::Mode::FixedZ
                                  ? bits_code(labels)
                                  : label_code(labels);
      return table_[idx];
    }
    // fallback: compute on the fly (thread-local scratch)
    thread_local std::map<std::size_t, BranchInfo> cache;
    const std::size_t code = label_code(labels);
    auto it = cache.find(code);
    if (it != cache.end()) return it->second;
    std::vector<PauliBasis> bases(labels.size());
    std::size_t zbits = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      bases[j] = basis_of(labels[j]);
      zbits = (zbits << 1) | static_cast<std::size_t>(bit_of_label(labels[j]));
    }
    PureState rot = rotate_b_to_computational(psi_, part_, bases);
    auto [pos, inserted] = cache.emplace(code, make_branch(rot, part_, zbits, eval_));
    (void)inserted;
    return pos->second;
  }

 private:
  static std::size_t bits_code(const std::vector<Label>& labels) {
    std::size_t z = 0;
    for (Label l : labels) z = (z << 1) | static_cast<std::size_t>(bit_of_label(l));
    return z;
  }

  void fill_random_table(int pos, std::vector<Label>& labels) {
    const int n_b = static_cast<int>(part_.B.size());
    if (pos == n_b) {
      std::vector<PauliBasis> bases(n_b);
      std::size_t zbits = 0;
      for (int j = 0; j < n_b; ++j) {
        bases[j] = basis_of(labels[j]);
        zbits = (zbits << 1) | static_cast<std::size_t>(bit_of_label(labels[j]));
      }
      PureState rot = rotate_b_to_computational(psi_, part_, bases);
      table_[label_code(labels)] = make_branch(rot, part_, zbits, eval_);
      return;
    }
    for (int l = 0; l < 6; ++l) {
      labels[pos] = static_cast<Label>(l);
      fill_random_table(pos + 1, labels);
    }
  }

  PureState psi_;
  Bipartition part_;
  BasisAssignment::Mode mode_;
  BranchEval eval_;
  std::vector<BranchInfo> table_;
  bool precomputed_ = false;
};

}  // namespace detail

// --- trial engine -----------------------------------------------------------------

struct TrialBatch {
  std::vector<double> values;  // weighted shadow + offset, 0 on dead branches
  std::vector<TrialRecord> records;
  long dead_branches = 0;
};

// Runs T rounds; trial i uses Rng::substream(seed, i). The record layout and
// every value are independent of `workers`.
inline TrialBatch run_witness_trials(const RhoModel& rho, const PureState& psi,
                                     const Bipartition& part,
                                     BasisAssignment::Mode mode, const BranchEval& eval,
                                     long trials, std::uint64_t seed, int workers,
                                     bool keep_records) {
  part.check();
  if (part.n() != psi.n || psi.n != rho.n())
    throw SizeMismatch("partition does not match the states");
  const int n_b = static_cast<int>(part.B.size());
  const int n_a = static_cast<int>(part.A.size());

  detail::BranchTable table(psi, part, mode, eval);

  TrialBatch batch;
  batch.values.assign(static_cast<std::size_t>(trials), 0.0);
  if (keep_records) batch.records.resize(static_cast<std::size_t>(trials));

  std::atomic<long> dead{0};
  auto work = [&](long begin, long end) {
    detail::BranchTable* tbl = &table;
    std::vector<PauliBasis> b_bases(n_b, PauliBasis::Z), a_bases(n_a);
    std::vector<Label> b_labels(n_b), a_labels(n_a);
    std::vector<cplx> scratch;
    for (long i = begin; i < end; ++i) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
      if (mode == BasisAssignment::Mode::UniformRandomPauli)
        for (auto& b : b_bases) b = static_cast<PauliBasis>(rng.below(3));
      for (auto& b : a_bases) b = static_cast<PauliBasis>(rng.below(3));
      rho.sample_round_into(part, b_bases.data(), a_bases.data(), rng,
                            b_labels.data(), a_labels.data(), scratch);

      const BranchInfo& branch = tbl->lookup(b_labels);
      double value = 0.0;
      double omega = 0.0, offset = 0.0;
      bool dead_branch = !branch.alive;
      if (branch.alive) {
        omega = branch.weight *
                shadow_fidelity_estimate(branch.target, a_labels.data(), n_a);
        offset = branch.offset;
        value = omega + offset;
      } else {
        dead.fetch_add(1, std::memory_order_relaxed);
      }
      batch.values[static_cast<std::size_t>(i)] = value;
      if (keep_records) {
        TrialRecord& rec = batch.records[static_cast<std::size_t>(i)];
        rec.index = i;
        rec.b_labels = labels_to_string(b_labels);
        rec.a_labels = labels_to_string(a_labels);
        rec.omega = omega;
        rec.offset = offset;
        rec.dead_branch = dead_branch;
      }
    }
  };

  const int nw = std::max(1, workers);
  if (nw == 1) {
    work(0, trials);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (trials + nw - 1) / nw;
    for (int t = 0; t < nw; ++t) {
      const long begin = t * chunk;
      const long end = std::min(trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  batch.dead_branches = dead.load();
  return batch;
}

// --- Protocol 1 -------------------------------------------------------------------

struct ProtocolSettings {
  double delta = 0.05;
  BasisAssignment::Mode mode = BasisAssignment::Mode::FixedZ;
  enum class ThresholdRule { LqOverThree, Explicit };
  ThresholdRule rule = ThresholdRule::LqOverThree;
  double explicit_threshold = 0.0;
  std::uint64_t seed = 0;
  std::optional<long> sample_override;
  long lq_budget = 20000;  // Monte-Carlo budget when exact LQ is out of reach
  int workers = 1;
  bool keep_trials = false;
  enum class VarianceMode { WorstCase, EmpiricalPilot };
  VarianceMode variance_mode = VarianceMode::WorstCase;
  long pilot_trials = 1000;
};

// Gaps at or below floating-point noise are treated as zero: they are not
// certifiable and would overflow the sample-size formulas.
inline constexpr double kMinCertifiableGap = 1e-12;

namespace detail {

// Reserved substream tags; trial indices stay below 2^62.
inline constexpr std::uint64_t kGapStreamTag = (1ULL << 62) + 1;
inline constexpr std::uint64_t kPilotStreamTag = (1ULL << 62) + 2;

inline GapInfo compute_lq_gap(const PureState& psi, const Bipartition& part,
                              const FidelityOracle& oracle, BasisAssignment::Mode mode,
                              const ProtocolSettings& s) {
  GapInfo gap;
  const int n_b = static_cast<int>(part.B.size());
  if (mode == BasisAssignment::Mode::FixedZ || n_b <= 8) {
    auto lq = localizable_quantumness(psi, part, oracle, mode);
    gap.value = lq.estimate;
    gap.exact = true;
  } else {
    Rng rng = Rng::substream(s.seed, kGapStreamTag);
    auto lq = localizable_quantumness(psi, part, oracle, mode, s.lq_budget, &rng);
    gap.value = lq.estimate;
    gap.std_error = lq.std_error;
    gap.exact = false;
    gap.samples = lq.samples;
  }
  return gap;
}

struct PlannedRun {
  MoMParameters mom;
  long trials = 0;
  double variance = 0.0;
  std::string variance_mode;
};

inline PlannedRun plan_trials(double epsilon, double delta, int n_a,
                              const ProtocolSettings& s,
                              const std::function<double()>& pilot_variance) {
  PlannedRun plan;
  plan.variance = shadow_variance_bound(n_a);
  plan.variance_mode = "worst-case";
  if (s.variance_mode == ProtocolSettings::VarianceMode::EmpiricalPilot) {
    plan.variance = pilot_variance();
    plan.variance_mode = "empirical-pilot";
  }
  plan.mom = mom_parameters(plan.variance, epsilon, delta);
  if (s.sample_override) {
    plan.mom.block_size = std::max(1L, *s.sample_override / plan.mom.block_count);
  }
  plan.trials = plan.mom.total();
  return plan;
}

}  // namespace detail

// Certifies that rho carries the oracle's property, against the target psi.
// Threshold eta* = gap/3 (or an explicit override); T = B*K rounds with
// B = ceil(6 sigma^2 / (gap/3)^2), K = ceil(4.5 ln(1/delta)).
inline CertificationReport run_protocol1(const RhoModel& rho, const PureState& psi,
                                         const Bipartition& part,
                                         const FidelityOracle& oracle,
                                         const ProtocolSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_a = static_cast<int>(part.A.size());

  CertificationReport rep;
  rep.seed = settings.seed;

  double gap_for_threshold;
  if (settings.rule == ProtocolSettings::ThresholdRule::LqOverThree) {
    rep.gap = detail::compute_lq_gap(psi, part, oracle, settings.mode, settings);
    if (rep.gap.value <= kMinCertifiableGap)
      throw ZeroGap("localizable quantumness of the target is zero");
    gap_for_threshold = rep.gap.value;
    rep.eta_star = gap_for_threshold / 3.0;
  } else {
    rep.eta_star = settings.explicit_threshold;
    gap_for_threshold = 3.0 * settings.explicit_threshold;
    if (gap_for_threshold <= kMinCertifiableGap)
      throw ZeroGap("explicit threshold must be positive");
    rep.gap.value = gap_for_threshold;
    rep.gap.exact = false;
  }
  rep.formula_trials = protocol_sample_size(gap_for_threshold, settings.delta, n_a);

  BranchEval eval = [&oracle](const PureState& target) {
    return std::pair<double, double>{1.0, -oracle(target)};
  };

  auto pilot_variance = [&]() {
    TrialBatch pilot = run_witness_trials(rho, psi, part, settings.mode, eval,
                                          settings.pilot_trials,
                                          Rng::substream(settings.seed,
                                                         detail::kPilotStreamTag)
                                              .u64(),
                                          settings.workers, false);
    double s = 0.0, s2 = 0.0;
    for (double v : pilot.values) {
      s += v;
      s2 += v * v;
    }
    const auto m = static_cast<double>(pilot.values.size());
    return std::max(1e-12, (s2 - s * s / m) / (m - 1));
  };

  auto plan = detail::plan_trials(gap_for_threshold / 3.0, settings.delta, n_a, settings,
                                  pilot_variance);
  rep.mom = plan.mom;
  rep.total_trials = plan.trials;
  rep.variance_used = plan.variance;
  rep.variance_mode = plan.variance_mode;

  TrialBatch batch = run_witness_trials(rho, psi, part, settings.mode, eval, plan.trials,
                                        settings.seed, settings.workers,
                                        settings.keep_trials);
  rep.dead_branches = batch.dead_branches;
  rep.omega = median_of_means(batch.values, plan.mom);
  rep.accept = rep.omega > rep.eta_star;
  rep.trials = std::move(batch.records);
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

// --- fully inseparable entanglement ---------------------------------------------

struct PairReport {
  int qa = 0, qb = 0;
  GapInfo le;
  double omega = 0.0;
  double eta_star = 0.0;
  bool accept = false;
};

struct InseparableReport {
  bool accept = false;
  long total_trials = 0;
  MoMParameters mom;
  double delta_per_pair = 0.0;
  std::uint64_t seed = 0;
  std::string config_digest;
  double wall_ms = 0.0;
  std::vector<PairReport> pairs;
  std::vector<TrialRecord> trials;  // full-system outcome per round
};

// One dataset of T random-Pauli rounds on every qubit, reused across all
// pair tests; pair (a,b) conditions on the complement's outcomes and feeds
// its own two labels to the shadow estimator.
inline InseparableReport run_fully_inseparable(const RhoModel& rho, const PureState& psi,
                                               const std::vector<std::pair<int, int>>& pairs,
                                               double delta, long lq_budget,
                                               std::uint64_t seed, int workers = 1,
                                               bool keep_trials = false) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = psi.n;
  if (pairs.empty()) throw InvalidArgument("need at least one pair");

  InseparableReport rep;
  rep.seed = seed;
  rep.delta_per_pair = delta / static_cast<double>(pairs.size());

  // per-pair localizable entanglement of the target
  std::vector<Bipartition> parts;
  for (auto [a, b] : pairs) {
    auto part = Bipartition::keep(n, {a, b});
    PairReport pr;
    pr.qa = a;
    pr.qb = b;
    const int n_r = n - 2;
    if (n_r <= 8) {
      auto lq = localizable_quantumness(
          psi, part, FidelityOracle::separable(Bipartition::keep(2, {0})),
          BasisAssignment::Mode::UniformRandomPauli);
      pr.le.value = lq.estimate;
      pr.le.exact = true;
    } else {
      Rng rng = Rng::substream(seed, detail::kGapStreamTag + pairs.size() +
                                         static_cast<std::uint64_t>(a));
      auto lq = localizable_quantumness(
          psi, part, FidelityOracle::separable(Bipartition::keep(2, {0})),
          BasisAssignment::Mode::UniformRandomPauli, lq_budget, &rng);
      pr.le.value = lq.estimate;
      pr.le.std_error = lq.std_error;
      pr.le.exact = false;
      pr.le.samples = lq.samples;
    }
    if (pr.le.value <= kMinCertifiableGap)
      throw ZeroGap("pair (" + std::to_string(a) + "," + std::to_string(b) +
                        ") has zero localizable entanglement",
                    static_cast<int>(parts.size()));
    pr.eta_star = pr.le.value / 3.0;
    rep.pairs.push_back(pr);
    parts.push_back(std::move(part));
  }

  // shared block plan: K from delta', B from the weakest pair
  const double sigma2 = shadow_variance_bound(2);
  MoMParameters mom;
  mom.block_count = 1;
  for (const auto& pr : rep.pairs) {
    MoMParameters per = mom_parameters(sigma2, pr.le.value / 3.0, rep.delta_per_pair);
    mom.block_size = std::max(mom.block_size, per.block_size);
    mom.block_count = per.block_count;
  }
  rep.mom = mom;
  rep.total_trials = mom.total();

  // one dataset: per-round random Pauli outcome on all n qubits, stored as a
  // flat label array
  const std::size_t total = static_cast<std::size_t>(rep.total_trials);
  std::vector<Label> outcomes(total * static_cast<std::size_t>(n));
  Bipartition all;
  all.B.resize(n);
  std::iota(all.B.begin(), all.B.end(), 0);
  auto sample_worker = [&](long begin, long end) {
    std::vector<PauliBasis> bases(n);
    std::vector<cplx> scratch;
    for (long i = begin; i < end; ++i) {
      Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
      for (auto& b : bases) b = static_cast<PauliBasis>(rng.below(3));
      rho.sample_round_into(all, bases.data(), nullptr, rng,
                            outcomes.data() + static_cast<std::size_t>(i) * n, nullptr,
                            scratch);
    }
  };
  const int nw = std::max(1, workers);
  if (nw == 1) {
    sample_worker(0, rep.total_trials);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (rep.total_trials + nw - 1) / nw;
    for (int t = 0; t < nw; ++t) {
      const long begin = t * chunk;
      const long end = std::min(rep.total_trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(sample_worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  if (keep_trials) {
    rep.trials.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      rep.trials[i].index = static_cast<long>(i);
      rep.trials[i].b_labels = labels_to_string(std::vector<Label>(
          outcomes.begin() + i * n, outcomes.begin() + (i + 1) * n));
    }
  }

  // reuse the dataset for every pair
  rep.accept = true;
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    auto& pr = rep.pairs[pi];
    const auto& part = parts[pi];
    BranchEval eval = [](const PureState& target) {
      return std::pair<double, double>{
          1.0, -separable_fidelity(target, Bipartition::keep(2, {0}))};
    };
    detail::BranchTable table(psi, part, BasisAssignment::Mode::UniformRandomPauli, eval);

    std::vector<double> values(total, 0.0);
    if (table.precomputed()) {
      for (std::size_t i = 0; i < total; ++i) {
        const Label* full = outcomes.data() + i * n;
        std::size_t code = 0;
        Label pair_labels[2];
        for (int q = 0; q < n; ++q) {
          if (q == pr.qa)
            pair_labels[0] = full[q];
          else if (q == pr.qb)
            pair_labels[1] = full[q];
          else
            code = code * 6 + static_cast<std::size_t>(full[q]);
        }
        const BranchInfo& branch = table.by_code(code);
        if (!branch.alive) continue;
        values[i] = branch.weight *
                        shadow_fidelity_estimate(branch.target, pair_labels, 2) +
                    branch.offset;
      }
    } else {
      for (std::size_t i = 0; i < total; ++i) {
        const Label* full = outcomes.data() + i * n;
        std::vector<Label> r_labels;
        std::vector<Label> pair_labels(2);
        for (int q = 0; q < n; ++q) {
          if (q == pr.qa)
            pair_labels[0] = full[q];
          else if (q == pr.qb)
            pair_labels[1] = full[q];
          else
            r_labels.push_back(full[q]);
        }
        const BranchInfo& branch = table.lookup(r_labels);
        if (!branch.alive) continue;
        values[i] = branch.weight * shadow_fidelity_estimate(branch.target, pair_labels) +
                    branch.offset;
      }
    }
    pr.omega = median_of_means(values, mom);
    pr.accept = pr.omega > pr.eta_star;
    rep.accept = rep.accept && pr.accept;
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

// --- fidelity certification --------------------------------------------------------

// Shadow pipeline with weight 1 and offset 0 against the random-basis
// fidelity observable; threshold eta* = 1 - (1-c) Delta (1-F), precision
// c Delta (1-F).
inline CertificationReport run_fidelity_cert(const RhoModel& rho, const PureState& psi,
                                             int n_a, double gap, double fid_floor,
                                             double c, const ProtocolSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(c > 0.0 && c < 0.5)) throw InvalidArgument("c must lie in (0, 1/2)");
  if (!(fid_floor > 0.0 && fid_floor < 1.0))
    throw InvalidArgument("F must lie in (0, 1)");
  if (gap <= kMinCertifiableGap)
    throw ZeroGap("fidelity observable has zero spectral gap");

  Bipartition part;
  part.A.resize(n_a);
  std::iota(part.A.begin(), part.A.end(), 0);
  part.B.resize(psi.n - n_a);
  std::iota(part.B.begin(), part.B.end(), n_a);

  CertificationReport rep;
  rep.seed = settings.seed;
  rep.gap.value = gap;
  rep.eta_star = 1.0 - (1.0 - c) * gap * (1.0 - fid_floor);
  const double epsilon = c * gap * (1.0 - fid_floor);
  const double sigma2 = shadow_variance_bound(n_a);
  rep.formula_trials = std::max(
      1L, static_cast<long>(std::ceil(27.0 * std::log(1.0 / settings.delta) * sigma2 /
                                      (c * c * gap * gap * (1.0 - fid_floor) *
                                       (1.0 - fid_floor)))));

  BranchEval eval = [](const PureState&) {
    return std::pair<double, double>{1.0, 0.0};
  };
  auto plan = detail::plan_trials(epsilon, settings.delta, n_a, settings,
                                  [&] { return sigma2; });
  rep.mom = plan.mom;
  rep.total_trials = plan.trials;
  rep.variance_used = plan.variance;
  rep.variance_mode = plan.variance_mode;

  TrialBatch batch = run_witness_trials(rho, psi, part,
                                        BasisAssignment::Mode::UniformRandomPauli, eval,
                                        plan.trials, settings.seed, settings.workers,
                                        settings.keep_trials);
  rep.dead_branches = batch.dead_branches;
  rep.omega = median_of_means(batch.values, plan.mom);
  rep.accept = rep.omega > rep.eta_star;
  rep.trials = std::move(batch.records);
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

// --- thresholded witness -----------------------------------------------------------

// tr(O~ rho) with O~ = sum_z [t + (1-t) 1[bound(psi_z) <= t]] |psi_z><psi_z| (x) |z><z|,
// evaluated exactly by enumeration over the fixed-Z ensemble.
template <typename StateT>
double evaluate_threshold_witness(const StateT& rho, const PureState& psi,
                                  const Bipartition& part, double t,
                                  const FidelityOracle& bound) {
  part.check();
  const int n_b = static_cast<int>(part.B.size());
  if (n_b > 22) throw TooLargeToEnumerate("|B| > 22");
  double acc = 0.0;
  const std::size_t outcomes = dim_of(n_b);
  for (std::size_t z = 0; z < outcomes; ++z) {
    double p_rho;
    double term = 0.0;
    try {
      auto [p, proj] = projected_state(rho, part, z);
      p_rho = p;
      try {
        auto [pt, target] = projected_state(psi, part, z);
        (void)pt;
        const double weight = thresholded_witness_weight(bound(target), t);
        term = weight * state_fidelity(target, proj);
      } catch (const ZeroProbabilityOutcome&) {
        term = 0.0;
      }
    } catch (const ZeroProbabilityOutcome&) {
      continue;
    }
    acc += p_rho * term;
  }
  return acc;
}

// --- complexity certification --------------------------------------------------------

struct ComplexityCertConfig {
  LatticeGeometry geometry;
  enum class Variant { Unitary, MeasurementAssisted };
  Variant variant = Variant::Unitary;
  double c = 0.5;   // entanglement-fraction parameter reported alongside
  double delta = 0.05;
  bool allow_toy = false;
  std::optional<double> toy_free_ceiling;  // replaces the sound entropy ceiling
  double t = 0.5;        // measurement-assisted threshold
  double p_prime = 0.5;  // measurement-assisted p-likely parameter
};

// Unitary variant: Protocol 1 with the entanglement-threshold bound as the
// branch offset. Measurement-assisted: estimates tr(O~ rho) against
// a + Delta/3. Geometry soundness (eta > 4 resp. > 6) is enforced unless toy
// mode is requested; toy runs carry unsound_toy = true.
inline CertificationReport run_complexity_cert(const RhoModel& rho, const PureState& psi,
                                               const ComplexityCertConfig& cfg,
                                               const ProtocolSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  const LatticeGeometry& g = cfg.geometry;
  if (static_cast<int>(psi.dim()) != (1 << g.n()))
    throw SizeMismatch("target does not match the lattice");

  const double eta = g.eta_ratio();
  const double sound_eta =
      cfg.variant == ComplexityCertConfig::Variant::Unitary ? 4.0 : 6.0;
  const bool toy = eta <= sound_eta || cfg.toy_free_ceiling.has_value();
  if (toy && !cfg.allow_toy)
    throw GeometryInvalid(
        "width-to-depth ratio " + std::to_string(eta) + " requires > " +
        std::to_string(sound_eta) +
        " for a sound certificate; enable toy mode to proceed anyway");

  Bipartition part = geometry_partition(g);
  Bipartition lr = geometry_lr_cut(g);
  const double l_size = static_cast<double>(g.L.size());
  const int n_a = static_cast<int>(g.A.size());

  CertificationReport rep;
  rep.seed = settings.seed;
  rep.unsound_toy = toy;

  if (cfg.variant == ComplexityCertConfig::Variant::Unitary) {
    const double ceiling =
        cfg.toy_free_ceiling.value_or(8.0 * g.w * g.d);
    auto bound_fn = [lr, ceiling, l_size](const PureState& proj) {
      return fannes_fidelity_bound(entanglement_entropy(proj, lr), ceiling, l_size);
    };
    auto oracle = FidelityOracle::explicit_bound(bound_fn, "entanglement-threshold");

    // exact gap and the high-entanglement fraction, by enumeration
    double delta_gap = 0.0, p_high = 0.0;
    for_each_projected(psi, part, std::vector<PauliBasis>(part.B.size(), PauliBasis::Z),
                       [&](double p, const std::vector<Label>&, const PureState& s) {
                         const double e = entanglement_entropy(s, lr);
                         delta_gap += p * (1.0 - fannes_fidelity_bound(e, ceiling, l_size));
                         if (e >= cfg.c * l_size + 1.0) p_high += p;
                       });
    if (delta_gap <= kMinCertifiableGap)
      throw ZeroGap("entanglement-threshold gap of the target is zero");

    ProtocolSettings inner = settings;
    inner.rule = ProtocolSettings::ThresholdRule::Explicit;
    inner.explicit_threshold = delta_gap / 3.0;
    CertificationReport run = run_protocol1(rho, psi, part, oracle, inner);
    run.unsound_toy = toy;
    run.gap.value = delta_gap;
    run.gap.exact = true;
    run.extras["p_high_entanglement"] = p_high;
    run.extras["c"] = cfg.c;
    run.extras["eta_ratio"] = eta;
    run.extras["free_entropy_ceiling"] = ceiling;
    run.formula_trials = protocol_sample_size(delta_gap, settings.delta, n_a);
    run.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return run;
  }

  // measurement-assisted variant; a toy override replaces the derived
  // entropy ceiling outright
  if (!(cfg.t > 0.0 && cfg.t < 1.0)) throw InvalidArgument("t must lie in (0,1)");
  if (!(cfg.p_prime > 0.0 && cfg.p_prime < 1.0))
    throw InvalidProbability("p' must lie strictly between 0 and 1");
  const double ceiling = cfg.toy_free_ceiling
                             ? *cfg.toy_free_ceiling
                             : 12.0 * g.w * g.d / (1.0 - cfg.p_prime);
  auto bound_fn = [lr, ceiling, l_size](const PureState& proj) {
    return fannes_fidelity_bound(entanglement_entropy(proj, lr), ceiling, l_size);
  };

  double f_below = 0.0;  // Pr_z[bound(psi_z) <= t]
  for_each_projected(psi, part, std::vector<PauliBasis>(part.B.size(), PauliBasis::Z),
                     [&](double p, const std::vector<Label>&, const PureState& s) {
                       if (bound_fn(s) <= cfg.t) f_below += p;
                     });
  const double sound_value = cfg.t + (1.0 - cfg.p_prime) * (1.0 - cfg.t);
  const double target_value = cfg.t + (1.0 - cfg.t) * f_below;
  const double delta_gap = target_value - sound_value;
  if (delta_gap <= kMinCertifiableGap)
    throw ZeroGap("thresholded witness gap of the target is zero");

  rep.gap.value = delta_gap;
  rep.gap.exact = true;
  rep.eta_star = sound_value + delta_gap / 3.0;
  rep.extras["witness_soundness_value"] = sound_value;
  rep.extras["witness_target_value"] = target_value;
  rep.extras["fraction_below_t"] = f_below;
  rep.extras["t"] = cfg.t;
  rep.extras["p_prime"] = cfg.p_prime;
  rep.extras["eta_ratio"] = eta;
  rep.extras["free_entropy_ceiling"] = ceiling;

  BranchEval eval = [bound_fn, t = cfg.t](const PureState& target) {
    return std::pair<double, double>{thresholded_witness_weight(bound_fn(target), t),
                                     0.0};
  };
  const double epsilon = delta_gap / 3.0;
  auto plan = detail::plan_trials(epsilon, settings.delta, n_a, settings,
                                  [&] { return shadow_variance_bound(n_a); });
  rep.mom = plan.mom;
  rep.total_trials = plan.trials;
  rep.variance_used = plan.variance;
  rep.variance_mode = plan.variance_mode;
  rep.formula_trials = protocol_sample_size(delta_gap, settings.delta, n_a);

  TrialBatch batch =
      run_witness_trials(rho, psi, part, BasisAssignment::Mode::FixedZ, eval,
                         plan.trials, settings.seed, settings.workers,
                         settings.keep_trials);
  rep.dead_branches = batch.dead_branches;
  rep.omega = median_of_means(batch.values, plan.mom);
  rep.accept = rep.omega > rep.eta_star;
  rep.trials = std::move(batch.records);
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

// --- depolarizing closed form ---------------------------------------------------------

struct DepolarizedEta {
  double lq = 0.0;            // eta at p = 0
  double fid_sum = 0.0;       // sum of Fid over live branches
  double live_fraction = 0.;  // live branches / 2^{n_B}
  int n = 0, n_a = 0;

  // eta(p) = (1-p) lq + p [live_fraction / d_A - fid_sum / d_B];
  // with every branch live the bracket is d_A^{-1} - d_B^{-1} sum_z Fid.
  double eta(double p) const {
    const double d_a = static_cast<double>(dim_of(n_a));
    const double d_b = static_cast<double>(dim_of(n - n_a));
    return (1.0 - p) * lq + p * (live_fraction / d_a - fid_sum / d_b);
  }

  // root of eta(p) = 0
  double crossover() const {
    const double d_a = static_cast<double>(dim_of(n_a));
    const double d_b = static_cast<double>(dim_of(n - n_a));
    return lq / (fid_sum / d_b + lq - live_fraction / d_a);
  }
};

// Closed form for rho = (1-p) psi + p I/d under the fixed-Z ensemble.
inline DepolarizedEta analytic_eta_depolarized(const PureState& psi,
                                               const Bipartition& part,
                                               const FidelityOracle& oracle) {
  part.check();
  DepolarizedEta out;
  out.n = psi.n;
  out.n_a = static_cast<int>(part.A.size());
  long live = 0;
  for_each_projected(psi, part, std::vector<PauliBasis>(part.B.size(), PauliBasis::Z),
                     [&](double p, const std::vector<Label>&, const PureState& s) {
                       const double fid = oracle(s);
                       out.lq += p * (1.0 - fid);
                       out.fid_sum += fid;
                       ++live;
                     });
  out.live_fraction =
      static_cast<double>(live) / static_cast<double>(dim_of(out.n - out.n_a));
  return out;
}

}  // namespace locq
