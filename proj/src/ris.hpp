#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "scenario.hpp"

namespace crack {

// Unitary N x N scattering matrix with exactly one unit-modulus entry per row
// and per column: row i holds coefficient(i) in column column_of(i). Every
// surface this simulator models (diagonal RIS, ND-RIS, block NR-RIS) has that
// monomial structure, so products with it are O(N) per column.
class ScatteringMatrix {
 public:
  enum class Kind { kDiagonal, kPermPhase, kNrBlock };

  static ScatteringMatrix identity(int n);
  static ScatteringMatrix diagonal(std::span<const double> phases);
  // Throws unless `columns` is a permutation and every coefficient has unit
  // modulus (within 1e-12).
  static ScatteringMatrix monomial(Kind kind, std::vector<int> columns,
                                   std::vector<cdouble> coefficients,
                                   int block_size = 0);

  int size() const { return static_cast<int>(columns_.size()); }
  Kind kind() const { return kind_; }
  int block_size() const { return block_size_; }
  int column_of(int row) const { return columns_[row]; }
  cdouble coefficient(int row) const { return coefficients_[row]; }
  std::span<const int> columns() const { return columns_; }
  std::span<const cdouble> coefficients() const { return coefficients_; }

  CMat dense() const;
  ScatteringMatrix transposed() const;

  // Phi * x and (Phi - I) * x.
  CMat apply(const CMat& x) const;
  CMat apply_minus_identity(const CMat& x) const;

  bool is_symmetric(double tol = 0.0) const;
  // ||Phi Phi^H - I||_F evaluated on the dense matrix.
  double unitarity_error() const;
  // ||Phi - Phi^T||_F.
  double asymmetry() const;

  // Row-major text export: a header line "N <n> <kind>" followed by n lines of
  // n "re,im" cells.
  std::string to_text() const;
  static ScatteringMatrix from_text(std::string_view text);

 private:
  ScatteringMatrix(Kind kind, std::vector<int> columns,
                   std::vector<cdouble> coefficients, int block_size)
      : kind_(kind),
        columns_(std::move(columns)),
        coefficients_(std::move(coefficients)),
        block_size_(block_size) {}

  Kind kind_ = Kind::kDiagonal;
  std::vector<int> columns_;
  std::vector<cdouble> coefficients_;
  int block_size_ = 0;
};

std::string_view to_string(ScatteringMatrix::Kind kind);

// [[0, e^{j phi1}], [e^{j phi2}, 0]].
ScatteringMatrix dual_unit(double phi1, double phi2);

// Uniform phase on (0, 2pi].
double sample_phase(Rng& rng);

// Block-diagonal NR-RIS: each size-l block is a uniformly random perfect
// pairing of its elements, each pair wired as a dual unit.
ScatteringMatrix sample_nr_block(int n, int l, PhaseRule rule, Rng& rng);

// Explicit construction. `pairs[g]` lists the (0-based, block-local) element
// pairs of block g; phases[g][p] = (phi_ab, phi_ba) for pair p.
ScatteringMatrix nr_block_from_pairs(
    int n, int l, const std::vector<std::vector<std::pair<int, int>>>& pairs,
    const std::vector<std::vector<std::pair<double, double>>>& phases);

// Idealized ND-RIS: uniformly random permutation with i.i.d. phases.
ScatteringMatrix sample_nd_ris(int n, Rng& rng);

ScatteringMatrix diagonal_config(std::span<const double> phases);
ScatteringMatrix random_diagonal(int n, Rng& rng);

// Weighted LoS uplink/downlink difference
// sum_k beta_k ||Hbar_rb (Phi - Phi^T) hbar_kr||^2.
double ha_objective(const ChannelSet& set, const ScatteringMatrix& phi);

struct HaResult {
  ScatteringMatrix best;
  double best_objective;
  std::vector<double> candidate_objectives;
};

// Draws num_candidates NR-block matrices and keeps the one with the largest
// ha_objective. Ties keep the earliest candidate.
HaResult ha_search(const ChannelSet& set, int num_candidates, int n, int l,
                   PhaseRule rule, Rng& rng);

enum class Strategy { kNone, kNrBlind, kNrHa, kNdRis, kDris1, kDris2, kDris3, kJammer };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);
std::vector<Strategy> all_strategies();

// Configuration seen in the pilot phase and in each downlink sub-slot.
struct AttackSchedule {
  ScatteringMatrix phi_pt;
  std::vector<ScatteringMatrix> phi_dt;
  bool jammer_active = false;
};

// Builds one block's schedule. `knowledge` is the channel set the attacker
// optimizes against (only read by nr-ha). Deterministic in (inputs, rng).
AttackSchedule attack_schedule(Strategy strategy, const ScenarioConfig& config,
                               const ChannelSet& knowledge, Rng& rng);

// Stateful wrapper implementing the per-block timing of each strategy. nr-ha
// holds its winner for config.ha_hold_blocks consecutive blocks; the winner
// of epoch e is searched against the channel set of block e * hold, obtained
// from `provider`, with an rng keyed by the epoch. Every other strategy draws
// a fresh configuration from an rng keyed by the block index.
class AttackScheduler {
 public:
  using ChannelProvider = std::function<ChannelSet(std::uint64_t block)>;

  AttackScheduler(ScenarioConfig config, Strategy strategy, std::uint64_t seed,
                  ChannelProvider provider);

  // `current` must be the channel set of `block`.
  AttackSchedule schedule(std::uint64_t block, const ChannelSet& current);

  Strategy strategy() const { return strategy_; }

 private:
  ScenarioConfig config_;
  Strategy strategy_;
  std::uint64_t seed_;
  ChannelProvider provider_;
  std::optional<std::pair<std::uint64_t, AttackSchedule>> cached_epoch_;
};

}  // namespace crack
