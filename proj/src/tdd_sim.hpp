#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "channel.hpp"
#include "precoding.hpp"
#include "ris.hpp"
#include "scenario.hpp"

namespace crack {

// eta_k = |h_k w_k|^2 / (sum_{i != k} |h_k w_i|^2 + jam_k + sigma2), with h_k
// row k of the true downlink channel.
Eigen::VectorXd downlink_sinr(const CMat& h_down, const Precoder& w, double sigma2,
                              const Eigen::VectorXd& jam_power_at_users);

// Eavesdropper intercepting stream target_k; jamming is excluded.
double eve_sinr(const CRow& h_eve, const Precoder& w, double sigma2, int target_k);

struct LinkReport {
  Eigen::VectorXd sinr;        // per user, mean over DT sub-slots
  Eigen::VectorXd rate;        // bit/s/Hz, mean of log2(1 + eta) over sub-slots
  Eigen::VectorXd eve_sinr;
  Eigen::VectorXd eve_rate;
  Eigen::VectorXd secrecy_rate;  // max(0, rate - eve_rate)
  std::vector<bool> outage;      // rate < eve_rate
  double sum_rate = 0.0;
  double sum_secrecy_rate = 0.0;
  // max over users, sub-slots, i != k of |h_k w_i|^2 / |h_k w_k|^2.
  double max_interference_ratio = 0.0;
};

LinkReport link_report_from_rates(Eigen::VectorXd sinr, Eigen::VectorXd rate,
                                  Eigen::VectorXd eve_sinr, Eigen::VectorXd eve_rate);

// Either a design rule applied to the estimated uplink channel or an
// externally chosen precoder.
struct PrecoderChoice {
  PrecoderKind kind = PrecoderKind::kZf;
  std::optional<Precoder> external;
};

// Orthogonal DFT pilots, K x tau, unit-modulus symbols (S S^H = tau I).
CMat dft_pilots(int k, int tau);

// Least-squares channel estimate from Y = sqrt(p) H_up S + noise, noise
// entries CN(0, noise_power). noise_power = 0 returns H_up exactly.
CMat estimate_uplink(const ChannelSet& set, const ScatteringMatrix& phi_pt,
                     double pilot_power, const CMat& pilots, double noise_power,
                     Rng& rng);

// One TDD coherence block: estimate the uplink with phi_pt, precode, then
// evaluate every DT sub-slot on the true downlink. estimation_rng is only
// used when config.noisy_estimation is set.
LinkReport run_block(const ScenarioConfig& config, const ChannelSet& set,
                     const AttackSchedule& schedule, const PrecoderChoice& precoder,
                     Rng* estimation_rng = nullptr);

struct ErgodicReport {
  std::string strategy;
  std::string precoder;
  int n = 0;
  int m = 0;
  int l = 0;
  int k = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  double sum_rate_mean = 0.0;
  double sum_rate_ci95 = 0.0;
  double sum_secrecy_mean = 0.0;
  double sum_secrecy_ci95 = 0.0;
  double sop = 0.0;      // fraction of user-trial pairs in outage
  double sop_ci95 = 0.0;
  double sop_any = 0.0;  // fraction of trials with at least one user in outage
  double max_interference_ratio = 0.0;
  double sum_rate_bps = 0.0;  // sum_rate_mean * bandwidth

  std::vector<double> per_trial_sum_rate;
  std::vector<double> per_trial_sum_secrecy;
  std::uint64_t outage_count = 0;
};

// Aggregates per-trial reports in trial-index order.
ErgodicReport aggregate(const std::vector<LinkReport>& trials, double bandwidth);

struct MonteCarloOptions {
  int workers = 0;  // 0: config.workers, then hardware concurrency
};

// Fresh user positions, channels and attack draw per trial; trial t is block
// t of the attacker's schedule. Bit-identical for any worker count.
ErgodicReport monte_carlo(const ScenarioConfig& config, Strategy strategy,
                          PrecoderKind precoder, std::uint64_t trials, std::uint64_t seed,
                          MonteCarloOptions options = {});

// Same trial loop with a fixed, caller-supplied schedule in every block.
ErgodicReport monte_carlo_fixed(const ScenarioConfig& config, const AttackSchedule& schedule,
                                PrecoderKind precoder, std::uint64_t trials,
                                std::uint64_t seed, MonteCarloOptions options = {});

// The channel set of block `block` under seed `seed` (users + fading).
ChannelSet block_channel_set(const ScenarioConfig& config, std::uint64_t seed,
                             std::uint64_t block);

}  // namespace crack
