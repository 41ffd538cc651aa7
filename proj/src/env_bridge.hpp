#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tdd_sim.hpp"

namespace crack {

// Observation: the estimated uplink channel split into amplitude (scaled by
// amplitude_scale) and phase (angle / 2pi, wrapped to [0, 1)).
struct EnvState {
  Eigen::MatrixXd amp;    // M x K
  Eigen::MatrixXd phase;  // M x K
  int t = 0;
  int episode_length = 0;
};

// Precoder in amplitude/phase form, every entry in [0, 1].
struct EnvAction {
  Eigen::MatrixXd w_amp;    // M x K
  Eigen::MatrixXd w_phase;  // M x K
};

EnvState encode_state(const CMat& h_up, double amp_scale);

// sqrt(P) w_amp / ||w_amp||_F, then elementwise exp(j 2pi w_phase).
Precoder decode_action(const EnvAction& action, double p_total);

// Throws Error(kInvalidArgument) on shape mismatch, non-finite or
// out-of-range entries.
void check_action(const EnvAction& action, int m, int k);

// sum_k ln(1 + r_k)
double fairness_reward(const Eigen::VectorXd& rates);

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
  LinkReport link;
};

// Episodic environment: each step is one fresh coherence block under the
// configured attack strategy. Block b of an episode reset with seed s uses
// the same channel and attack draws as trial b of monte_carlo(..., seed = s).
class Env {
 public:
  explicit Env(ScenarioConfig config);

  EnvState reset(std::uint64_t seed);
  StepResult step(const EnvAction& action);

  const ScenarioConfig& config() const { return config_; }
  Strategy strategy() const { return strategy_; }
  bool done() const { return done_; }
  bool started() const { return scheduler_.has_value(); }

  // Current block, for oracles and diagnostics.
  const ChannelSet& channels() const { return channels_; }
  const AttackSchedule& schedule() const { return *schedule_; }
  const CMat& uplink_estimate() const { return h_up_; }

 private:
  void load_block();
  EnvState observation() const;

  ScenarioConfig config_;
  Strategy strategy_;
  double amp_scale_;
  std::uint64_t seed_ = 0;
  std::uint64_t block_ = 0;
  int t_ = 0;
  bool done_ = false;
  std::optional<AttackScheduler> scheduler_;
  ChannelSet channels_;
  std::optional<AttackSchedule> schedule_;
  CMat h_up_;
};

// Line protocol: one JSON request in, one JSON reply out. Malformed or
// invalid requests produce {"ok":false,"error":...} and leave the session
// usable.
class ProtocolSession {
 public:
  explicit ProtocolSession(ScenarioConfig config);

  std::string handle(std::string_view line);
  bool closed() const { return closed_; }

 private:
  nlohmann::json dispatch(const nlohmann::json& request);

  Env env_;
  bool closed_ = false;
};

nlohmann::json state_to_json(const EnvState& state);
EnvAction action_from_json(const nlohmann::json& action);
nlohmann::json config_summary(const ScenarioConfig& config);

}  // namespace crack
