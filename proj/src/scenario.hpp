#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace crack {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kIo,
  kZfSingular,
  kState,
};

// Every failure the core reports carries one of the codes above so the C API
// can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

using Vec3 = std::array<double, 3>;
using Rng = std::mt19937_64;

double distance(const Vec3& a, const Vec3& b);
double db_to_linear(double db);

struct PathLossExponents {
  double kb = 3.5;  // user -> BS
  double kr = 2.5;  // user -> RIS
  double eb = 3.2;  // Eve -> BS
  double er = 2.5;  // Eve -> RIS
  double rb = 2.0;  // RIS -> BS
};

struct RicianFactors {
  double kb = 3.0;
  double kr = 6.0;
  double eb = 4.0;
  double er = 8.0;
  double rb = 12.0;
};

enum class PhaseRule { kPiOffset, kIndependent };

std::string_view to_string(PhaseRule rule);
PhaseRule parse_phase_rule(std::string_view text);

struct ScenarioConfig {
  // Array sizes. l is the NR-RIS block size; l == n means a single block.
  int m = 32;
  int k = 4;
  int n = 128;
  int l = 128;

  Vec3 bs_pos{5.0, 35.0, 20.0};
  Vec3 ris_pos{0.0, 30.0, 15.0};
  Vec3 eve_pos{6.0, 5.0, 2.0};
  Vec3 jammer_pos{0.0, 30.0, 15.0};
  Vec3 user_center{5.0, 0.0, 2.0};
  double user_radius = 10.0;

  double rho = 0.01;  // -20 dB at 1 m
  PathLossExponents iota;
  RicianFactors kappa;
  // Jammer -> user / Eve links.
  double jam_iota = 3.5;
  double jam_kappa = 3.0;

  double p_total = 1.0;  // 30 dBm
  double p_jam = 1.0;    // 30 dBm
  double sigma2 = 1e-12;
  double bandwidth = 1e6;

  PhaseRule phase_rule = PhaseRule::kPiOffset;
  PhaseRule ha_phase_rule = PhaseRule::kPiOffset;
  int ha_candidates = 200;
  int ha_hold_blocks = 5;
  int dris3_subslots = 4;

  bool noisy_estimation = false;
  double pilot_power = 0.1;
  int pilot_length = 4;

  double zf_cond_cap = 1e10;

  std::string env_strategy = "nr-blind";
  int episode_length = 20;
  double amp_scale = 0.0;  // 0 selects the geometric default

  std::uint64_t seed = 1;
  std::uint64_t trials = 3000;
  int workers = 0;  // 0 = hardware concurrency
};

// Throws Error(kInvalidArgument) naming the first offending field.
void validate(const ScenarioConfig& config);

// Reads the nested JSON schema documented in docs/config.md. Omitted fields
// keep their defaults. Unknown keys are rejected.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json(const nlohmann::json& doc);
ScenarioConfig config_from_text(const std::string& text);
nlohmann::json config_to_json(const ScenarioConfig& config);

// Applies one "key=value" style override without validating. The key is
// either a dotted path ("array.m") or an unambiguous leaf ("m").
void apply_override(ScenarioConfig& config, std::string_view key,
                    std::string_view value);

// Scale for encoded channel amplitudes: sqrt(rho * d^-iota_kb) at the
// user-region center, unless amp_scale overrides it.
double amplitude_scale(const ScenarioConfig& config);

// Independent keyed substream. Same (seed, label, index) always gives the
// same stream.
Rng derive_rng(std::uint64_t seed, std::string_view label, std::uint64_t index);
inline Rng derive_rng(const ScenarioConfig& config, std::string_view label,
                      std::uint64_t index) {
  return derive_rng(config.seed, label, index);
}

}  // namespace crack
