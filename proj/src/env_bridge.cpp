#include "env_bridge.hpp"

#include <cmath>
#include <numbers>

namespace crack {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

EnvState encode_state(const CMat& h_up, double amp_scale) {
  if (!(amp_scale > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "amplitude scale must be positive");
  EnvState s;
  s.amp = h_up.cwiseAbs() / amp_scale;
  s.phase.resize(h_up.rows(), h_up.cols());
  for (Eigen::Index j = 0; j < h_up.cols(); ++j)
    for (Eigen::Index i = 0; i < h_up.rows(); ++i) {
      const double turns = std::arg(h_up(i, j)) / kTwoPi;
      double wrapped = turns - std::floor(turns);
      if (wrapped >= 1.0) wrapped = 0.0;
      s.phase(i, j) = wrapped;
    }
  return s;
}

void check_action(const EnvAction& a, int m, int k) {
  auto check = [&](const Eigen::MatrixXd& x, const char* name) {
    if (x.rows() != m || x.cols() != k)
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(name) + " must be " + std::to_string(m) + "x" + std::to_string(k));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = x.data()[i];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw Error(ErrorCode::kInvalidArgument, std::string(name) + " entries must lie in [0, 1]");
    }
  };
  check(a.w_amp, "amp");
  check(a.w_phase, "phase");
}

Precoder decode_action(const EnvAction& a, double p_total) {
  if (a.w_amp.rows() != a.w_phase.rows() || a.w_amp.cols() != a.w_phase.cols())
    throw Error(ErrorCode::kInvalidArgument, "amp and phase shapes differ");
  const double norm = a.w_amp.norm();
  if (!(norm > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "cannot decode an all-zero amplitude action");
  const double xi = std::sqrt(p_total) / norm;
  CMat w(a.w_amp.rows(), a.w_amp.cols());
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      w(i, j) = std::polar(xi * a.w_amp(i, j), kTwoPi * a.w_phase(i, j));
  return Precoder{std::move(w), xi, PrecoderKind::kExternal};
}

double fairness_reward(const Eigen::VectorXd& rates) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < rates.size(); ++i) r += std::log1p(rates(i));
  return r;
}

Env::Env(ScenarioConfig config)
    : config_(std::move(config)),
      strategy_(parse_strategy(config_.env_strategy)),
      amp_scale_(amplitude_scale(config_)) {
  validate(config_);
}

EnvState Env::reset(std::uint64_t seed) {
  seed_ = seed;
  block_ = 0;
  t_ = 0;
  done_ = false;
  scheduler_.emplace(config_, strategy_, seed,
                     [config = config_, seed](std::uint64_t b) {
                       return block_channel_set(config, seed, b);
                     });
  load_block();
  return observation();
}

void Env::load_block() {
  channels_ = block_channel_set(config_, seed_, block_);
  schedule_ = scheduler_->schedule(block_, channels_);
  if (config_.noisy_estimation) {
    Rng est = derive_rng(seed_, "estimate", block_);
    h_up_ = estimate_uplink(channels_, schedule_->phi_pt, config_.pilot_power,
                            dft_pilots(config_.k, config_.pilot_length), config_.sigma2, est);
  } else {
    h_up_ = uplink_composite(channels_, schedule_->phi_pt);
  }
}

EnvState Env::observation() const {
  EnvState s = encode_state(h_up_, amp_scale_);
  s.t = t_;
  s.episode_length = config_.episode_length;
  return s;
}

StepResult Env::step(const EnvAction& action) {
  if (!scheduler_) throw Error(ErrorCode::kState, "step before reset");
  if (done_) throw Error(ErrorCode::kState, "step after the episode finished; call reset");
  check_action(action, config_.m, config_.k);

  // External precoder: run_block does not estimate anything.
  ScenarioConfig eval = config_;
  eval.noisy_estimation = false;
  StepResult out;
  out.link = run_block(eval, channels_, *schedule_,
                       PrecoderChoice{PrecoderKind::kExternal, decode_action(action, config_.p_total)});
  out.reward = fairness_reward(out.link.rate);
  ++t_;
  done_ = t_ >= config_.episode_length;
  ++block_;
  load_block();
  out.state = observation();
  out.done = done_;
  return out;
}

json state_to_json(const EnvState& s) {
  auto rows = [](const Eigen::MatrixXd& x) {
    json out = json::array();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
      out.push_back(std::move(row));
    }
    return out;
  };
  return json{{"amp", rows(s.amp)}, {"phase", rows(s.phase)}, {"t", s.t},
              {"T", s.episode_length}};
}

EnvAction action_from_json(const json& a) {
  auto matrix = [&](const char* key) {
    if (!a.is_object() || !a.contains(key) || !a[key].is_array())
      throw Error(ErrorCode::kInvalidArgument, std::string("action.") + key + " must be a nested array");
    const json& rows = a[key];
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 && rows[0].is_array() ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd out(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != c)
        throw Error(ErrorCode::kInvalidArgument, std::string("action.") + key + " is ragged");
      for (Eigen::Index j = 0; j < c; ++j) {
        if (!rows[i][j].is_number())
          throw Error(ErrorCode::kInvalidArgument, std::string("action.") + key + " has a non-number");
        out(i, j) = rows[i][j].get<double>();
      }
    }
    return out;
  };
  return EnvAction{matrix("amp"), matrix("phase")};
}

json config_summary(const ScenarioConfig& c) {
  return json{{"m", c.m},
              {"k", c.k},
              {"n", c.n},
              {"l", c.l},
              {"episode_length", c.episode_length},
              {"strategy", c.env_strategy},
              {"p_total", c.p_total},
              {"sigma2", c.sigma2},
              {"amp_scale", amplitude_scale(c)},
              {"action_shape", {c.m, c.k}}};
}

ProtocolSession::ProtocolSession(ScenarioConfig config) : env_(std::move(config)) {}

std::string ProtocolSession::handle(std::string_view line) {
  json reply;
  try {
    json request;
    try {
      request = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, std::string("malformed JSON: ") + e.what());
    }
    reply = dispatch(request);
  } catch (const std::exception& e) {
    reply = json{{"ok", false}, {"error", e.what()}};
  }
  return reply.dump();
}

json ProtocolSession::dispatch(const json& request) {
  if (closed_) throw Error(ErrorCode::kState, "session is closed");
  if (!request.is_object() || !request.contains("cmd") || !request["cmd"].is_string())
    throw Error(ErrorCode::kParse, "request must be an object with a string \"cmd\"");
  const std::string cmd = request["cmd"].get<std::string>();

  if (cmd == "config") {
    return json{{"ok", true}, {"state", nullptr}, {"reward", nullptr},
                {"done", env_.done()}, {"info", config_summary(env_.config())}};
  }
  if (cmd == "reset") {
    const json* seed_field = request.contains("seed") ? &request["seed"] : nullptr;
    if (seed_field == nullptr || !seed_field->is_number_unsigned())
      throw Error(ErrorCode::kInvalidArgument, "reset needs a non-negative integer \"seed\"");
    const auto seed = request["seed"].get<std::uint64_t>();
    const EnvState s = env_.reset(seed);
    return json{{"ok", true}, {"state", state_to_json(s)}, {"reward", nullptr},
                {"done", false}, {"info", {{"t", 0}, {"seed", seed}}}};
  }
  if (cmd == "step") {
    if (!request.contains("action"))
      throw Error(ErrorCode::kInvalidArgument, "step needs an \"action\"");
    const StepResult r = env_.step(action_from_json(request["action"]));
    const auto vec = [](const Eigen::VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    std::vector<bool> outage(r.link.outage.begin(), r.link.outage.end());
    json info{{"t", r.state.t},
              {"rates", vec(r.link.rate)},
              {"sum_rate", r.link.sum_rate},
              {"eve_rates", vec(r.link.eve_rate)},
              {"secrecy_rates", vec(r.link.secrecy_rate)},
              {"sum_secrecy_rate", r.link.sum_secrecy_rate},
              {"outage", outage}};
    return json{{"ok", true}, {"state", state_to_json(r.state)}, {"reward", r.reward},
                {"done", r.done}, {"info", std::move(info)}};
  }
  if (cmd == "close") {
    closed_ = true;
    return json{{"ok", true}, {"state", nullptr}, {"reward", nullptr}, {"done", true},
                {"info", {{"closed", true}}}};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown cmd '" + cmd + "'");
}

}  // namespace crack
