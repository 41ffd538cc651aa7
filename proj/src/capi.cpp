#include "crack/crack.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "env_bridge.hpp"
#include "experiments.hpp"
#include "scenario.hpp"
#include "selfcheck.hpp"
#include "tdd_sim.hpp"

struct crack_config {
  crack::ScenarioConfig value;
};

struct crack_env {
  crack::Env value;
};

struct crack_session {
  crack::ProtocolSession value;
};

namespace {

thread_local std::string g_last_error;

crack_status to_status(crack::ErrorCode code) {
  switch (code) {
    case crack::ErrorCode::kInvalidArgument: return CRACK_ERR_INVALID_ARGUMENT;
    case crack::ErrorCode::kParse: return CRACK_ERR_PARSE;
    case crack::ErrorCode::kIo: return CRACK_ERR_IO;
    case crack::ErrorCode::kZfSingular: return CRACK_ERR_ZF_SINGULAR;
    case crack::ErrorCode::kState: return CRACK_ERR_STATE;
  }
  return CRACK_ERR_INTERNAL;
}

template <class F>
crack_status guarded(F&& f) {
  try {
    f();
    return CRACK_OK;
  } catch (const crack::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CRACK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CRACK_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw crack::Error(crack::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void copy_row_major(const Eigen::MatrixXd& x, double* dst) {
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) dst[i * x.cols() + j] = x(i, j);
}

Eigen::MatrixXd read_row_major(const double* src, int rows, int cols) {
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = src[i * cols + j];
  return x;
}

}  // namespace

extern "C" {

const char* crack_version(void) { return "1.0.0"; }

const char* crack_last_error(void) { return g_last_error.c_str(); }

const char* crack_status_name(crack_status status) {
  switch (status) {
    case CRACK_OK: return "ok";
    case CRACK_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case CRACK_ERR_PARSE: return "parse-error";
    case CRACK_ERR_IO: return "io-error";
    case CRACK_ERR_ZF_SINGULAR: return "zf-singular";
    case CRACK_ERR_STATE: return "bad-state";
    case CRACK_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

void crack_string_free(char* s) { std::free(s); }

crack_status crack_config_new(crack_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new crack_config{};
  });
}

crack_status crack_config_load(const char* path, crack_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new crack_config{crack::load_config(path)};
  });
}

crack_status crack_config_parse(const char* json_text, crack_config** out) {
  return guarded([&] {
    require(json_text != nullptr && out != nullptr, "null argument");
    *out = new crack_config{crack::config_from_text(json_text)};
  });
}

crack_status crack_config_clone(const crack_config* cfg, crack_config** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = new crack_config{cfg->value};
  });
}

void crack_config_free(crack_config* cfg) { delete cfg; }

crack_status crack_config_set(crack_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg != nullptr && key != nullptr && value != nullptr, "null argument");
    crack::apply_override(cfg->value, key, value);
  });
}

crack_status crack_config_validate(const crack_config* cfg) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    crack::validate(cfg->value);
  });
}

crack_status crack_config_to_json(const crack_config* cfg, char** out_json) {
  return guarded([&] {
    require(cfg != nullptr && out_json != nullptr, "null argument");
    *out_json = dup_string(crack::config_to_json(cfg->value).dump(2));
  });
}

crack_status crack_config_run_defaults(const crack_config* cfg, uint64_t* seed,
                                       uint64_t* trials) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    if (seed) *seed = cfg->value.seed;
    if (trials) *trials = cfg->value.trials;
  });
}

crack_status crack_monte_carlo(const crack_config* cfg, const char* strategy,
                               const char* precoder, uint64_t trials, uint64_t seed,
                               crack_ergodic_report* out) {
  return guarded([&] {
    require(cfg && strategy && precoder && out, "null argument");
    const auto r = crack::monte_carlo(cfg->value, crack::parse_strategy(strategy),
                                      crack::parse_precoder(precoder), trials, seed);
    *out = crack_ergodic_report{r.sum_rate_mean,    r.sum_rate_ci95, r.sum_rate_bps,
                                r.sum_secrecy_mean, r.sum_secrecy_ci95, r.sop,
                                r.sop_ci95,         r.sop_any,       r.max_interference_ratio,
                                r.trials,           r.outage_count};
  });
}

crack_status crack_sweep_csv(const crack_config* cfg, const crack_experiment* spec,
                             char** out_csv) {
  return guarded([&] {
    require(cfg && spec && out_csv, "null argument");
    crack::ExperimentSpec e;
    e.variable = crack::parse_sweep_variable(spec->variable ? spec->variable : "none");
    if (spec->num_values == 0) {
      if (e.variable != crack::SweepVariable::kNone) e.values = crack::default_grid(e.variable);
    } else {
      require(spec->values != nullptr, "values is null");
      e.values.assign(spec->values, spec->values + spec->num_values);
    }
    for (size_t i = 0; i < spec->num_strategies; ++i)
      e.strategies.push_back(crack::parse_strategy(spec->strategies[i]));
    for (size_t i = 0; i < spec->num_precoders; ++i)
      e.precoders.push_back(crack::parse_precoder(spec->precoders[i]));
    e.trials = spec->trials;
    e.seed = spec->seed;
    std::ostringstream csv;
    crack::write_sweep_csv(csv, crack::run_sweep(cfg->value, e));
    *out_csv = dup_string(csv.str());
  });
}

crack_status crack_histogram_csv(const crack_config* cfg, int num_configs, uint64_t trials,
                                 uint64_t seed, char** out_csv) {
  return guarded([&] {
    require(cfg && out_csv, "null argument");
    std::ostringstream csv;
    crack::write_histogram_csv(csv, crack::run_histogram(cfg->value, num_configs, trials, seed));
    *out_csv = dup_string(csv.str());
  });
}

crack_status crack_schedule_text(const crack_config* cfg, const char* strategy, uint64_t seed,
                                 uint64_t block, char** out_text) {
  return guarded([&] {
    require(cfg && strategy && out_text, "null argument");
    const auto& c = cfg->value;
    crack::validate(c);
    crack::AttackScheduler scheduler(c, crack::parse_strategy(strategy), seed,
                                     [&c, seed](std::uint64_t b) {
                                       return crack::block_channel_set(c, seed, b);
                                     });
    const auto set = crack::block_channel_set(c, seed, block);
    const auto sched = scheduler.schedule(block, set);
    std::string text = "# pt\n" + sched.phi_pt.to_text();
    for (size_t i = 0; i < sched.phi_dt.size(); ++i)
      text += "# dt " + std::to_string(i) + "\n" + sched.phi_dt[i].to_text();
    *out_text = dup_string(text);
  });
}

crack_status crack_selfcheck(const crack_config* cfg, char** out_report, int* all_passed) {
  return guarded([&] {
    require(cfg && out_report && all_passed, "null argument");
    const auto results = crack::run_selfcheck(cfg->value);
    std::string report;
    bool ok = true;
    for (const auto& r : results) {
      report += (r.passed ? "PASS " : "FAIL ") + r.name + "  " + r.detail + "\n";
      ok = ok && r.passed;
    }
    *all_passed = ok ? 1 : 0;
    *out_report = dup_string(report);
  });
}

crack_status crack_env_new(const crack_config* cfg, crack_env** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = new crack_env{crack::Env(cfg->value)};
  });
}

void crack_env_free(crack_env* env) { delete env; }

crack_status crack_env_shape(const crack_env* env, int* m, int* k, int* episode_length) {
  return guarded([&] {
    require(env != nullptr, "null env");
    if (m) *m = env->value.config().m;
    if (k) *k = env->value.config().k;
    if (episode_length) *episode_length = env->value.config().episode_length;
  });
}

crack_status crack_env_reset(crack_env* env, uint64_t seed, double* amp, double* phase) {
  return guarded([&] {
    require(env && amp && phase, "null argument");
    const auto s = env->value.reset(seed);
    copy_row_major(s.amp, amp);
    copy_row_major(s.phase, phase);
  });
}

crack_status crack_env_step(crack_env* env, const double* w_amp, const double* w_phase,
                            double* next_amp, double* next_phase, double* reward, int* done,
                            double* rates) {
  return guarded([&] {
    require(env && w_amp && w_phase && next_amp && next_phase && reward && done,
            "null argument");
    const int m = env->value.config().m;
    const int k = env->value.config().k;
    const crack::EnvAction action{read_row_major(w_amp, m, k), read_row_major(w_phase, m, k)};
    const auto r = env->value.step(action);
    copy_row_major(r.state.amp, next_amp);
    copy_row_major(r.state.phase, next_phase);
    *reward = r.reward;
    *done = r.done ? 1 : 0;
    if (rates)
      for (int u = 0; u < k; ++u) rates[u] = r.link.rate(u);
  });
}

crack_status crack_session_new(const crack_config* cfg, crack_session** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = new crack_session{crack::ProtocolSession(cfg->value)};
  });
}

void crack_session_free(crack_session* session) { delete session; }

crack_status crack_session_handle(crack_session* session, const char* line, char** out_reply) {
  return guarded([&] {
    require(session && line && out_reply, "null argument");
    *out_reply = dup_string(session->value.handle(line));
  });
}

int crack_session_closed(const crack_session* session) {
  return session != nullptr && session->value.closed() ? 1 : 0;
}

}  // extern "C"
