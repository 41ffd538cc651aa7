#include "tdd_sim.hpp"

#include <algorithm>
#include <exception>
#include <numbers>
#include <thread>

namespace crack {

Eigen::VectorXd downlink_sinr(const CMat& h_down, const Precoder& w, double sigma2,
                              const Eigen::VectorXd& jam_power_at_users) {
  const Eigen::Index k = h_down.rows();
  if (h_down.cols() != w.w.rows() || w.w.cols() != k || jam_power_at_users.size() != k)
    throw Error(ErrorCode::kInvalidArgument, "downlink_sinr: dimension mismatch");
  const Eigen::MatrixXd gains = (h_down * w.w).cwiseAbs2();  // (k, i) = |h_k w_i|^2
  Eigen::VectorXd sinr(k);
  for (Eigen::Index u = 0; u < k; ++u) {
    const double signal = gains(u, u);
    const double interference = gains.row(u).sum() - signal;
    sinr(u) = signal / (interference + jam_power_at_users(u) + sigma2);
  }
  return sinr;
}

double eve_sinr(const CRow& h_eve, const Precoder& w, double sigma2, int target_k) {
  if (h_eve.size() != w.w.rows() || target_k < 0 || target_k >= w.w.cols())
    throw Error(ErrorCode::kInvalidArgument, "eve_sinr: dimension mismatch");
  const Eigen::RowVectorXd gains = (h_eve * w.w).cwiseAbs2();
  const double signal = gains(target_k);
  return signal / (gains.sum() - signal + sigma2);
}

LinkReport link_report_from_rates(Eigen::VectorXd sinr, Eigen::VectorXd rate,
                                  Eigen::VectorXd eve_sinr, Eigen::VectorXd eve_rate) {
  LinkReport r;
  r.sinr = std::move(sinr);
  r.rate = std::move(rate);
  r.eve_sinr = std::move(eve_sinr);
  r.eve_rate = std::move(eve_rate);
  r.secrecy_rate = (r.rate - r.eve_rate).cwiseMax(0.0);
  r.outage.resize(r.rate.size());
  for (Eigen::Index u = 0; u < r.rate.size(); ++u) r.outage[u] = r.rate(u) < r.eve_rate(u);
  r.sum_rate = r.rate.sum();
  r.sum_secrecy_rate = r.secrecy_rate.sum();
  return r;
}

CMat dft_pilots(int k, int tau) {
  if (tau < k)
    throw Error(ErrorCode::kInvalidArgument, "pilot length must be at least the number of users");
  CMat s(k, tau);
  for (int u = 0; u < k; ++u)
    for (int t = 0; t < tau; ++t)
      s(u, t) = std::polar(1.0, -2.0 * std::numbers::pi * u * t / tau);
  return s;
}

CMat estimate_uplink(const ChannelSet& set, const ScatteringMatrix& phi_pt,
                     double pilot_power, const CMat& pilots, double noise_power,
                     Rng& rng) {
  const CMat h_up = uplink_composite(set, phi_pt);
  if (pilots.rows() != h_up.cols())
    throw Error(ErrorCode::kInvalidArgument, "pilot matrix must have one row per user");
  if (pilots.cols() < pilots.rows())
    throw Error(ErrorCode::kInvalidArgument, "pilot length must be at least the number of users");
  if (noise_power == 0.0) return h_up;
  if (!(pilot_power > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "pilot power must be positive");

  const double sqrt_p = std::sqrt(pilot_power);
  CMat y = sqrt_p * h_up * pilots;
  const double noise_amp = std::sqrt(noise_power);
  for (Eigen::Index t = 0; t < y.cols(); ++t)
    for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, t) += noise_amp * complex_gaussian(rng);

  // H_hat = Y S^H (S S^H)^{-1} / sqrt(p)
  const CMat sst = pilots * pilots.adjoint();
  const CMat rhs = (y * pilots.adjoint()).adjoint();  // K x M
  return (sst.adjoint().ldlt().solve(rhs)).adjoint() / sqrt_p;
}

LinkReport run_block(const ScenarioConfig& config, const ChannelSet& set,
                     const AttackSchedule& schedule, const PrecoderChoice& choice,
                     Rng* estimation_rng) {
  if (schedule.phi_dt.empty())
    throw Error(ErrorCode::kInvalidArgument, "run_block: schedule has no DT configuration");

  CMat h_up;
  if (config.noisy_estimation) {
    if (estimation_rng == nullptr)
      throw Error(ErrorCode::kState, "run_block: noisy estimation needs an rng");
    h_up = estimate_uplink(set, schedule.phi_pt, config.pilot_power,
                           dft_pilots(set.k(), config.pilot_length), config.sigma2,
                           *estimation_rng);
  } else {
    h_up = uplink_composite(set, schedule.phi_pt);
  }

  Precoder precoder;
  if (choice.external) {
    precoder = *choice.external;
  } else {
    precoder = make_precoder(choice.kind, h_up, config.p_total, config.zf_cond_cap);
  }

  const int k = set.k();
  Eigen::VectorXd jam = Eigen::VectorXd::Zero(k);
  if (schedule.jammer_active) jam = config.p_jam * set.g_ju.cwiseAbs2();

  Eigen::VectorXd sinr = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd rate = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd e_sinr = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd e_rate = Eigen::VectorXd::Zero(k);
  double max_ratio = 0.0;

  for (const auto& phi : schedule.phi_dt) {
    const CMat h_down = downlink_actual(set, phi);
    const Eigen::VectorXd s = downlink_sinr(h_down, precoder, config.sigma2, jam);
    sinr += s;
    rate += s.unaryExpr([](double x) { return std::log2(1.0 + x); });

    const Eigen::MatrixXd gains = (h_down * precoder.w).cwiseAbs2();
    for (int u = 0; u < k; ++u)
      for (int i = 0; i < k; ++i)
        if (i != u) max_ratio = std::max(max_ratio, gains(u, i) / gains(u, u));

    const CRow h_eve = eve_downlink(set, phi);
    for (int u = 0; u < k; ++u) {
      const double es = eve_sinr(h_eve, precoder, config.sigma2, u);
      e_sinr(u) += es;
      e_rate(u) += std::log2(1.0 + es);
    }
  }
  const double slots = static_cast<double>(schedule.phi_dt.size());
  LinkReport report = link_report_from_rates(sinr / slots, rate / slots, e_sinr / slots,
                                             e_rate / slots);
  report.max_interference_ratio = max_ratio;
  return report;
}

ErgodicReport aggregate(const std::vector<LinkReport>& trials, double bandwidth) {
  ErgodicReport out;
  out.trials = trials.size();
  if (trials.empty()) return out;
  const auto t = static_cast<double>(trials.size());
  std::uint64_t pairs = 0;
  std::uint64_t any = 0;
  for (const auto& r : trials) {
    out.per_trial_sum_rate.push_back(r.sum_rate);
    out.per_trial_sum_secrecy.push_back(r.sum_secrecy_rate);
    const auto in_outage = static_cast<std::uint64_t>(std::count(r.outage.begin(), r.outage.end(), true));
    out.outage_count += in_outage;
    any += in_outage > 0 ? 1 : 0;
    pairs += r.outage.size();
    out.max_interference_ratio = std::max(out.max_interference_ratio, r.max_interference_ratio);
  }
  auto mean_ci = [t](const std::vector<double>& xs, double& mean, double& ci) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    mean = sum / t;
    if (xs.size() < 2) {
      ci = 0.0;
      return;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    ci = 1.96 * std::sqrt(ss / (t - 1.0)) / std::sqrt(t);
  };
  mean_ci(out.per_trial_sum_rate, out.sum_rate_mean, out.sum_rate_ci95);
  mean_ci(out.per_trial_sum_secrecy, out.sum_secrecy_mean, out.sum_secrecy_ci95);
  out.sop = pairs ? static_cast<double>(out.outage_count) / static_cast<double>(pairs) : 0.0;
  out.sop_ci95 = pairs ? 1.96 * std::sqrt(out.sop * (1.0 - out.sop) / static_cast<double>(pairs)) : 0.0;
  out.sop_any = static_cast<double>(any) / t;
  out.sum_rate_bps = out.sum_rate_mean * bandwidth;
  return out;
}

ChannelSet block_channel_set(const ScenarioConfig& config, std::uint64_t seed,
                             std::uint64_t block) {
  Rng user_rng = derive_rng(seed, "users", block);
  const auto users = sample_user_positions(config, user_rng);
  Rng channel_rng = derive_rng(seed, "channel", block);
  return gen_channel_set(config, users, channel_rng);
}

namespace {

int resolve_workers(const ScenarioConfig& config, const MonteCarloOptions& options,
                    std::uint64_t trials) {
  int w = options.workers > 0 ? options.workers : config.workers;
  if (w <= 0) w = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(w), trials));
}

// Runs body(trial, scheduler-or-null) for every trial on contiguous chunks.
template <class MakeState, class Body>
std::vector<LinkReport> run_trials(std::uint64_t trials, int workers, MakeState make_state,
                                   Body body) {
  std::vector<LinkReport> reports(trials);
  std::vector<std::exception_ptr> errors(workers);
  auto chunk = [&](int w) {
    const std::uint64_t begin = trials * w / workers;
    const std::uint64_t end = trials * (w + 1) / workers;
    try {
      auto state = make_state();
      for (std::uint64_t t = begin; t < end; ++t) reports[t] = body(t, state);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    chunk(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(chunk, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

ErgodicReport finish(const ScenarioConfig& config, std::vector<LinkReport> reports,
                     std::string strategy, PrecoderKind precoder, std::uint64_t seed) {
  ErgodicReport out = aggregate(reports, config.bandwidth);
  out.strategy = std::move(strategy);
  out.precoder = std::string(to_string(precoder));
  out.n = config.n;
  out.m = config.m;
  out.l = config.l;
  out.k = config.k;
  out.seed = seed;
  return out;
}

}  // namespace

ErgodicReport monte_carlo(const ScenarioConfig& config, Strategy strategy,
                          PrecoderKind precoder, std::uint64_t trials, std::uint64_t seed,
                          MonteCarloOptions options) {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "monte_carlo: trials must be >= 1");
  validate(config);
  const int workers = resolve_workers(config, options, trials);
  auto make_state = [&] {
    return AttackScheduler(config, strategy, seed, [&config, seed](std::uint64_t b) {
      return block_channel_set(config, seed, b);
    });
  };
  auto body = [&](std::uint64_t t, AttackScheduler& scheduler) {
    const ChannelSet set = block_channel_set(config, seed, t);
    const AttackSchedule schedule = scheduler.schedule(t, set);
    Rng est = derive_rng(seed, "estimate", t);
    return run_block(config, set, schedule, PrecoderChoice{precoder, std::nullopt}, &est);
  };
  return finish(config, run_trials(trials, workers, make_state, body),
                std::string(to_string(strategy)), precoder, seed);
}

ErgodicReport monte_carlo_fixed(const ScenarioConfig& config, const AttackSchedule& schedule,
                                PrecoderKind precoder, std::uint64_t trials,
                                std::uint64_t seed, MonteCarloOptions options) {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "monte_carlo: trials must be >= 1");
  validate(config);
  const int workers = resolve_workers(config, options, trials);
  auto make_state = [] { return 0; };
  auto body = [&](std::uint64_t t, int&) {
    const ChannelSet set = block_channel_set(config, seed, t);
    Rng est = derive_rng(seed, "estimate", t);
    return run_block(config, set, schedule, PrecoderChoice{precoder, std::nullopt}, &est);
  };
  return finish(config, run_trials(trials, workers, make_state, body), "fixed", precoder, seed);
}

}  // namespace crack
