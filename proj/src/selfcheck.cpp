#include "selfcheck.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "env_bridge.hpp"
#include "tdd_sim.hpp"

namespace crack {

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

ScenarioConfig small_config(const ScenarioConfig& base) {
  ScenarioConfig c = base;
  c.m = 8;
  c.k = 3;
  c.n = 16;
  c.l = 4;
  c.noisy_estimation = false;
  return c;
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const ScenarioConfig& base, int samples) {
  const ScenarioConfig c = small_config(base);
  std::vector<CheckResult> out;
  auto record = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  double worst_unitary = 0.0;
  double worst_sym_gap = 0.0;
  double min_nr_gap = 1e300;
  double worst_power = 0.0;
  double worst_zf = 0.0;
  bool rate_identities = true;
  for (int s = 0; s < samples; ++s) {
    const ChannelSet set = block_channel_set(c, c.seed, static_cast<std::uint64_t>(s));
    Rng rng = derive_rng(c.seed, "selfcheck", static_cast<std::uint64_t>(s));

    const auto nr = sample_nr_block(c.n, c.l, PhaseRule::kPiOffset, rng);
    const auto nd = sample_nd_ris(c.n, rng);
    const auto diag = random_diagonal(c.n, rng);
    for (const auto* phi : {&nr, &nd, &diag})
      worst_unitary = std::max(worst_unitary, phi->unitarity_error());

    const CMat up = uplink_composite(set, diag);
    const CMat gap = downlink_actual(set, diag) - up.transpose();
    worst_sym_gap = std::max(worst_sym_gap, gap.norm() / up.norm());

    const CMat up_nr = uplink_composite(set, nr);
    min_nr_gap = std::min(min_nr_gap,
                          (downlink_actual(set, nr) - up_nr.transpose()).norm() / up_nr.norm());

    for (auto kind : {PrecoderKind::kMrt, PrecoderKind::kZf}) {
      const Precoder p = make_precoder(kind, up, c.p_total, c.zf_cond_cap);
      worst_power = std::max(worst_power, std::abs(p.w.squaredNorm() - c.p_total) / c.p_total);
    }
    const Precoder z = zf(up, c.p_total, c.zf_cond_cap);
    CMat eff = up.transpose() * z.w / z.xi;
    eff.diagonal().array() -= 1.0;
    worst_zf = std::max(worst_zf, eff.cwiseAbs().maxCoeff());

    const AttackSchedule sched{nr, {nr}, false};
    const LinkReport r = run_block(c, set, sched, PrecoderChoice{PrecoderKind::kZf, std::nullopt});
    for (int u = 0; u < c.k; ++u) {
      const double expect = std::max(0.0, r.rate(u) - r.eve_rate(u));
      rate_identities = rate_identities && r.rate(u) >= 0.0 && std::isfinite(r.rate(u)) &&
                        std::abs(r.secrecy_rate(u) - expect) <= 1e-12 &&
                        r.outage[u] == (r.rate(u) < r.eve_rate(u));
    }
  }
  record("unitarity", worst_unitary < 1e-10, "max ||PP^H-I||_F = " + sci(worst_unitary));
  record("reciprocity-symmetric", worst_sym_gap < 1e-12, "max relative gap = " + sci(worst_sym_gap));
  record("non-reciprocity-nr", min_nr_gap > 1e-3, "min relative gap = " + sci(min_nr_gap));
  record("power-constraint", worst_power < 1e-9, "max relative error = " + sci(worst_power));
  record("zf-nulling", worst_zf < 1e-8, "max |H^T W/xi - I| = " + sci(worst_zf));
  record("rate-identities", rate_identities, "r_s = [r - r_e]^+, outage = r < r_e");

  // Reproducibility: two identical runs, different worker counts.
  const auto a = monte_carlo(c, Strategy::kNrBlind, PrecoderKind::kZf, 20, c.seed, {1});
  const auto b = monte_carlo(c, Strategy::kNrBlind, PrecoderKind::kZf, 20, c.seed, {3});
  record("reproducibility", a.per_trial_sum_rate == b.per_trial_sum_rate,
         "worker count does not change per-trial results");

  // Env decode keeps the power constraint.
  Rng rng = derive_rng(c.seed, "selfcheck-env", 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EnvAction act{Eigen::MatrixXd(c.m, c.k), Eigen::MatrixXd(c.m, c.k)};
  for (Eigen::Index i = 0; i < act.w_amp.size(); ++i) {
    act.w_amp.data()[i] = u(rng);
    act.w_phase.data()[i] = u(rng);
  }
  const Precoder dec = decode_action(act, c.p_total);
  const double derr = std::abs(dec.w.squaredNorm() - c.p_total) / c.p_total;
  record("env-decode-power", derr < 1e-9, "relative error = " + sci(derr));
  return out;
}

}  // namespace crack
