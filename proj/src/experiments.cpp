#include "experiments.hpp"

#include <cstdio>

namespace crack {

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kNone: return "none";
    case SweepVariable::kN: return "n";
    case SweepVariable::kM: return "m";
    case SweepVariable::kL: return "l";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(std::string_view text) {
  if (text == "none") return SweepVariable::kNone;
  if (text == "n") return SweepVariable::kN;
  if (text == "m") return SweepVariable::kM;
  if (text == "l") return SweepVariable::kL;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown sweep variable '" + std::string(text) + "' (expected n, m, l or none)");
}

std::vector<int> default_grid(SweepVariable v) {
  switch (v) {
    case SweepVariable::kN:
    case SweepVariable::kM: return {8, 16, 32, 64, 128, 256};
    case SweepVariable::kL: return {2, 4, 8, 16, 32, 64, 128};
    case SweepVariable::kNone: return {0};
  }
  return {};
}

void validate(const ExperimentSpec& spec) {
  if (spec.strategies.empty())
    throw Error(ErrorCode::kInvalidArgument, "experiment needs at least one strategy");
  if (spec.precoders.empty())
    throw Error(ErrorCode::kInvalidArgument, "experiment needs at least one precoder");
  if (spec.variable != SweepVariable::kNone && spec.values.empty())
    throw Error(ErrorCode::kInvalidArgument, "sweep value list is empty");
  if (spec.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
}

ScenarioConfig config_for_point(const ScenarioConfig& base, SweepVariable v, int value) {
  ScenarioConfig c = base;
  switch (v) {
    case SweepVariable::kNone: break;
    case SweepVariable::kN:
      if (base.l == base.n || base.l > value) c.l = value;
      c.n = value;
      break;
    case SweepVariable::kM: c.m = value; break;
    case SweepVariable::kL: c.l = value; break;
  }
  validate(c);
  return c;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const ExperimentSpec& spec) {
  validate(spec);
  const std::vector<int> values =
      spec.variable == SweepVariable::kNone ? std::vector<int>{0} : spec.values;
  std::vector<SweepRow> rows;
  for (int value : values) {
    const ScenarioConfig c = config_for_point(base, spec.variable, value);
    for (Strategy s : spec.strategies)
      for (PrecoderKind p : spec.precoders)
        rows.push_back({spec.variable, value, monte_carlo(c, s, p, spec.trials, spec.seed)});
  }
  return rows;
}

std::string format_float(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "variable,value,strategy,precoder,n,m,l,k,trials,seed,"
         "sum_rate_bps_hz,sum_rate_ci95,sum_rate_bps,sum_secrecy_rate_bps_hz,"
         "sum_secrecy_ci95,sop,sop_ci95,sop_any\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << to_string(row.variable) << ',' << row.value << ',' << r.strategy << ','
        << r.precoder << ',' << r.n << ',' << r.m << ',' << r.l << ',' << r.k << ','
        << r.trials << ',' << r.seed << ',' << format_float(r.sum_rate_mean) << ','
        << format_float(r.sum_rate_ci95) << ',' << format_float(r.sum_rate_bps)
        << ',' << format_float(r.sum_secrecy_mean) << ',' << format_float(r.sum_secrecy_ci95)
        << ',' << format_float(r.sop) << ',' << format_float(r.sop_ci95) << ','
        << format_float(r.sop_any) << '\n';
  }
}

ScatteringMatrix histogram_configuration(const ScenarioConfig& config, std::uint64_t seed,
                                         int index) {
  Rng rng = derive_rng(seed, "histogram-config", static_cast<std::uint64_t>(index));
  return sample_nr_block(config.n, config.l, config.phase_rule, rng);
}

std::vector<HistogramRow> run_histogram(const ScenarioConfig& config, int num_configs,
                                        std::uint64_t trials, std::uint64_t seed) {
  if (num_configs < 1) throw Error(ErrorCode::kInvalidArgument, "num_configs must be >= 1");
  validate(config);
  std::vector<HistogramRow> rows;
  for (int c = 0; c < num_configs; ++c) {
    const ScatteringMatrix phi = histogram_configuration(config, seed, c);
    const AttackSchedule schedule{phi, {phi}, false};
    rows.push_back({c, monte_carlo_fixed(config, schedule, PrecoderKind::kMrt, trials, seed),
                    monte_carlo_fixed(config, schedule, PrecoderKind::kZf, trials, seed)});
  }
  return rows;
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramRow>& rows) {
  out << "config,n,m,l,k,trials,seed,mrt_sum_rate_bps_hz,mrt_sum_secrecy_rate_bps_hz,mrt_sop,"
         "zf_sum_rate_bps_hz,zf_sum_secrecy_rate_bps_hz,zf_sop\n";
  for (const auto& row : rows) {
    const auto& a = row.mrt;
    const auto& b = row.zf;
    out << row.config_index << ',' << a.n << ',' << a.m << ',' << a.l << ',' << a.k << ','
        << a.trials << ',' << a.seed << ',' << format_float(a.sum_rate_mean) << ','
        << format_float(a.sum_secrecy_mean) << ',' << format_float(a.sop) << ','
        << format_float(b.sum_rate_mean) << ',' << format_float(b.sum_secrecy_mean) << ','
        << format_float(b.sop) << '\n';
  }
}

}  // namespace crack
