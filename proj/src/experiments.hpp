#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tdd_sim.hpp"

namespace crack {

enum class SweepVariable { kNone, kN, kM, kL };

std::string_view to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view text);

struct ExperimentSpec {
  SweepVariable variable = SweepVariable::kNone;
  std::vector<int> values;  // ignored for kNone
  std::vector<Strategy> strategies;
  std::vector<PrecoderKind> precoders;
  std::uint64_t trials = 3000;
  std::uint64_t seed = 1;
};

// Grid values used when a sweep names no explicit list.
std::vector<int> default_grid(SweepVariable v);

void validate(const ExperimentSpec& spec);

struct SweepRow {
  SweepVariable variable = SweepVariable::kNone;
  int value = 0;
  ErgodicReport report;
};

// Applies one grid value to a base config. Sweeping n keeps a full-surface
// block (l == n) when the base config has one; otherwise l is kept, capped
// at the new n.
ScenarioConfig config_for_point(const ScenarioConfig& base, SweepVariable v, int value);

// Rows in grid order: value, then strategy, then precoder.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const ExperimentSpec& spec);

// Column order is stable; docs/csv.md lists it.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct HistogramRow {
  int config_index = 0;
  ErgodicReport mrt;
  ErgodicReport zf;
};

// Samples num_configs NR-RIS configurations and evaluates each one, held
// fixed, over `trials` channel realizations with both precoders. The same
// channel realizations are reused for every configuration.
std::vector<HistogramRow> run_histogram(const ScenarioConfig& config, int num_configs,
                                        std::uint64_t trials, std::uint64_t seed);
void write_histogram_csv(std::ostream& out, const std::vector<HistogramRow>& rows);

// Configuration used for histogram row `index`.
ScatteringMatrix histogram_configuration(const ScenarioConfig& config, std::uint64_t seed,
                                         int index);

// "%.9g"
std::string format_float(double x);

}  // namespace crack
