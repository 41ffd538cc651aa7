#include "ris.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

namespace crack {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

std::string_view to_string(ScatteringMatrix::Kind kind) {
  switch (kind) {
    case ScatteringMatrix::Kind::kDiagonal: return "diagonal";
    case ScatteringMatrix::Kind::kPermPhase: return "perm-phase";
    case ScatteringMatrix::Kind::kNrBlock: return "nr-block";
  }
  return "unknown";
}

ScatteringMatrix ScatteringMatrix::identity(int n) {
  std::vector<int> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  return ScatteringMatrix(Kind::kDiagonal, std::move(cols),
                          std::vector<cdouble>(n, cdouble(1.0, 0.0)), 0);
}

ScatteringMatrix ScatteringMatrix::diagonal(std::span<const double> phases) {
  const int n = static_cast<int>(phases.size());
  std::vector<int> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  std::vector<cdouble> coeffs(n);
  for (int i = 0; i < n; ++i) coeffs[i] = std::polar(1.0, phases[i]);
  return ScatteringMatrix(Kind::kDiagonal, std::move(cols), std::move(coeffs), 0);
}

ScatteringMatrix ScatteringMatrix::monomial(Kind kind, std::vector<int> columns,
                                            std::vector<cdouble> coefficients,
                                            int block_size) {
  const int n = static_cast<int>(columns.size());
  if (static_cast<int>(coefficients.size()) != n)
    throw Error(ErrorCode::kInvalidArgument, "monomial: size mismatch");
  std::vector<char> seen(n, 0);
  for (int i = 0; i < n; ++i) {
    const int c = columns[i];
    if (c < 0 || c >= n || seen[c])
      throw Error(ErrorCode::kInvalidArgument, "monomial: columns are not a permutation");
    seen[c] = 1;
    if (std::abs(std::abs(coefficients[i]) - 1.0) > 1e-12)
      throw Error(ErrorCode::kInvalidArgument, "monomial: coefficient is not unit modulus");
  }
  if (kind == Kind::kDiagonal) {
    for (int i = 0; i < n; ++i)
      if (columns[i] != i)
        throw Error(ErrorCode::kInvalidArgument, "diagonal kind with off-diagonal support");
  }
  if (kind == Kind::kNrBlock) {
    if (block_size < 2 || block_size % 2 != 0 || n % block_size != 0)
      throw Error(ErrorCode::kInvalidArgument, "nr-block: invalid block size");
    for (int i = 0; i < n; ++i) {
      const int c = columns[i];
      if (c == i || c / block_size != i / block_size || columns[c] != i)
        throw Error(ErrorCode::kInvalidArgument,
                    "nr-block: support must be a fixed-point-free pairing inside blocks");
    }
  }
  return ScatteringMatrix(kind, std::move(columns), std::move(coefficients), block_size);
}

CMat ScatteringMatrix::dense() const {
  const int n = size();
  CMat out = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) out(i, columns_[i]) = coefficients_[i];
  return out;
}

ScatteringMatrix ScatteringMatrix::transposed() const {
  const int n = size();
  std::vector<int> cols(n);
  std::vector<cdouble> coeffs(n);
  for (int i = 0; i < n; ++i) {
    cols[columns_[i]] = i;
    coeffs[columns_[i]] = coefficients_[i];
  }
  Kind kind = kind_;
  return ScatteringMatrix(kind, std::move(cols), std::move(coeffs), block_size_);
}

CMat ScatteringMatrix::apply(const CMat& x) const {
  if (x.rows() != size())
    throw Error(ErrorCode::kInvalidArgument, "scattering matrix dimension mismatch");
  CMat out(x.rows(), x.cols());
  for (int i = 0; i < size(); ++i) out.row(i) = coefficients_[i] * x.row(columns_[i]);
  return out;
}

CMat ScatteringMatrix::apply_minus_identity(const CMat& x) const {
  CMat out = apply(x);
  out -= x;
  return out;
}

bool ScatteringMatrix::is_symmetric(double tol) const {
  for (int i = 0; i < size(); ++i) {
    const int c = columns_[i];
    if (columns_[c] != i) return false;
    if (std::abs(coefficients_[i] - coefficients_[c]) > tol) return false;
  }
  return true;
}

double ScatteringMatrix::unitarity_error() const {
  const CMat d = dense();
  return (d * d.adjoint() - CMat::Identity(size(), size())).norm();
}

double ScatteringMatrix::asymmetry() const {
  const CMat d = dense();
  return (d - d.transpose()).norm();
}

std::string ScatteringMatrix::to_text() const {
  std::string out = "N " + std::to_string(size()) + " " + std::string(to_string(kind_));
  if (kind_ == Kind::kNrBlock) out += " " + std::to_string(block_size_);
  out += "\n";
  const CMat d = dense();
  char cell[80];
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      std::snprintf(cell, sizeof(cell), "%s%.17g,%.17g", j == 0 ? "" : " ",
                    d(i, j).real(), d(i, j).imag());
      out += cell;
    }
    out += "\n";
  }
  return out;
}

ScatteringMatrix ScatteringMatrix::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tag, kind_name;
  int n = 0;
  if (!(in >> tag >> n >> kind_name) || tag != "N" || n < 1)
    throw Error(ErrorCode::kParse, "scattering matrix text: bad header");
  Kind kind;
  int block = 0;
  if (kind_name == "diagonal") {
    kind = Kind::kDiagonal;
  } else if (kind_name == "perm-phase") {
    kind = Kind::kPermPhase;
  } else if (kind_name == "nr-block") {
    kind = Kind::kNrBlock;
    if (!(in >> block)) throw Error(ErrorCode::kParse, "scattering matrix text: missing block size");
  } else {
    throw Error(ErrorCode::kParse, "scattering matrix text: unknown kind " + kind_name);
  }
  std::vector<int> cols(n, -1);
  std::vector<cdouble> coeffs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::string cell;
      if (!(in >> cell)) throw Error(ErrorCode::kParse, "scattering matrix text: truncated");
      const auto comma = cell.find(',');
      if (comma == std::string::npos)
        throw Error(ErrorCode::kParse, "scattering matrix text: bad cell '" + cell + "'");
      const cdouble v(std::stod(cell.substr(0, comma)), std::stod(cell.substr(comma + 1)));
      if (v == cdouble(0.0, 0.0)) continue;
      if (cols[i] != -1)
        throw Error(ErrorCode::kParse, "scattering matrix text: row with two nonzeros");
      cols[i] = j;
      coeffs[i] = v;
    }
    if (cols[i] == -1) throw Error(ErrorCode::kParse, "scattering matrix text: empty row");
  }
  return monomial(kind, std::move(cols), std::move(coeffs), block);
}

ScatteringMatrix dual_unit(double phi1, double phi2) {
  return ScatteringMatrix::monomial(ScatteringMatrix::Kind::kNrBlock, {1, 0},
                                    {std::polar(1.0, phi1), std::polar(1.0, phi2)}, 2);
}

double sample_phase(Rng& rng) {
  // uniform_real_distribution gives [0, 2pi); reflect to (0, 2pi].
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  return kTwoPi - u(rng);
}

ScatteringMatrix sample_nr_block(int n, int l, PhaseRule rule, Rng& rng) {
  if (l < 2 || l % 2 != 0 || l > n || n % l != 0)
    throw Error(ErrorCode::kInvalidArgument,
                "sample_nr_block: l must be even and divide n (n=" + std::to_string(n) +
                    ", l=" + std::to_string(l) + ")");
  std::vector<int> cols(n);
  std::vector<cdouble> coeffs(n);
  std::vector<int> order(l);
  for (int base = 0; base < n; base += l) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int p = 0; p < l; p += 2) {
      const int a = base + order[p];
      const int b = base + order[p + 1];
      const double phi_ab = sample_phase(rng);
      const double phi_ba =
          rule == PhaseRule::kPiOffset ? phi_ab - std::numbers::pi : sample_phase(rng);
      cols[a] = b;
      coeffs[a] = std::polar(1.0, phi_ab);
      cols[b] = a;
      coeffs[b] = std::polar(1.0, phi_ba);
    }
  }
  return ScatteringMatrix::monomial(ScatteringMatrix::Kind::kNrBlock, std::move(cols),
                                    std::move(coeffs), l);
}

ScatteringMatrix nr_block_from_pairs(
    int n, int l, const std::vector<std::vector<std::pair<int, int>>>& pairs,
    const std::vector<std::vector<std::pair<double, double>>>& phases) {
  if (l < 2 || l % 2 != 0 || n % l != 0)
    throw Error(ErrorCode::kInvalidArgument, "nr_block_from_pairs: invalid block size");
  const std::size_t blocks = static_cast<std::size_t>(n / l);
  if (pairs.size() != blocks || phases.size() != blocks)
    throw Error(ErrorCode::kInvalidArgument, "nr_block_from_pairs: one pairing per block required");
  std::vector<int> cols(n, -1);
  std::vector<cdouble> coeffs(n);
  for (std::size_t g = 0; g < blocks; ++g) {
    if (pairs[g].size() != static_cast<std::size_t>(l / 2) || phases[g].size() != pairs[g].size())
      throw Error(ErrorCode::kInvalidArgument, "nr_block_from_pairs: block needs l/2 pairs");
    const int base = static_cast<int>(g) * l;
    for (std::size_t p = 0; p < pairs[g].size(); ++p) {
      const auto [a_local, b_local] = pairs[g][p];
      if (a_local < 0 || a_local >= l || b_local < 0 || b_local >= l)
        throw Error(ErrorCode::kInvalidArgument, "nr_block_from_pairs: index outside block");
      const int a = base + a_local;
      const int b = base + b_local;
      cols[a] = b;
      coeffs[a] = std::polar(1.0, phases[g][p].first);
      cols[b] = a;
      coeffs[b] = std::polar(1.0, phases[g][p].second);
    }
  }
  for (int c : cols)
    if (c == -1) throw Error(ErrorCode::kInvalidArgument, "nr_block_from_pairs: element left unpaired");
  return ScatteringMatrix::monomial(ScatteringMatrix::Kind::kNrBlock, std::move(cols),
                                    std::move(coeffs), l);
}

ScatteringMatrix sample_nd_ris(int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "sample_nd_ris: n must be >= 1");
  std::vector<int> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(cols.begin(), cols.end(), rng);
  std::vector<cdouble> coeffs(n);
  for (auto& c : coeffs) c = std::polar(1.0, sample_phase(rng));
  const auto kind = n == 1 ? ScatteringMatrix::Kind::kDiagonal : ScatteringMatrix::Kind::kPermPhase;
  return ScatteringMatrix::monomial(kind, std::move(cols), std::move(coeffs));
}

ScatteringMatrix diagonal_config(std::span<const double> phases) {
  return ScatteringMatrix::diagonal(phases);
}

ScatteringMatrix random_diagonal(int n, Rng& rng) {
  std::vector<double> phases(n);
  for (auto& p : phases) p = sample_phase(rng);
  return ScatteringMatrix::diagonal(phases);
}

double ha_objective(const ChannelSet& set, const ScatteringMatrix& phi) {
  // The structural -I terms cancel in the uplink/downlink difference.
  const CMat diff = phi.apply(set.los_ur) - phi.transposed().apply(set.los_ur);  // N x K
  const CMat projected = set.los_rb * diff;                                       // M x K
  double total = 0.0;
  for (int u = 0; u < set.k(); ++u) total += set.beta(u) * projected.col(u).squaredNorm();
  return total;
}

HaResult ha_search(const ChannelSet& set, int num_candidates, int n, int l,
                   PhaseRule rule, Rng& rng) {
  if (num_candidates < 1)
    throw Error(ErrorCode::kInvalidArgument, "ha_search: num_candidates must be >= 1");
  std::optional<ScatteringMatrix> best;
  double best_value = 0.0;
  std::vector<double> values;
  values.reserve(num_candidates);
  for (int c = 0; c < num_candidates; ++c) {
    ScatteringMatrix candidate = sample_nr_block(n, l, rule, rng);
    const double value = ha_objective(set, candidate);
    values.push_back(value);
    if (!best || value > best_value) {
      best = std::move(candidate);
      best_value = value;
    }
  }
  return HaResult{std::move(*best), best_value, std::move(values)};
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kNone: return "none";
    case Strategy::kNrBlind: return "nr-blind";
    case Strategy::kNrHa: return "nr-ha";
    case Strategy::kNdRis: return "nd-ris";
    case Strategy::kDris1: return "dris1";
    case Strategy::kDris2: return "dris2";
    case Strategy::kDris3: return "dris3";
    case Strategy::kJammer: return "jammer";
  }
  return "unknown";
}

std::vector<Strategy> all_strategies() {
  return {Strategy::kNone,  Strategy::kNrBlind, Strategy::kNrHa,  Strategy::kNdRis,
          Strategy::kDris1, Strategy::kDris2,   Strategy::kDris3, Strategy::kJammer};
}

Strategy parse_strategy(std::string_view text) {
  for (Strategy s : all_strategies())
    if (to_string(s) == text) return s;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(text) + "'");
}

AttackSchedule attack_schedule(Strategy strategy, const ScenarioConfig& config,
                               const ChannelSet& knowledge, Rng& rng) {
  const int n = config.n;
  const auto id = ScatteringMatrix::identity(n);
  switch (strategy) {
    case Strategy::kNone:
      return {id, {id}, false};
    case Strategy::kJammer:
      return {id, {id}, true};
    case Strategy::kNrBlind: {
      auto phi = sample_nr_block(n, config.l, config.phase_rule, rng);
      return {phi, {phi}, false};
    }
    case Strategy::kNrHa: {
      auto result = ha_search(knowledge, config.ha_candidates, n, config.l,
                              config.ha_phase_rule, rng);
      return {result.best, {result.best}, false};
    }
    case Strategy::kNdRis: {
      auto phi = sample_nd_ris(n, rng);
      return {phi, {phi}, false};
    }
    case Strategy::kDris1: {
      auto pt = random_diagonal(n, rng);
      auto dt = random_diagonal(n, rng);
      return {pt, {dt}, false};
    }
    case Strategy::kDris2:
      return {id, {random_diagonal(n, rng)}, false};
    case Strategy::kDris3: {
      AttackSchedule s{random_diagonal(n, rng), {}, false};
      for (int i = 0; i < config.dris3_subslots; ++i) s.phi_dt.push_back(random_diagonal(n, rng));
      return s;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy");
}

AttackScheduler::AttackScheduler(ScenarioConfig config, Strategy strategy,
                                 std::uint64_t seed, ChannelProvider provider)
    : config_(std::move(config)),
      strategy_(strategy),
      seed_(seed),
      provider_(std::move(provider)) {}

AttackSchedule AttackScheduler::schedule(std::uint64_t block, const ChannelSet& current) {
  if (strategy_ != Strategy::kNrHa) {
    Rng rng = derive_rng(seed_, "attack", block);
    return attack_schedule(strategy_, config_, current, rng);
  }
  const auto hold = static_cast<std::uint64_t>(config_.ha_hold_blocks);
  const std::uint64_t epoch = block / hold;
  if (!cached_epoch_ || cached_epoch_->first != epoch) {
    const std::uint64_t first = epoch * hold;
    Rng rng = derive_rng(seed_, "attack-ha", epoch);
    if (first == block) {
      cached_epoch_.emplace(epoch, attack_schedule(strategy_, config_, current, rng));
    } else {
      if (!provider_)
        throw Error(ErrorCode::kState, "nr-ha scheduling needs a channel provider");
      const ChannelSet knowledge = provider_(first);
      cached_epoch_.emplace(epoch, attack_schedule(strategy_, config_, knowledge, rng));
    }
  }
  return cached_epoch_->second;
}

}  // namespace crack
