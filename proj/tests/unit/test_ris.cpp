#include <algorithm>
#include <map>
#include <numbers>
#include <set>

#include "doctest.h"
#include "ris.hpp"
#include "support.hpp"
#include "tdd_sim.hpp"

using namespace crack;
using testsupport::make_rng;

namespace {

constexpr double kPi = std::numbers::pi;

// Structural invariants of a block NR matrix, checked on the dense form.
void check_nr_structure(const ScatteringMatrix& phi, int l) {
  const CMat d = phi.dense();
  const int n = phi.size();
  for (int r = 0; r < n; ++r) {
    int nonzero_row = 0, nonzero_col = 0;
    for (int c = 0; c < n; ++c) {
      if (std::abs(d(r, c)) > 0) {
        ++nonzero_row;
        CHECK(std::abs(std::abs(d(r, c)) - 1.0) < 1e-12);
        CHECK(r / l == c / l);
      }
      if (std::abs(d(c, r)) > 0) ++nonzero_col;
    }
    CHECK(nonzero_row == 1);
    CHECK(nonzero_col == 1);
    CHECK(d(r, r) == cdouble(0, 0));
    // Involution: the partner of my partner is me.
    CHECK(phi.column_of(phi.column_of(r)) == r);
  }
  CHECK(phi.unitarity_error() < 1e-10);
}

}  // namespace

TEST_CASE("dual_unit examples") {
  const CMat d = dual_unit(0.0, kPi).dense();
  CHECK(std::abs(d(0, 0)) == 0.0);
  CHECK(std::abs(d(1, 1)) == 0.0);
  CHECK(std::abs(d(0, 1) - cdouble(1, 0)) < 1e-15);
  CHECK(std::abs(d(1, 0) - cdouble(-1, 0)) < 1e-15);

  auto rng = make_rng(1);
  for (int t = 0; t < 100; ++t) {
    const double a = testsupport::uniform_real(rng, -10, 10);
    const double b = testsupport::uniform_real(rng, -10, 10);
    CHECK(dual_unit(a, b).unitarity_error() < 1e-12);
    CHECK(dual_unit(a, a).is_symmetric());
    CHECK_FALSE(dual_unit(a, a + 0.5).is_symmetric());
  }
}

TEST_CASE("sample_phase lies in (0, 2pi]") {
  auto rng = make_rng(2);
  for (int t = 0; t < 100000; ++t) {
    const double p = sample_phase(rng);
    CHECK(p > 0.0);
    CHECK(p <= 2 * kPi);
  }
}

TEST_CASE("sample_nr_block: two elements under the pi-offset rule") {
  auto rng = make_rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto phi = sample_nr_block(2, 2, PhaseRule::kPiOffset, rng);
    REQUIRE(phi.size() == 2);
    CHECK(phi.column_of(0) == 1);
    CHECK(phi.column_of(1) == 0);
    const double diff = std::arg(phi.coefficient(0) / phi.coefficient(1));
    CHECK(std::abs(std::abs(diff) - kPi) < 1e-12);
  }
}

TEST_CASE("nr_block_from_pairs reproduces the six-element pairing pattern") {
  // Pairing {(1,5),(2,3),(4,6)} in 1-based element labels.
  const std::vector<std::vector<std::pair<int, int>>> pairs{{{0, 4}, {1, 2}, {3, 5}}};
  const std::vector<std::vector<std::pair<double, double>>> phases{
      {{0.1, 0.1 - kPi}, {0.2, 0.2 - kPi}, {0.3, 0.3 - kPi}}};
  const CMat d = nr_block_from_pairs(6, 6, pairs, phases).dense();
  const int pattern[6][6] = {{0, 0, 0, 0, 1, 0}, {0, 0, 1, 0, 0, 0}, {0, 1, 0, 0, 0, 0},
                             {0, 0, 0, 0, 0, 1}, {1, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0}};
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) CHECK((std::abs(d(r, c)) > 0) == (pattern[r][c] == 1));
  CHECK(std::abs(d(0, 4) - std::polar(1.0, 0.1)) < 1e-15);
  CHECK(std::abs(d(4, 0) + std::polar(1.0, 0.1)) < 1e-15);

  CHECK_THROWS_AS(nr_block_from_pairs(6, 6, {{{0, 0}, {1, 2}, {3, 5}}}, phases), Error);
  CHECK_THROWS_AS(nr_block_from_pairs(6, 6, {{{0, 4}, {1, 2}}}, phases), Error);
}

TEST_CASE("sample_nr_block invariants (property run)") {
  auto rng = make_rng(4);
  for (int t = 0; t < 300; ++t) {
    const int l = 2 * testsupport::uniform_int(rng, 1, 8);
    const int n = l * testsupport::uniform_int(rng, 1, 4);
    const auto rule = t % 2 ? PhaseRule::kPiOffset : PhaseRule::kIndependent;
    const auto phi = sample_nr_block(n, l, rule, rng);
    CHECK(phi.kind() == ScatteringMatrix::Kind::kNrBlock);
    CHECK(phi.block_size() == l);
    check_nr_structure(phi, l);
    if (rule == PhaseRule::kPiOffset) {
      double worst = 0.0;
      for (int r = 0; r < n; ++r)
        worst = std::max(worst, std::abs(phi.coefficient(r) + phi.coefficient(phi.column_of(r))));
      CHECK(worst < 1e-12);
      CHECK(phi.asymmetry() > 1e-6);
    }
  }
}

TEST_CASE("sample_nr_block pairing is uniform over perfect matchings") {
  // Four elements admit three matchings; each should appear a third of the time.
  auto rng = make_rng(5);
  std::map<int, int> counts;
  const int draws = 30000;
  for (int t = 0; t < draws; ++t) counts[sample_nr_block(4, 4, PhaseRule::kPiOffset, rng).column_of(0)]++;
  REQUIRE(counts.size() == 3);
  for (const auto& [partner, count] : counts) {
    CHECK(partner != 0);
    const double p = 1.0 / 3.0, sd = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(count - draws * p) < 4 * sd);
  }
}

TEST_CASE("sample_nr_block rejects invalid block sizes") {
  auto rng = make_rng(6);
  CHECK_THROWS_AS(sample_nr_block(6, 3, PhaseRule::kPiOffset, rng), Error);
  CHECK_THROWS_AS(sample_nr_block(8, 6, PhaseRule::kPiOffset, rng), Error);
  CHECK_THROWS_AS(sample_nr_block(4, 8, PhaseRule::kPiOffset, rng), Error);
  CHECK_THROWS_AS(sample_nr_block(4, 0, PhaseRule::kPiOffset, rng), Error);
}

TEST_CASE("sample_nd_ris structure") {
  auto rng = make_rng(7);
  const auto one = sample_nd_ris(1, rng);
  CHECK(one.kind() == ScatteringMatrix::Kind::kDiagonal);
  CHECK(std::abs(std::abs(one.dense()(0, 0)) - 1.0) < 1e-15);

  for (int t = 0; t < 100; ++t) {
    const int n = testsupport::uniform_int(rng, 2, 40);
    const CMat d = sample_nd_ris(n, rng).dense();
    const Eigen::MatrixXd mag = d.cwiseAbs();
    for (int i = 0; i < n; ++i) {
      CHECK(mag.row(i).sum() == doctest::Approx(1.0));
      CHECK(mag.col(i).sum() == doctest::Approx(1.0));
    }
    CHECK((d * d.adjoint() - CMat::Identity(n, n)).norm() < 1e-10);
  }
}

TEST_CASE("sample_nd_ris at n=3: every permutation appears, symmetry iff an involution") {
  auto rng = make_rng(8);
  const int draws = 60000;
  std::map<std::vector<int>, int> counts;
  int symmetric_identity = 0;
  for (int t = 0; t < draws; ++t) {
    const auto phi = sample_nd_ris(3, rng);
    std::vector<int> perm(phi.columns().begin(), phi.columns().end());
    counts[perm]++;
    if (perm == std::vector<int>{0, 1, 2}) {
      CHECK(phi.is_symmetric());
      ++symmetric_identity;
    }
  }
  REQUIRE(counts.size() == 6);
  const double p = 1.0 / 6.0, sd = std::sqrt(draws * p * (1 - p));
  for (const auto& [perm, count] : counts) CHECK(std::abs(count - draws * p) < 4 * sd);
  CHECK(std::abs(symmetric_identity - draws * p) < 4 * sd);
}

TEST_CASE("diagonal_config") {
  const std::vector<double> zeros(5, 0.0);
  const auto id = diagonal_config(zeros);
  CHECK((id.dense() - CMat::Identity(5, 5)).norm() == 0.0);
  auto rng = make_rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto d = random_diagonal(testsupport::uniform_int(rng, 1, 30), rng);
    CHECK(d.is_symmetric());
    CHECK(d.kind() == ScatteringMatrix::Kind::kDiagonal);
    CHECK(d.unitarity_error() < 1e-12);
  }
}

TEST_CASE("monomial validation") {
  using K = ScatteringMatrix::Kind;
  const cdouble u(1, 0);
  CHECK_THROWS_AS(ScatteringMatrix::monomial(K::kPermPhase, {0, 0}, {u, u}), Error);
  CHECK_THROWS_AS(ScatteringMatrix::monomial(K::kPermPhase, {1, 0}, {u, cdouble(2, 0)}), Error);
  CHECK_THROWS_AS(ScatteringMatrix::monomial(K::kDiagonal, {1, 0}, {u, u}), Error);
  CHECK_THROWS_AS(ScatteringMatrix::monomial(K::kNrBlock, {0, 1}, {u, u}, 2), Error);
  CHECK_NOTHROW(ScatteringMatrix::monomial(K::kNrBlock, {1, 0}, {u, -u}, 2));
}

TEST_CASE("monomial products agree with dense products") {
  auto rng = make_rng(10);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 * testsupport::uniform_int(rng, 1, 6);
    const auto phi = t % 2 ? sample_nd_ris(n, rng) : sample_nr_block(n, n, PhaseRule::kIndependent, rng);
    const CMat x = testsupport::random_cmat(n, 3, rng);
    CHECK((phi.apply(x) - phi.dense() * x).norm() < 1e-12);
    CHECK((phi.apply_minus_identity(x) - (phi.dense() - CMat::Identity(n, n)) * x).norm() < 1e-12);
    CHECK((phi.transposed().dense() - phi.dense().transpose()).norm() == 0.0);
    CHECK(phi.asymmetry() == doctest::Approx((phi.dense() - phi.dense().transpose()).norm()));
  }
}

TEST_CASE("text export round trip") {
  auto rng = make_rng(11);
  for (const auto& phi : {sample_nr_block(8, 4, PhaseRule::kPiOffset, rng), sample_nd_ris(5, rng),
                          random_diagonal(3, rng)}) {
    const std::string text = phi.to_text();
    const auto back = ScatteringMatrix::from_text(text);
    CHECK(back.kind() == phi.kind());
    CHECK((back.dense() - phi.dense()).norm() == 0.0);
    CHECK(back.to_text() == text);
  }
  const std::string header = sample_nr_block(4, 2, PhaseRule::kPiOffset, rng).to_text();
  CHECK(header.rfind("N 4 nr-block 2\n", 0) == 0);
  CHECK_THROWS_AS(ScatteringMatrix::from_text("N 2 diagonal\n1,0 0,0\n"), Error);
  CHECK_THROWS_AS(ScatteringMatrix::from_text("garbage"), Error);
}

TEST_CASE("ha_objective vanishes on symmetric surfaces and matches a dense oracle") {
  auto rng = make_rng(12);
  for (int t = 0; t < 30; ++t) {
    const ChannelSet s = testsupport::random_channel_set(4, 3, 8, rng);
    CHECK(ha_objective(s, random_diagonal(8, rng)) == 0.0);
    const auto phi = sample_nr_block(8, 4, PhaseRule::kPiOffset, rng);
    const CMat d = phi.dense();
    const CMat id = CMat::Identity(8, 8);
    double want = 0.0;
    for (int u = 0; u < 3; ++u) {
      const CVec up = s.los_rb * (d - id) * s.los_ur.col(u);
      const CVec down = s.los_rb * (d.transpose() - id) * s.los_ur.col(u);
      want += s.beta(u) * (up - down).squaredNorm();
    }
    CHECK(ha_objective(s, phi) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("ha_search returns the maximum of its candidates") {
  auto rng = make_rng(13);
  const ChannelSet s = testsupport::random_channel_set(4, 2, 8, rng);
  Rng single = make_rng(100), replay = make_rng(100);
  const auto one = ha_search(s, 1, 8, 4, PhaseRule::kPiOffset, single);
  CHECK((one.best.dense() - sample_nr_block(8, 4, PhaseRule::kPiOffset, replay).dense()).norm() ==
        0.0);

  Rng a = make_rng(101), b = make_rng(101), c = make_rng(101);
  const auto r1 = ha_search(s, 50, 8, 4, PhaseRule::kPiOffset, a);
  const auto r2 = ha_search(s, 50, 8, 4, PhaseRule::kPiOffset, b);
  CHECK((r1.best.dense() - r2.best.dense()).norm() == 0.0);
  REQUIRE(r1.candidate_objectives.size() == 50);
  CHECK(r1.best_objective == *std::max_element(r1.candidate_objectives.begin(),
                                               r1.candidate_objectives.end()));
  // Recompute every candidate from the same stream.
  for (double v : r1.candidate_objectives)
    CHECK(v == ha_objective(s, sample_nr_block(8, 4, PhaseRule::kPiOffset, c)));
  CHECK(ha_objective(s, r1.best) == r1.best_objective);
  CHECK_THROWS_AS(ha_search(s, 0, 8, 4, PhaseRule::kPiOffset, a), Error);
}

TEST_CASE("ha_search winner beats the median candidate in the reference scene") {
  ScenarioConfig c;
  int strictly = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ChannelSet s = block_channel_set(c, seed, 0);
    Rng rng = derive_rng(seed, "ha-test", 0);
    auto r = ha_search(s, 200, c.n, c.l, PhaseRule::kPiOffset, rng);
    std::vector<double> sorted = r.candidate_objectives;
    std::nth_element(sorted.begin(), sorted.begin() + 100, sorted.end());
    if (r.best_objective > sorted[100]) ++strictly;
  }
  CHECK(strictly == 100);
}

TEST_CASE("attack_schedule per strategy") {
  ScenarioConfig c;
  c.m = 4;
  c.k = 2;
  c.n = 8;
  c.l = 4;
  c.ha_candidates = 10;
  auto rng = make_rng(14);
  const ChannelSet s = testsupport::random_channel_set(4, 2, 8, rng);
  const CMat id = CMat::Identity(8, 8);

  auto none = attack_schedule(Strategy::kNone, c, s, rng);
  CHECK((none.phi_pt.dense() - id).norm() == 0.0);
  REQUIRE(none.phi_dt.size() == 1);
  CHECK((none.phi_dt[0].dense() - id).norm() == 0.0);
  CHECK_FALSE(none.jammer_active);

  auto blind = attack_schedule(Strategy::kNrBlind, c, s, rng);
  REQUIRE(blind.phi_dt.size() == 1);
  CHECK(blind.phi_pt.kind() == ScatteringMatrix::Kind::kNrBlock);
  CHECK((blind.phi_pt.dense() - blind.phi_dt[0].dense()).norm() == 0.0);

  auto ha = attack_schedule(Strategy::kNrHa, c, s, rng);
  CHECK(ha.phi_pt.kind() == ScatteringMatrix::Kind::kNrBlock);
  CHECK((ha.phi_pt.dense() - ha.phi_dt[0].dense()).norm() == 0.0);

  auto nd = attack_schedule(Strategy::kNdRis, c, s, rng);
  CHECK(nd.phi_pt.kind() == ScatteringMatrix::Kind::kPermPhase);
  CHECK((nd.phi_pt.dense() - nd.phi_dt[0].dense()).norm() == 0.0);

  auto d1 = attack_schedule(Strategy::kDris1, c, s, rng);
  CHECK(d1.phi_pt.kind() == ScatteringMatrix::Kind::kDiagonal);
  CHECK(d1.phi_dt[0].kind() == ScatteringMatrix::Kind::kDiagonal);
  CHECK((d1.phi_pt.dense() - d1.phi_dt[0].dense()).norm() > 0.0);

  auto d2 = attack_schedule(Strategy::kDris2, c, s, rng);
  CHECK((d2.phi_pt.dense() - id).norm() == 0.0);
  CHECK(d2.phi_dt[0].kind() == ScatteringMatrix::Kind::kDiagonal);
  CHECK((d2.phi_dt[0].dense() - id).norm() > 0.0);

  auto d3 = attack_schedule(Strategy::kDris3, c, s, rng);
  REQUIRE(d3.phi_dt.size() == 4);
  for (std::size_t i = 1; i < 4; ++i)
    CHECK((d3.phi_dt[i].dense() - d3.phi_dt[0].dense()).norm() > 0.0);

  auto jam = attack_schedule(Strategy::kJammer, c, s, rng);
  CHECK(jam.jammer_active);
  CHECK((jam.phi_pt.dense() - id).norm() == 0.0);

  CHECK_THROWS_AS(parse_strategy("bogus"), Error);
  for (Strategy st : all_strategies()) CHECK(parse_strategy(to_string(st)) == st);
}

TEST_CASE("AttackScheduler holds the HA winner for five blocks") {
  ScenarioConfig c;
  c.m = 4;
  c.k = 2;
  c.n = 8;
  c.l = 8;
  c.ha_candidates = 20;
  const std::uint64_t seed = 77;
  int provider_calls = 0;
  AttackScheduler sched(c, Strategy::kNrHa, seed, [&](std::uint64_t b) {
    ++provider_calls;
    return block_channel_set(c, seed, b);
  });
  std::vector<CMat> phis;
  for (std::uint64_t b = 0; b < 11; ++b)
    phis.push_back(sched.schedule(b, block_channel_set(c, seed, b)).phi_pt.dense());
  for (int b = 1; b < 5; ++b) CHECK((phis[b] - phis[0]).norm() == 0.0);
  CHECK((phis[5] - phis[0]).norm() > 0.0);
  for (int b = 6; b < 10; ++b) CHECK((phis[b] - phis[5]).norm() == 0.0);
  CHECK((phis[10] - phis[5]).norm() > 0.0);
  // One search per epoch at most: blocks 0..10 span three epochs.
  CHECK(provider_calls <= 3);

  // Any block of an epoch, visited first, yields the same winner.
  AttackScheduler late(c, Strategy::kNrHa, seed,
                       [&](std::uint64_t b) { return block_channel_set(c, seed, b); });
  CHECK((late.schedule(7, block_channel_set(c, seed, 7)).phi_pt.dense() - phis[5]).norm() == 0.0);

  // Epoch e searches against block e * hold.
  Rng rng = derive_rng(seed, "attack-ha", 1);
  const auto expect = ha_search(block_channel_set(c, seed, 5), c.ha_candidates, c.n, c.l,
                                c.ha_phase_rule, rng);
  CHECK((expect.best.dense() - phis[5]).norm() == 0.0);
}

TEST_CASE("AttackScheduler draws a fresh blind configuration each block") {
  ScenarioConfig c;
  c.m = 4;
  c.k = 2;
  c.n = 8;
  c.l = 8;
  AttackScheduler sched(c, Strategy::kNrBlind, 5,
                        [&](std::uint64_t b) { return block_channel_set(c, 5, b); });
  const auto s = block_channel_set(c, 5, 0);
  const CMat a = sched.schedule(0, s).phi_pt.dense();
  const CMat b = sched.schedule(1, s).phi_pt.dense();
  const CMat again = sched.schedule(0, s).phi_pt.dense();
  CHECK((a - b).norm() > 0.0);
  CHECK((a - again).norm() == 0.0);
}
