#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "autotier/autotiering.hpp"
#include "support.hpp"

using namespace autotier;
using autotier::test::make_tier;
using autotier::test::rel_close;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CalibrationRecord flat_record(double latency_us) {
  CalibrationRecord r;
  r.slope = 0.0;
  r.intercept_us = latency_us;
  return r;
}

// Matrices built directly from (iops, mbps, gb) usage per cell.
CapacityMatrices matrices_from(const std::vector<std::vector<ResourceVector>>& cap,
                               std::span<const TierSpec> tiers) {
  CapacityMatrices m;
  m.cap = cap;
  m.ratio.assign(cap.size(), std::vector<PerKind<double>>(cap.front().size()));
  m.feasible.assign(cap.size(), std::vector<bool>(cap.front().size(), true));
  normalize_and_gate(m, tiers);
  return m;
}

// Reference profit evaluated straight from the objective's definition.
double reference_profit(const std::vector<TierId>& a, const std::vector<TierId>& prev,
                        const CapacityMatrices& m, const Matrix& g, const std::vector<double>& w,
                        const PolicyWeights& pw) {
  double total = 0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    const std::size_t t = tier_index(a[v]);
    const double gain = pw.alpha.throughput * m.ratio[t][v].throughput +
                        pw.alpha.bandwidth * m.ratio[t][v].bandwidth +
                        pw.alpha.storage * m.ratio[t][v].storage;
    const double cost = a[v] == prev[v] ? 0.0 : g[t][v];
    total += w[v] * (gain - pw.beta * cost);
  }
  return total;
}

}  // namespace

TEST_CASE("capacity matrices follow the IOPS and bandwidth identities") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 1e6, 1e4, 1e4)};
  std::vector<VmdkSnapshot> vmdks(2);
  vmdks[0] = {TierId{1}, 100, 1, 1e9, 4096, 0};
  vmdks[1] = {TierId{1}, 30, 1, 1e9, 4096, 0};
  const std::vector<CalibrationRecord> cal = {flat_record(20), flat_record(-1500)};

  const CapacityMatrices m = cal_capacity_matrices(cal, vmdks, tiers);
  CHECK(rel_close(m.cap[0][0].iops(), 50000));
  CHECK(rel_close(m.cap[0][0].mbps(), 204.8));
  CHECK(m.cap[0][0].gb() == 100);
  CHECK(m.cap[0][1].iops() == 0);
  CHECK(m.cap[0][1].mbps() == 0);
  CHECK(m.cap[0][1].gb() == 30);
}

TEST_CASE("predicted throughput is capped at demand") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 1e6, 1e4, 1e4)};
  const std::vector<VmdkSnapshot> vmdks = {{TierId{1}, 10, 1, 1200, 8192, 0}};
  const CapacityMatrices m = cal_capacity_matrices(std::vector{flat_record(20)}, vmdks, tiers);
  CHECK(m.cap[0][0].iops() == 1200);
  CHECK(rel_close(m.cap[0][0].mbps(), 1200 * 8192 / 1e6));
}

TEST_CASE("capacity matrices use the cross-tier latency estimate") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 1e6, 1e4, 1e4),
                                       make_tier(2, 50, 1e6, 1e4, 1e4)};
  CalibrationRecord r;
  r.slope = 2;
  r.intercept_us = 100;  // measured on tier 1
  const std::vector<VmdkSnapshot> vmdks = {{TierId{1}, 10, 1, 1e9, 4096, 0}};
  const CapacityMatrices m = cal_capacity_matrices(std::vector{r}, vmdks, tiers);
  CHECK(rel_close(m.cap[0][0].iops(), 1e6 / 100));
  CHECK(rel_close(m.cap[1][0].iops(), 1e6 / 160));
}

TEST_CASE("normalization and gating") {
  std::vector<TierSpec> tiers = {make_tier(1, 20, 100000, 1000, 480)};
  const CapacityMatrices m = matrices_from(
      {{ResourceVector(50000, 204.8, 100), ResourceVector(1, 1, 960), ResourceVector(0, 0, 0)}},
      tiers);
  CHECK(m.feasible[0][0]);
  CHECK(rel_close(m.ratio[0][0].throughput, 0.5));
  CHECK(rel_close(m.ratio[0][0].bandwidth, 0.2048));
  CHECK(rel_close(m.ratio[0][0].storage, 100.0 / 480.0));

  CHECK_FALSE(m.feasible[0][1]);
  CHECK(m.ratio[0][1] == PerKind<double>{});

  CHECK(m.feasible[0][2]);
  CHECK(m.ratio[0][2] == PerKind<double>{});
}

TEST_CASE("gating uses the capped maximum, not raw capacity") {
  std::vector<TierSpec> tiers = {make_tier(1, 20, 100000, 1000, 480)};
  tiers[0].caps = {0.9, 0.9, 0.9};
  const CapacityMatrices m =
      matrices_from({{ResourceVector(95000, 1, 1), ResourceVector(90000, 900, 432)}}, tiers);
  CHECK_FALSE(m.feasible[0][0]);
  CHECK(m.feasible[0][1]);
  CHECK(rel_close(m.ratio[0][1].throughput, 1.0));
}

TEST_CASE("orthogonal match score") {
  TierSpec t = make_tier(1, 20, 1, 1, 1, {true, true, false});
  const PerKind<double> ratios{0.5, 0.6, 0.3};
  CHECK(rel_close(orthogonal_match_score(t, ratios, 1, 1), 1.1 / 3));
  CHECK(rel_close(orthogonal_match_score(t, ratios, 1, 0.5), 0.18333333333333333));

  TierSpec cap = make_tier(3, 75, 1, 1, 1, {false, false, true});
  CHECK(rel_close(orthogonal_match_score(cap, {0.9, 0.9, 0.1}, 1, 1), 0.1 / 3));
  CHECK(rel_close(orthogonal_match_score(cap, {0.9, 0.9, 0.1}, 1, 1, ScoreDivisor::ActiveWeights),
                  0.1));
}

TEST_CASE("orthogonal match score is linear in ratios, sla and confidence", "[property]") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    TierSpec t = make_tier(1, 20, 1, 1, 1, {u(rng) < 0.5, u(rng) < 0.5, u(rng) < 0.5});
    t.kind_weights = {u(rng) + 0.1, u(rng), u(rng)};
    const PerKind<double> r{u(rng), u(rng), u(rng)};
    const double sla = 0.1 + u(rng), conf = 0.05 + 0.95 * u(rng), c = 0.1 + 3 * u(rng);
    const double base = orthogonal_match_score(t, r, sla, conf);
    CHECK(rel_close(orthogonal_match_score(t, r, c * sla, conf), c * base, 1e-12));
    CHECK(rel_close(orthogonal_match_score(t, r, sla, conf * 0.5), 0.5 * base, 1e-12));
    for (ResourceKind k : kAllKinds) {
      PerKind<double> r2 = r, r3 = r;
      r2[k] += 0.25;
      r3[k] += 0.5;
      // Equal steps in one component give equal score increments.
      const double d1 = orthogonal_match_score(t, r2, sla, conf) - base;
      const double d2 = orthogonal_match_score(t, r3, sla, conf) - base;
      CHECK(std::abs(d2 - 2 * d1) <= 1e-12);
    }
  }
}

TEST_CASE("migration speed and cost") {
  const std::vector<TierHeadroom> headroom = {{0, 400}, {500, 0}};
  VmdkSnapshot v{TierId{2}, 100, 1, 0, 4096, 100};
  CHECK(migration_speed_mbps(TierId{1}, v, headroom) == 400);
  CHECK(mig_cost_seconds(TierId{1}, v, headroom) == 250);
  CHECK(mig_cost_seconds(TierId{2}, v, headroom) == 0);

  VmdkSnapshot back{TierId{1}, 100, 1, 0, 4096, 0};
  CHECK(mig_cost_seconds(TierId{2}, back, headroom) == kInf);
}

TEST_CASE("headroom subtracts observed load and never goes negative") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 1, 1000, 1),
                                       make_tier(2, 50, 1, 1000, 1)};
  const std::vector<TierObservation> load = {{0, 0, 300, 100, 1}, {0, 0, 1200, 1000, 1}};
  const auto h = headroom_from(tiers, load);
  CHECK(h[0].read_mbps == 700);
  CHECK(h[0].write_mbps == 900);
  CHECK(h[1].read_mbps == 0);
  CHECK(h[1].write_mbps == 0);
}

TEST_CASE("normalized migration cost divides by the migration window") {
  const std::vector<TierHeadroom> headroom = {{1000, 400}, {500, 400}};
  const std::vector<VmdkSnapshot> vmdks = {{TierId{2}, 100, 1, 0, 4096, 0}};
  const Matrix g = normalized_mig_costs(vmdks, headroom, 2, 900);
  CHECK(rel_close(g[0][0], 250.0 / 900.0));
  CHECK(g[1][0] == 0);
}

TEST_CASE("score combines aging, match and migration penalty") {
  std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100, {true, false, false})};
  tiers[0].kind_weights = {1, 0, 0};
  tiers[0].mig_weight = 0.5;
  const CapacityMatrices m = matrices_from({{ResourceVector(30, 0, 0)}}, tiers);  // ratio.P 0.3
  const std::vector<VmdkSnapshot> vmdks = {{TierId{2}, 1, 1, 30, 4096, 0}};
  ScoreMatrix prev = ScoreMatrix::zeros(1, 1);
  prev.history[0][0] = 0.4;
  PolicyWeights w;
  w.aging_factor = 0.5;
  const Matrix g = {{0.2}};  // wetMig * cost = 0.1
  const ScoreMatrix s = cal_score(m, prev, tiers, w, vmdks, std::vector{1.0}, g);
  REQUIRE(s.score[0][0].has_value());
  CHECK(rel_close(*s.score[0][0], 0.4));
  CHECK(rel_close(s.history[0][0], 0.4));

  w.aging_factor = 0;
  tiers[0].mig_weight = 0;
  const ScoreMatrix plain = cal_score(m, prev, tiers, w, vmdks, std::vector{1.0}, g);
  CHECK(*plain.score[0][0] ==
        orthogonal_match_score(tiers[0], m.ratio[0][0], 1, 1, w.score_divisor));
}

TEST_CASE("infeasible cells are marked regardless of history") {
  std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100)};
  const CapacityMatrices m = matrices_from({{ResourceVector(1, 1, 500)}}, tiers);
  ScoreMatrix prev = ScoreMatrix::zeros(1, 1);
  prev.history[0][0] = 9;
  const std::vector<VmdkSnapshot> vmdks = {{TierId{1}, 500, 1, 1, 4096, 0}};
  const ScoreMatrix s =
      cal_score(m, prev, tiers, PolicyWeights{}, vmdks, std::vector{1.0}, Matrix{{0.0}});
  CHECK_FALSE(s.score[0][0].has_value());
  CHECK(s.history[0][0] == 0);
}

TEST_CASE("unreachable tiers get a non-finite score and zero history") {
  std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100)};
  tiers[0].mig_weight = 1;
  const CapacityMatrices m = matrices_from({{ResourceVector(10, 1, 1)}}, tiers);
  const std::vector<VmdkSnapshot> vmdks = {{TierId{2}, 1, 1, 10, 4096, 0}};
  const ScoreMatrix s = cal_score(m, ScoreMatrix::zeros(1, 1), tiers, PolicyWeights{}, vmdks,
                                  std::vector{1.0}, Matrix{{kInf}});
  REQUIRE(s.score[0][0].has_value());
  CHECK(std::isinf(*s.score[0][0]));
  CHECK(s.history[0][0] == 0);

  tiers[0].mig_weight = 0;  // no 0 * inf
  const ScoreMatrix free = cal_score(m, ScoreMatrix::zeros(1, 1), tiers, PolicyWeights{}, vmdks,
                                     std::vector{1.0}, Matrix{{kInf}});
  CHECK(std::isfinite(*free.score[0][0]));
}

TEST_CASE("greedy keeps a lone VMDK on its best tier") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100),
                                       make_tier(2, 50, 100, 100, 100)};
  const CapacityMatrices m =
      matrices_from({{ResourceVector(10, 1, 1)}, {ResourceVector(5, 1, 1)}}, tiers);
  ScoreMatrix s = ScoreMatrix::zeros(2, 1);
  s.score[0][0] = 0.9;
  s.score[1][0] = 0.1;
  const std::vector<TierId> current = {TierId{1}};
  const AssignmentPlan p = trigger_migration(s, m, tiers, current);
  CHECK(p.target == current);
  CHECK(p.migrations.empty());
  CHECK_FALSE(p.has_overload());
}

TEST_CASE("greedy gives the contested tier to the higher score") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100),
                                       make_tier(2, 50, 100, 100, 1000)};
  const ResourceVector need(1, 1, 60);  // 60% of tier 1 storage each
  const CapacityMatrices m = matrices_from({{need, need}, {need, need}}, tiers);
  ScoreMatrix s = ScoreMatrix::zeros(2, 2);
  s.score[0] = {0.3, 0.5};
  s.score[1] = {0.2, 0.2};
  const std::vector<TierId> current = {TierId{2}, TierId{2}};
  const AssignmentPlan p = trigger_migration(s, m, tiers, current);
  CHECK(p.target == std::vector<TierId>{TierId{2}, TierId{1}});
  REQUIRE(p.migrations.size() == 1);
  CHECK(p.migrations[0] == PlannedMove{1, TierId{2}, TierId{1}});
}

TEST_CASE("greedy breaks score ties by VMDK order") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100),
                                       make_tier(2, 50, 100, 100, 1000)};
  const ResourceVector need(1, 1, 60);
  const CapacityMatrices m = matrices_from({{need, need, need}, {need, need, need}}, tiers);
  ScoreMatrix s = ScoreMatrix::zeros(2, 3);
  s.score[0] = {0.1, 0.4, 0.4};
  const std::vector<TierId> current(3, TierId{2});
  const AssignmentPlan p = trigger_migration(s, m, tiers, current);
  CHECK(p.target == std::vector<TierId>{TierId{2}, TierId{1}, TierId{2}});
}

TEST_CASE("greedy leaves a tier empty when every cell is infeasible") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 10),
                                       make_tier(2, 50, 100, 100, 1000)};
  const CapacityMatrices m = matrices_from(
      {{ResourceVector(1, 1, 50), ResourceVector(1, 1, 60)},
       {ResourceVector(1, 1, 50), ResourceVector(1, 1, 60)}},
      tiers);
  ScoreMatrix s = ScoreMatrix::zeros(2, 2);
  for (std::size_t v = 0; v < 2; ++v) {
    if (!m.feasible[0][v]) s.score[0][v].reset();
  }
  const std::vector<TierId> current(2, TierId{1});
  const AssignmentPlan p = trigger_migration(s, m, tiers, current);
  CHECK(p.target == std::vector<TierId>(2, TierId{2}));
}

TEST_CASE("leftovers stay put and are flagged when their tier lacks room") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100)};
  const ResourceVector need(1, 1, 60);
  const CapacityMatrices m = matrices_from({{need, need}}, tiers);
  ScoreMatrix s = ScoreMatrix::zeros(1, 2);
  s.score[0] = {0.5, 0.4};
  const std::vector<TierId> current(2, TierId{1});
  const AssignmentPlan p = trigger_migration(s, m, tiers, current);
  CHECK(p.target == current);
  CHECK(p.overloaded == std::vector<bool>{false, true});
  CHECK(p.overload_count() == 1);
}

TEST_CASE("non-finite scores are not eligible in the greedy round") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100),
                                       make_tier(2, 50, 100, 100, 100)};
  const ResourceVector need(1, 1, 1);
  const CapacityMatrices m = matrices_from({{need}, {need}}, tiers);
  ScoreMatrix s = ScoreMatrix::zeros(2, 1);
  s.score[0][0] = -kInf;
  const AssignmentPlan p = trigger_migration(s, m, tiers, std::vector{TierId{2}});
  CHECK(p.target == std::vector{TierId{2}});
}

TEST_CASE("epoch profit") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100),
                                       make_tier(2, 50, 200, 200, 200)};
  const CapacityMatrices m = matrices_from(
      {{ResourceVector(50, 10, 20), ResourceVector(30, 40, 10)},
       {ResourceVector(40, 10, 20), ResourceVector(20, 40, 10)}},
      tiers);
  const Matrix g = {{0.3, 0.0}, {0.0, 0.7}};
  const std::vector<double> w = {1.0, 2.0};
  const std::vector<TierId> prev = {TierId{2}, TierId{1}};

  PolicyWeights pw;
  pw.alpha = {1, 0, 0};
  CHECK(rel_close(epoch_profit(prev, prev, m, g, w, pw), 1.0 * 0.2 + 2.0 * 0.3));

  pw.alpha = {1, 0.5, 2};
  pw.beta = 0;
  const std::vector<TierId> swapped = {TierId{1}, TierId{2}};
  CHECK(epoch_profit(swapped, prev, m, g, w, pw) == epoch_profit(swapped, swapped, m, g, w, pw));

  pw.beta = 0.8;
  for (const auto& a : {prev, swapped, std::vector{TierId{1}, TierId{1}}}) {
    CHECK(rel_close(epoch_profit(a, prev, m, g, w, pw), reference_profit(a, prev, m, g, w, pw)));
  }
}

TEST_CASE("oracle picks the single best tier") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100),
                                       make_tier(2, 50, 100, 100, 100),
                                       make_tier(3, 75, 100, 100, 100)};
  const CapacityMatrices m = matrices_from(
      {{ResourceVector(50, 0, 10)}, {ResourceVector(80, 0, 10)}, {ResourceVector(70, 0, 10)}},
      tiers);
  const Matrix g = {{0.1}, {0.2}, {0.0}};
  PolicyWeights pw;
  pw.alpha = {1, 1, 1};
  pw.beta = 1;
  const std::vector<TierId> prev = {TierId{3}};
  const AssignmentPlan p = oracle_assignment(m, g, std::vector{1.0}, pw, prev, tiers);
  // Profits: 0.6 - 0.1, 0.9 - 0.2, 0.8
  CHECK(p.target == std::vector{TierId{3}});
}

TEST_CASE("oracle prefers the lexicographically smallest among ties") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 100),
                                       make_tier(2, 50, 100, 100, 100)};
  const ResourceVector z(0, 0, 1);
  const CapacityMatrices m = matrices_from({{z, z}, {z, z}}, tiers);
  PolicyWeights pw;
  pw.alpha = {0, 0, 0};
  const std::vector<TierId> prev = {TierId{2}, TierId{2}};
  const AssignmentPlan p =
      oracle_assignment(m, Matrix{{0, 0}, {0, 0}}, std::vector{1.0, 1.0}, pw, prev, tiers);
  CHECK(p.target == std::vector{TierId{1}, TierId{1}});
}

TEST_CASE("oracle errors") {
  const std::vector<TierSpec> tiers = {make_tier(1, 20, 100, 100, 10)};
  const CapacityMatrices m = matrices_from({{ResourceVector(1, 1, 50)}}, tiers);
  CHECK_THROWS_AS(oracle_assignment(m, Matrix{{0}}, std::vector{1.0}, PolicyWeights{},
                                    std::vector{TierId{1}}, tiers),
                  std::domain_error);

  const std::vector<TierId> many(kOracleMaxVmdks + 1, TierId{1});
  CHECK_THROWS_AS(oracle_assignment(m, Matrix{{0}}, std::vector<double>(many.size(), 1.0),
                                    PolicyWeights{}, many, tiers),
                  std::invalid_argument);
}

TEST_CASE("scaling one tier's kind weights keeps its VMDK order", "[property]") {
  Rng rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    TierSpec t = make_tier(1, 20, 1, 1, 1, {u(rng) < 0.7, u(rng) < 0.7, true});
    t.kind_weights = {u(rng) + 0.1, u(rng), u(rng)};
    std::vector<PerKind<double>> ratios(12);
    for (auto& r : ratios) r = {u(rng), u(rng), u(rng)};

    auto order_with = [&](const TierSpec& tier) {
      std::vector<double> score;
      for (const auto& r : ratios) score.push_back(orthogonal_match_score(tier, r, 1, 1));
      std::vector<std::size_t> idx(ratios.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
      return idx;
    };
    TierSpec scaled = t;
    const double c = 0.01 + 100 * u(rng);
    for (ResourceKind k : kAllKinds) scaled.kind_weights[k] *= c;
    CHECK(order_with(t) == order_with(scaled));
  }
}

TEST_CASE("greedy plans are total and respect caps unless flagged", "[property]") {
  Rng rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nt = 2 + trial % 3, nv = 1 + trial % 9;
    std::vector<TierSpec> tiers;
    for (std::size_t t = 0; t < nt; ++t) {
      tiers.push_back(make_tier(static_cast<int>(t + 1), 10.0 * (t + 1), 100 * u(rng) + 1,
                                100 * u(rng) + 1, 100 * u(rng) + 1));
    }
    std::vector<std::vector<ResourceVector>> cap(nt);
    for (auto& row : cap) {
      for (std::size_t v = 0; v < nv; ++v) row.emplace_back(40 * u(rng), 40 * u(rng), 40 * u(rng));
    }
    const CapacityMatrices m = matrices_from(cap, tiers);
    ScoreMatrix s = ScoreMatrix::zeros(nt, nv);
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t v = 0; v < nv; ++v) {
        if (m.feasible[t][v]) {
          s.score[t][v] = u(rng) - 0.5;
        } else {
          s.score[t][v].reset();
        }
      }
    }
    std::vector<TierId> current;
    for (std::size_t v = 0; v < nv; ++v) current.push_back(tier_at(trial % nt));
    const AssignmentPlan p = trigger_migration(s, m, tiers, current);

    REQUIRE(p.target.size() == nv);
    for (TierId t : p.target) CHECK(tier_index(t) < nt);
    for (const PlannedMove& mv : p.migrations) CHECK(mv.from != mv.to);
    if (!p.has_overload()) CHECK(respects_caps(p.target, m, tiers));
  }
}
