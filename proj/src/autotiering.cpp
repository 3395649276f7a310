#include "autotier/autotiering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace autotier {

CapacityMatrices cal_capacity_matrices(std::span<const CalibrationRecord> calibrations,
                                       std::span<const VmdkSnapshot> vmdks,
                                       std::span<const TierSpec> tiers) {
  if (calibrations.size() != vmdks.size()) {
    throw std::invalid_argument("every VMDK needs exactly one calibration record");
  }
  CapacityMatrices m;
  m.cap.assign(tiers.size(), std::vector<ResourceVector>(vmdks.size()));
  m.ratio.assign(tiers.size(), std::vector<PerKind<double>>(vmdks.size()));
  m.feasible.assign(tiers.size(), std::vector<bool>(vmdks.size(), true));

  for (std::size_t v = 0; v < vmdks.size(); ++v) {
    const VmdkSnapshot& vm = vmdks[v];
    const double current_latency = tiers[tier_index(vm.hosting)].base_latency_us;
    for (std::size_t t = 0; t < tiers.size(); ++t) {
      const double lat =
          estimate_avg_latency(calibrations[v], current_latency, tiers[t].base_latency_us);
      double iops = lat > 0.0 ? kUsPerSecond / lat : 0.0;
      iops = std::min(iops, vm.demand_iops);
      const double mbps = iops * vm.avg_io_size_bytes / kBytesPerMb;
      m.cap[t][v] = ResourceVector(iops, mbps, vm.size_gb);
    }
  }
  return m;
}

void normalize_and_gate(CapacityMatrices& matrices, std::span<const TierSpec> tiers) {
  for (std::size_t t = 0; t < matrices.tier_count(); ++t) {
    const ResourceVector max = tiers[t].max_usable();
    for (std::size_t v = 0; v < matrices.vmdk_count(); ++v) {
      const ResourceVector& cap = matrices.cap[t][v];
      if (!cap.fits_within(max)) {
        matrices.feasible[t][v] = false;
        matrices.ratio[t][v] = {};
        continue;
      }
      matrices.feasible[t][v] = true;
      matrices.ratio[t][v] = {cap.iops() / max.iops(), cap.mbps() / max.mbps(),
                              cap.gb() / max.gb()};
    }
  }
}

double orthogonal_match_score(const TierSpec& tier, const PerKind<double>& ratios, double sla,
                              double confidence, ScoreDivisor divisor) {
  double dot = 0.0;
  double active = 0.0;
  for (ResourceKind k : kAllKinds) {
    if (!tier.specialty[k]) continue;
    dot += tier.kind_weights[k] * ratios[k];
    active += tier.kind_weights[k];
  }
  const double denom = divisor == ScoreDivisor::AllWeights ? tier.kind_weight_sum() : active;
  if (denom <= 0.0) return 0.0;
  return dot * sla * confidence / denom;
}

std::vector<TierHeadroom> headroom_from(std::span<const TierSpec> tiers,
                                        std::span<const TierObservation> load) {
  std::vector<TierHeadroom> out(tiers.size());
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    const double read = t < load.size() ? load[t].read_mbps : 0.0;
    const double write = t < load.size() ? load[t].write_mbps : 0.0;
    out[t] = {std::max(0.0, tiers[t].read_mbps_cap - read),
              std::max(0.0, tiers[t].write_mbps_cap - write)};
  }
  return out;
}

double migration_speed_mbps(TierId target, const VmdkSnapshot& vmdk,
                            std::span<const TierHeadroom> headroom) {
  const TierHeadroom& src = headroom[tier_index(vmdk.hosting)];
  const TierHeadroom& dst = headroom[tier_index(target)];
  return std::min(src.read_mbps + vmdk.current_read_mbps, dst.write_mbps);
}

double mig_cost_seconds(TierId target, const VmdkSnapshot& vmdk,
                        std::span<const TierHeadroom> headroom) {
  if (target == vmdk.hosting) return 0.0;
  const double speed = migration_speed_mbps(target, vmdk, headroom);
  if (!(speed > 0.0)) return std::numeric_limits<double>::infinity();
  return vmdk.size_gb * kMbPerGb / speed;
}

Matrix normalized_mig_costs(std::span<const VmdkSnapshot> vmdks,
                            std::span<const TierHeadroom> headroom, std::size_t tier_count,
                            double window_seconds) {
  Matrix out(tier_count, std::vector<double>(vmdks.size(), 0.0));
  for (std::size_t t = 0; t < tier_count; ++t) {
    for (std::size_t v = 0; v < vmdks.size(); ++v) {
      out[t][v] = mig_cost_seconds(tier_at(t), vmdks[v], headroom) / window_seconds;
    }
  }
  return out;
}

ScoreMatrix ScoreMatrix::zeros(std::size_t tiers, std::size_t vmdks) {
  ScoreMatrix s;
  s.score.assign(tiers, std::vector<std::optional<double>>(vmdks, 0.0));
  s.history.assign(tiers, std::vector<double>(vmdks, 0.0));
  return s;
}

ScoreMatrix cal_score(const CapacityMatrices& matrices, const ScoreMatrix& previous,
                      std::span<const TierSpec> tiers, const PolicyWeights& weights,
                      std::span<const VmdkSnapshot> vmdks, std::span<const double> confidence,
                      const Matrix& mig_cost_norm) {
  const std::size_t nt = matrices.tier_count();
  const std::size_t nv = matrices.vmdk_count();
  ScoreMatrix out = ScoreMatrix::zeros(nt, nv);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t v = 0; v < nv; ++v) {
      if (!matrices.feasible[t][v]) {
        out.score[t][v].reset();
        out.history[t][v] = 0.0;
        continue;
      }
      const double hist = t < previous.history.size() && v < previous.history[t].size()
                              ? previous.history[t][v]
                              : 0.0;
      const double match = orthogonal_match_score(tiers[t], matrices.ratio[t][v],
                                                  vmdks[v].sla_weight, confidence[v],
                                                  weights.score_divisor);
      const double cost = mig_cost_norm[t][v];
      // Zero weight with an unreachable tier must not produce 0 * inf.
      const double penalty = tiers[t].mig_weight == 0.0 ? 0.0 : tiers[t].mig_weight * cost;
      const double score = weights.aging_factor * hist + match - penalty;
      out.score[t][v] = score;
      out.history[t][v] = std::isfinite(score) ? score : 0.0;
    }
  }
  return out;
}

namespace {

bool eligible(const std::optional<double>& s) { return s.has_value() && std::isfinite(*s); }

}  // namespace

AssignmentPlan trigger_migration(const ScoreMatrix& scores, const CapacityMatrices& matrices,
                                 std::span<const TierSpec> tiers, std::span<const TierId> current,
                                 int epoch) {
  const std::size_t nt = matrices.tier_count();
  const std::size_t nv = matrices.vmdk_count();
  std::vector<ResourceVector> remaining;
  for (std::size_t t = 0; t < nt; ++t) remaining.push_back(tiers[t].max_usable());

  std::vector<std::optional<TierId>> chosen(nv);
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<std::size_t> order;
    for (std::size_t v = 0; v < nv; ++v) {
      if (eligible(scores.score[t][v])) order.push_back(v);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *scores.score[t][a] > *scores.score[t][b];
    });
    for (std::size_t v : order) {
      if (chosen[v]) continue;
      const ResourceVector& need = matrices.cap[t][v];
      if (!need.fits_within(remaining[t])) continue;
      remaining[t] = remaining[t].minus(need);
      chosen[v] = tier_at(t);
    }
  }

  std::vector<TierId> target(nv);
  std::vector<bool> overloaded(nv, false);
  for (std::size_t v = 0; v < nv; ++v) {
    if (chosen[v]) {
      target[v] = *chosen[v];
      continue;
    }
    const std::size_t t = tier_index(current[v]);
    target[v] = current[v];
    const ResourceVector& need = matrices.cap[t][v];
    if (need.fits_within(remaining[t])) {
      remaining[t] = remaining[t].minus(need);
    } else {
      overloaded[v] = true;
    }
  }
  return make_plan(std::move(target), std::move(overloaded), current, epoch);
}

double epoch_profit(std::span<const TierId> assignment, std::span<const TierId> previous,
                    const CapacityMatrices& matrices, const Matrix& mig_cost_norm,
                    std::span<const double> sla, const PolicyWeights& weights) {
  double total = 0.0;
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    const std::size_t t = tier_index(assignment[v]);
    const PerKind<double>& r = matrices.ratio[t][v];
    double gain = 0.0;
    for (ResourceKind k : kAllKinds) gain += weights.alpha[k] * r[k];
    double penalty = 0.0;
    if (assignment[v] != previous[v] && weights.beta != 0.0) {
      penalty = weights.beta * mig_cost_norm[t][v];
    }
    total += sla[v] * (gain - penalty);
  }
  return total;
}

bool respects_caps(std::span<const TierId> assignment, const CapacityMatrices& matrices,
                   std::span<const TierSpec> tiers) {
  std::vector<ResourceVector> used(tiers.size());
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    const std::size_t t = tier_index(assignment[v]);
    used[t] += matrices.cap[t][v];
  }
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    if (!used[t].fits_within(tiers[t].max_usable())) return false;
  }
  return true;
}

AssignmentPlan oracle_assignment(const CapacityMatrices& matrices, const Matrix& mig_cost_norm,
                                 std::span<const double> sla, const PolicyWeights& weights,
                                 std::span<const TierId> previous, std::span<const TierSpec> tiers,
                                 int epoch) {
  const std::size_t nt = tiers.size();
  const std::size_t nv = previous.size();
  if (nv > kOracleMaxVmdks || nt > kOracleMaxTiers || nt == 0) {
    throw std::invalid_argument("oracle enumeration bound exceeded");
  }

  // Odometer over tier^vmdk assignments, VMDK 0 most significant, so the first maximizer
  // found is the lexicographically smallest.
  std::vector<std::size_t> digits(nv, 0);
  std::vector<TierId> candidate(nv, tier_at(0));
  std::optional<std::vector<TierId>> best;
  double best_profit = -std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t v = 0; v < nv; ++v) candidate[v] = tier_at(digits[v]);
    if (respects_caps(candidate, matrices, tiers)) {
      const double p = epoch_profit(candidate, previous, matrices, mig_cost_norm, sla, weights);
      if (!best || p > best_profit) {
        best = candidate;
        best_profit = p;
      }
    }
    bool wrapped = true;
    for (std::size_t pos = nv; pos-- > 0;) {
      if (++digits[pos] < nt) {
        wrapped = false;
        break;
      }
      digits[pos] = 0;
    }
    if (wrapped) break;
  }
  if (!best) throw std::domain_error("no assignment respects the tier caps");
  return make_plan(std::move(*best), std::vector<bool>(nv, false), previous, epoch);
}

OracleComparison compare_with_oracle(const MonitorState& state, const Scenario& scenario,
                                     std::span<const TierId> previous) {
  std::vector<double> sla;
  for (const VmdkSpec& v : scenario.vmdks) sla.push_back(v.sla_weight);
  OracleComparison out;
  out.greedy = trigger_migration(state.scores, state.matrices, scenario.tiers, previous);
  out.greedy_feasible = !out.greedy.has_overload() &&
                        respects_caps(out.greedy.target, state.matrices, scenario.tiers);
  out.greedy_profit = epoch_profit(out.greedy.target, previous, state.matrices,
                                   state.mig_cost_norm, sla, scenario.weights);
  try {
    out.oracle = oracle_assignment(state.matrices, state.mig_cost_norm, sla, scenario.weights,
                                   previous, scenario.tiers);
    out.oracle_profit = epoch_profit(out.oracle->target, previous, state.matrices,
                                     state.mig_cost_norm, sla, scenario.weights);
  } catch (const std::domain_error&) {
    out.oracle.reset();
  }
  return out;
}

void AutoTieringPolicy::monitor(const PolicyContext& ctx) {
  const Scenario& sc = ctx.scenario;
  const PolicyWeights& w = sc.weights;
  const std::size_t nv = sc.vmdks.size();
  const InjectionPlan plan{w.injected_latencies_us, w.samples_per_latency};

  MonitorState st;
  std::vector<double> confidence;
  for (std::size_t v = 0; v < nv; ++v) {
    const LatencyProbe probe = [&ctx, v](double added, Rng& rng) {
      return ctx.probe(v, added, rng);
    };
    SampleSet samples = collect_samples(sc.vmdks[v].id, probe, plan, ctx.rng);
    st.calibrations.push_back(regress_latency_curve(samples, w.confidence_floor));
    confidence.push_back(st.calibrations.back().confidence);

    const WorkloadPhase& phase = sc.vmdks[v].phase_at(ctx.epoch);
    st.vmdks.push_back({ctx.hosting[v], sc.vmdks[v].size_gb, sc.vmdks[v].sla_weight,
                        phase.demand_iops, phase.avg_io_size_bytes,
                        v < ctx.measured.size() ? ctx.measured[v].read_mbps : 0.0});
  }

  st.matrices = cal_capacity_matrices(st.calibrations, st.vmdks, sc.tiers);
  normalize_and_gate(st.matrices, sc.tiers);
  const auto headroom = headroom_from(sc.tiers, ctx.tiers);
  const double window = static_cast<double>(w.migration_epoch) * sc.simulation.epoch_seconds;
  st.mig_cost_norm = normalized_mig_costs(st.vmdks, headroom, sc.tiers.size(), window);

  if (!history_) history_ = ScoreMatrix::zeros(sc.tiers.size(), nv);
  st.scores =
      cal_score(st.matrices, *history_, sc.tiers, w, st.vmdks, confidence, st.mig_cost_norm);
  history_ = st.scores;
  state_ = std::move(st);
}

AssignmentPlan AutoTieringPolicy::assign(const PolicyContext& ctx) {
  if (!state_) monitor(ctx);
  const MonitorState& st = *state_;
  AssignmentPlan plan =
      trigger_migration(st.scores, st.matrices, ctx.scenario.tiers, ctx.hosting, ctx.epoch);

  PlanAudit audit;
  audit.plan = plan;
  audit.charged = st.matrices.cap;
  for (const TierSpec& t : ctx.scenario.tiers) audit.limits.push_back(t.max_usable());
  audit_ = std::move(audit);
  return plan;
}

}  // namespace autotier
