#include "autotier/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

namespace autotier {

namespace {

constexpr double kUnlimited = std::numeric_limits<double>::max();

struct Packing {
  std::vector<double> key;               // per VMDK, larger is hotter
  std::vector<std::size_t> tier_order;   // tier indices, preferred first
  std::vector<std::vector<ResourceVector>> charge;  // [tier][vmdk]
  std::vector<ResourceVector> limits;    // [tier]
};

// First-fit decreasing by key. Equal keys keep VMDKs on better-ranked current tiers first,
// and idle VMDKs (key 0) stay where they are whenever there is room.
PlanAudit pack(const Packing& p, std::span<const TierId> current, int epoch) {
  const std::size_t nv = current.size();
  const std::size_t nt = p.limits.size();
  std::vector<std::size_t> rank(nt);
  for (std::size_t i = 0; i < p.tier_order.size(); ++i) rank[p.tier_order[i]] = i;

  std::vector<ResourceVector> remaining = p.limits;
  std::vector<std::optional<std::size_t>> chosen(nv);
  auto try_place = [&](std::size_t v, std::size_t t) {
    if (!p.charge[t][v].fits_within(remaining[t])) return false;
    remaining[t] = remaining[t].minus(p.charge[t][v]);
    chosen[v] = t;
    return true;
  };

  std::vector<std::size_t> hot;
  for (std::size_t v = 0; v < nv; ++v) {
    if (p.key[v] > 0.0) hot.push_back(v);
  }
  std::sort(hot.begin(), hot.end(), [&](std::size_t a, std::size_t b) {
    if (p.key[a] != p.key[b]) return p.key[a] > p.key[b];
    const std::size_t ra = rank[tier_index(current[a])];
    const std::size_t rb = rank[tier_index(current[b])];
    if (ra != rb) return ra < rb;
    return a < b;
  });
  for (std::size_t v : hot) {
    for (std::size_t t : p.tier_order) {
      if (try_place(v, t)) break;
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (p.key[v] > 0.0) continue;
    if (try_place(v, tier_index(current[v]))) continue;
    for (std::size_t t : p.tier_order) {
      if (try_place(v, t)) break;
    }
  }

  std::vector<TierId> target(nv);
  std::vector<bool> overloaded(nv, false);
  for (std::size_t v = 0; v < nv; ++v) {
    if (chosen[v]) {
      target[v] = tier_at(*chosen[v]);
    } else {
      target[v] = current[v];
      overloaded[v] = true;
    }
  }
  PlanAudit audit;
  audit.plan = make_plan(std::move(target), std::move(overloaded), current, epoch);
  audit.charged = p.charge;
  audit.limits = p.limits;
  return audit;
}

std::vector<std::size_t> tiers_by(std::span<const TierSpec> tiers, auto&& capability) {
  std::vector<std::size_t> order(tiers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return capability(tiers[a]) > capability(tiers[b]);
  });
  return order;
}

std::vector<MeasuredVmdk> measured_from(const PolicyContext& ctx) {
  std::vector<MeasuredVmdk> out;
  for (std::size_t v = 0; v < ctx.scenario.vmdks.size(); ++v) {
    const double iops = v < ctx.measured.size() ? ctx.measured[v].iops() : 0.0;
    out.push_back({iops, ctx.scenario.vmdks[v].size_gb});
  }
  return out;
}

}  // namespace

PlanAudit idt_plan(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                   std::span<const TierId> current, int epoch) {
  Packing p;
  for (const auto& s : stats) p.key.push_back(s.iops);
  p.tier_order = tiers_by(tiers, [](const TierSpec& t) { return t.read_iops_cap; });
  for (const TierSpec& t : tiers) {
    std::vector<ResourceVector> row;
    for (const auto& s : stats) row.emplace_back(0.0, 0.0, s.size_gb);
    p.charge.push_back(std::move(row));
    p.limits.emplace_back(kUnlimited, kUnlimited, t.max_usable().gb());
  }
  return pack(p, current, epoch);
}

PlanAudit edt_plan(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                   std::span<const TierId> current, int epoch) {
  Packing p;
  for (const auto& s : stats) p.key.push_back(s.size_gb > 0.0 ? s.iops / s.size_gb : 0.0);
  p.tier_order =
      tiers_by(tiers, [](const TierSpec& t) { return t.read_iops_cap / t.capacity.gb(); });
  for (const TierSpec& t : tiers) {
    std::vector<ResourceVector> row;
    for (const auto& s : stats) row.emplace_back(s.iops, 0.0, s.size_gb);
    p.charge.push_back(std::move(row));
    const ResourceVector max = t.max_usable();
    p.limits.emplace_back(max.iops(), kUnlimited, max.gb());
  }
  return pack(p, current, epoch);
}

AssignmentPlan idt_assign(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                          std::span<const TierId> current, int epoch) {
  return idt_plan(stats, tiers, current, epoch).plan;
}

AssignmentPlan edt_assign(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                          std::span<const TierId> current, int epoch) {
  return edt_plan(stats, tiers, current, epoch).plan;
}

AssignmentPlan IdtPolicy::assign(const PolicyContext& ctx) {
  const auto stats = measured_from(ctx);
  audit_ = idt_plan(stats, ctx.scenario.tiers, ctx.hosting, ctx.epoch);
  return audit_->plan;
}

AssignmentPlan EdtPolicy::assign(const PolicyContext& ctx) {
  const auto stats = measured_from(ctx);
  audit_ = edt_plan(stats, ctx.scenario.tiers, ctx.hosting, ctx.epoch);
  return audit_->plan;
}

}  // namespace autotier
