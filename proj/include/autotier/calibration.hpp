#pragma once

// Tier speed sensitivity calibration: inject synthetic latencies into a VMDK's I/O path,
// sample the resulting average latency, and fit a line through the per-latency means.
// The fitted line predicts the VMDK's average latency on any other tier.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autotier/domain.hpp"

namespace autotier {

struct InjectionPlan {
  std::vector<double> latencies_us;
  int samples_per_latency = 10;
};

struct SampleSet {
  std::string vmdk_id;
  std::map<double, std::vector<double>> per_latency;  // injected us -> measured avg latency us
};

/// Answers "average I/O latency of this VMDK with `added_us` injected".
using LatencyProbe = std::function<double(double added_us, Rng& rng)>;

SampleSet collect_samples(std::string_view vmdk_id, const LatencyProbe& probe,
                          const InjectionPlan& plan, Rng& rng);

/// Population standard deviation over mean. Throws on empty input or zero mean.
double compute_cv(std::span<const double> samples);

/// floor when mean_cv >= 1, otherwise 1 - mean_cv clamped below at floor.
double compute_confidence(double mean_cv, double floor = 0.05);

enum class LineFit {
  /// Least squares on relative residuals (weights 1/mean^2). Matches multiplicative noise.
  RelativeWeighted,
  /// Plain least squares on the per-latency means.
  Ordinary,
};

/// Fits mean latency = slope * injected + intercept. Needs >= 2 distinct injected latencies.
CalibrationRecord regress_latency_curve(const SampleSet& samples, double confidence_floor = 0.05,
                                        LineFit fit = LineFit::RelativeWeighted);

/// Predicted average latency after moving from a tier with base latency `current_tier_us`
/// to one with `target_tier_us`. May be <= 0, which callers treat as out of range.
/// Negative fitted slopes predict as flat.
double estimate_avg_latency(const CalibrationRecord& record, double current_tier_us,
                            double target_tier_us);

}  // namespace autotier
