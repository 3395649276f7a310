#include "autotier/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace autotier {

SampleSet collect_samples(std::string_view vmdk_id, const LatencyProbe& probe,
                          const InjectionPlan& plan, Rng& rng) {
  SampleSet set;
  set.vmdk_id = std::string(vmdk_id);
  for (double added : plan.latencies_us) {
    auto& samples = set.per_latency[added];
    for (int i = 0; i < plan.samples_per_latency; ++i) samples.push_back(probe(added, rng));
  }
  return set;
}

double compute_cv(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("coefficient of variation of no samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (mean == 0.0) throw std::domain_error("coefficient of variation undefined for zero mean");
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / n) / std::abs(mean);
}

double compute_confidence(double mean_cv, double floor) {
  if (mean_cv >= 1.0) return floor;
  return std::max(1.0 - mean_cv, floor);
}

CalibrationRecord regress_latency_curve(const SampleSet& samples, double confidence_floor,
                                        LineFit fit) {
  if (samples.per_latency.size() < 2) {
    throw std::domain_error("singular fit: need at least two distinct injected latencies for '" +
                            samples.vmdk_id + "'");
  }

  std::vector<double> xs, ys;
  double cv_sum = 0.0;
  int count = 0;
  for (const auto& [injected, values] : samples.per_latency) {
    cv_sum += compute_cv(values);
    count += static_cast<int>(values.size());
    xs.push_back(injected);
    ys.push_back(std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size()));
  }

  // Weighted normal equations around the weighted centroid.
  std::vector<double> w(xs.size(), 1.0);
  if (fit == LineFit::RelativeWeighted) {
    for (std::size_t i = 0; i < ys.size(); ++i) w[i] = ys[i] > 0.0 ? 1.0 / (ys[i] * ys[i]) : 1.0;
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += w[i];
    sx += w[i] * xs[i];
    sy += w[i] * ys[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += w[i] * (xs[i] - xbar) * (xs[i] - xbar);
    sxy += w[i] * (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw std::domain_error("singular fit for '" + samples.vmdk_id + "'");

  CalibrationRecord record;
  record.vmdk_id = samples.vmdk_id;
  record.slope = sxy / sxx;
  record.intercept_us = ybar - record.slope * xbar;
  record.mean_cv = cv_sum / static_cast<double>(samples.per_latency.size());
  record.confidence = compute_confidence(record.mean_cv, confidence_floor);
  record.sample_count = count;
  return record;
}

double estimate_avg_latency(const CalibrationRecord& record, double current_tier_us,
                            double target_tier_us) {
  const double slope = std::max(0.0, record.slope);
  return slope * (target_tier_us - current_tier_us) + record.intercept_us;
}

}  // namespace autotier
