#pragma once

// Scenario documents (JSON, schemaVersion 1) and run artifacts:
//   metrics.csv      one row per epoch, per-tier then total columns
//   summary.json     per-tier and total means over the run
//   cdf_iops.dat     empirical CDF of per-epoch total IOPS
//   cdf_bw.dat       empirical CDF of per-epoch total MB/s
//   migrations.json  migrated bytes vs distinct VMDKs migrated

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "autotier/domain.hpp"
#include "autotier/simulator.hpp"

namespace autotier {

/// Malformed JSON, with 1-based line and column of the failure.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses and validates. Omitted tunables take their defaults. Throws SyntaxError or
/// ValidationError (unknown fields, wrong types and invariant violations, all at once).
Scenario parse_scenario(std::string_view document);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const Scenario& scenario);
std::string serialize_scenario(const Scenario& scenario);

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;
};

/// Empirical CDF: sorted distinct values with the fraction of samples <= each.
std::vector<CdfPoint> emit_cdf(std::vector<double> series);

std::string metrics_csv(const RunResult& run);
nlohmann::json summary_json(const RunResult& run);
nlohmann::json migrations_json(const RunResult& run);
std::string cdf_text(const std::vector<CdfPoint>& cdf, std::string_view label);

inline constexpr const char* kArtifactNames[] = {"metrics.csv", "summary.json", "cdf_iops.dat",
                                                 "cdf_bw.dat", "migrations.json"};

/// Writes every artifact into `dir`, creating it if needed.
void write_run_artifacts(const RunResult& run, const std::filesystem::path& dir);

/// Ratios of AutoTiering's summary against each baseline found among `summaries`.
nlohmann::json compare_summaries(const std::vector<nlohmann::json>& summaries);

/// printf("%.6g") rendering used for every numeric CSV field.
std::string format_number(double value);

}  // namespace autotier
