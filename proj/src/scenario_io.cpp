#include "autotier/scenario_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace autotier {

using nlohmann::json;

SyntaxError::SyntaxError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error("syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

const char* kind_key(ResourceKind k) { return to_string(k); }

// Reads one JSON object, recording type errors, missing keys and unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path, std::vector<Diagnostic>& diags)
      : node_(node), path_(std::move(path)), diags_(diags) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  bool ok() const { return node_.is_object(); }
  bool has(const char* key) const { return ok() && node_.contains(key); }

  const json* find(const char* key, bool required) {
    seen_.insert(key);
    if (!ok()) return nullptr;
    auto it = node_.find(key);
    if (it == node_.end()) {
      if (required) fail(at(key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  void number(const char* key, double& out, bool required = false) {
    if (const json* j = find(key, required)) {
      if (j->is_number()) {
        out = j->get<double>();
      } else {
        fail(at(key), "expected a number");
      }
    }
  }

  void integer(const char* key, int& out, bool required = false) {
    if (const json* j = find(key, required)) {
      if (j->is_number_integer()) {
        out = j->get<int>();
      } else {
        fail(at(key), "expected an integer");
      }
    }
  }

  void unsigned64(const char* key, std::uint64_t& out, bool required = false) {
    if (const json* j = find(key, required)) {
      if (j->is_number_unsigned()) {
        out = j->get<std::uint64_t>();
      } else if (j->is_number_integer() && j->get<std::int64_t>() >= 0) {
        out = static_cast<std::uint64_t>(j->get<std::int64_t>());
      } else {
        fail(at(key), "expected a non-negative integer");
      }
    }
  }

  void text(const char* key, std::string& out, bool required = false) {
    if (const json* j = find(key, required)) {
      if (j->is_string()) {
        out = j->get<std::string>();
      } else {
        fail(at(key), "expected a string");
      }
    }
  }

  void flag(const char* key, bool& out, bool required = false) {
    if (const json* j = find(key, required)) {
      if (j->is_boolean()) {
        out = j->get<bool>();
      } else if (j->is_number_integer() && (j->get<int>() == 0 || j->get<int>() == 1)) {
        out = j->get<int>() == 1;
      } else {
        fail(at(key), "expected 0, 1, true or false");
      }
    }
  }

  template <class Fn>
  void object(const char* key, bool required, Fn&& fn) {
    if (const json* j = find(key, required)) {
      ObjectReader child(*j, at(key), diags_);
      if (child.ok()) {
        fn(child);
        child.finish();
      }
    }
  }

  template <class Fn>
  void array(const char* key, bool required, Fn&& fn) {
    if (const json* j = find(key, required)) {
      if (!j->is_array()) {
        fail(at(key), "expected an array");
        return;
      }
      for (std::size_t i = 0; i < j->size(); ++i) {
        fn((*j)[i], at(key) + "[" + std::to_string(i) + "]");
      }
    }
  }

  void finish() {
    if (!ok()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key().c_str()), "unknown field '" + it.key() + "'");
    }
  }

  std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  void fail(const std::string& path, const std::string& message) {
    diags_.push_back({path, message});
  }

 private:
  const json& node_;
  std::string path_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> seen_;
};

void read_per_kind(ObjectReader& r, PerKind<double>& out) {
  for (ResourceKind k : kAllKinds) r.number(kind_key(k), out[k]);
}

void read_flags(ObjectReader& r, PerKind<bool>& out) {
  for (ResourceKind k : kAllKinds) r.flag(kind_key(k), out[k]);
}

TierSpec read_tier(const json& node, const std::string& path, std::vector<Diagnostic>& diags) {
  TierSpec t;
  ObjectReader r(node, path, diags);
  if (!r.ok()) return t;
  int id = 0;
  r.integer("id", id, true);
  t.id = TierId{id};
  r.text("name", t.name);
  r.number("baseLatencyUs", t.base_latency_us, true);
  r.object("capacity", true, [&](ObjectReader& c) {
    double iops = 0.0, mbps = 0.0, gb = 0.0;
    c.number("iops", iops, true);
    c.number("mbps", mbps, true);
    c.number("gb", gb, true);
    try {
      t.capacity = ResourceVector(iops, mbps, gb);
    } catch (const std::invalid_argument& e) {
      c.fail(path + ".capacity", e.what());
    }
  });
  r.number("readIopsCap", t.read_iops_cap, true);
  r.number("writeIopsCap", t.write_iops_cap, true);
  r.number("readMbpsCap", t.read_mbps_cap, true);
  r.number("writeMbpsCap", t.write_mbps_cap, true);
  r.object("specialty", true, [&](ObjectReader& c) { read_flags(c, t.specialty); });
  r.object("kindWeights", false, [&](ObjectReader& c) { read_per_kind(c, t.kind_weights); });
  r.number("migWeight", t.mig_weight);
  r.object("caps", false, [&](ObjectReader& c) { read_per_kind(c, t.caps); });
  r.finish();
  return t;
}

VmdkSpec read_vmdk(const json& node, const std::string& path, std::vector<Diagnostic>& diags) {
  VmdkSpec v;
  ObjectReader r(node, path, diags);
  if (!r.ok()) return v;
  r.text("id", v.id, true);
  v.vm_id = v.id;
  r.text("vmId", v.vm_id);
  r.number("sizeGb", v.size_gb, true);
  r.number("slaWeight", v.sla_weight);
  int tier = 0;
  r.integer("initialTier", tier, true);
  v.initial_tier = TierId{tier};
  r.number("truthSlope", v.truth_slope, true);
  r.number("truthInterceptUs", v.truth_intercept_us, true);
  r.array("phases", true, [&](const json& item, const std::string& p) {
    WorkloadPhase ph;
    ObjectReader pr(item, p, diags);
    if (!pr.ok()) return;
    pr.integer("startEpoch", ph.start_epoch, true);
    pr.number("demandIops", ph.demand_iops, true);
    pr.number("avgIoSizeBytes", ph.avg_io_size_bytes);
    pr.number("readFraction", ph.read_fraction);
    pr.finish();
    v.phases.push_back(ph);
  });
  r.finish();
  return v;
}

void read_weights(ObjectReader& r, PolicyWeights& w) {
  r.object("alpha", false, [&](ObjectReader& c) { read_per_kind(c, w.alpha); });
  r.number("beta", w.beta);
  r.number("agingFactor", w.aging_factor);
  r.integer("monitorEpoch", w.monitor_epoch);
  r.integer("migrationEpoch", w.migration_epoch);
  r.number("confidenceFloor", w.confidence_floor);
  if (r.has("injectedLatenciesUs")) w.injected_latencies_us.clear();
  r.array("injectedLatenciesUs", false, [&](const json& item, const std::string& p) {
    if (item.is_number()) {
      w.injected_latencies_us.push_back(item.get<double>());
    } else {
      r.fail(p, "expected a number");
    }
  });
  r.integer("samplesPerLatency", w.samples_per_latency);
  std::string divisor = w.score_divisor == ScoreDivisor::AllWeights ? "all" : "active";
  r.text("scoreDivisor", divisor);
  if (divisor == "all") {
    w.score_divisor = ScoreDivisor::AllWeights;
  } else if (divisor == "active") {
    w.score_divisor = ScoreDivisor::ActiveWeights;
  } else {
    r.fail(r.at("scoreDivisor"), "expected \"all\" or \"active\"");
  }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

Scenario parse_scenario(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    // The reported byte is one past the offending character.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = line_column(document, byte);
    std::string message = e.what();
    if (auto pos = message.find("syntax error"); pos != std::string::npos) {
      message = message.substr(pos + 13);
    }
    throw SyntaxError(message, line, column);
  }

  std::vector<Diagnostic> diags;
  Scenario sc;
  ObjectReader r(root, "", diags);
  if (r.ok()) {
    r.integer("schemaVersion", sc.schema_version, true);
    r.text("name", sc.name);
    r.array("tiers", true, [&](const json& item, const std::string& p) {
      sc.tiers.push_back(read_tier(item, p, diags));
    });
    r.array("vmdks", true, [&](const json& item, const std::string& p) {
      sc.vmdks.push_back(read_vmdk(item, p, diags));
    });
    r.object("policyWeights", false, [&](ObjectReader& c) { read_weights(c, sc.weights); });
    r.object("simulation", false, [&](ObjectReader& c) {
      c.integer("epochs", sc.simulation.epochs);
      c.number("epochSeconds", sc.simulation.epoch_seconds);
      c.number("noiseCv", sc.simulation.noise_cv);
      c.unsigned64("seed", sc.simulation.seed);
    });
    r.finish();
  }
  if (diags.empty()) diags = check_scenario(sc);
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

json per_kind_json(const PerKind<double>& v) {
  json j = json::object();
  for (ResourceKind k : kAllKinds) j[kind_key(k)] = v[k];
  return j;
}

json flags_json(const PerKind<bool>& v) {
  json j = json::object();
  for (ResourceKind k : kAllKinds) j[kind_key(k)] = v[k] ? 1 : 0;
  return j;
}

}  // namespace

json scenario_to_json(const Scenario& sc) {
  json root;
  root["schemaVersion"] = sc.schema_version;
  root["name"] = sc.name;
  json tiers = json::array();
  for (const TierSpec& t : sc.tiers) {
    tiers.push_back({
        {"id", tier_number(t.id)},
        {"name", t.name},
        {"baseLatencyUs", t.base_latency_us},
        {"capacity",
         {{"iops", t.capacity.iops()}, {"mbps", t.capacity.mbps()}, {"gb", t.capacity.gb()}}},
        {"readIopsCap", t.read_iops_cap},
        {"writeIopsCap", t.write_iops_cap},
        {"readMbpsCap", t.read_mbps_cap},
        {"writeMbpsCap", t.write_mbps_cap},
        {"specialty", flags_json(t.specialty)},
        {"kindWeights", per_kind_json(t.kind_weights)},
        {"migWeight", t.mig_weight},
        {"caps", per_kind_json(t.caps)},
    });
  }
  root["tiers"] = std::move(tiers);

  json vmdks = json::array();
  for (const VmdkSpec& v : sc.vmdks) {
    json phases = json::array();
    for (const WorkloadPhase& p : v.phases) {
      phases.push_back({{"startEpoch", p.start_epoch},
                        {"demandIops", p.demand_iops},
                        {"avgIoSizeBytes", p.avg_io_size_bytes},
                        {"readFraction", p.read_fraction}});
    }
    vmdks.push_back({{"id", v.id},
                     {"vmId", v.vm_id},
                     {"sizeGb", v.size_gb},
                     {"slaWeight", v.sla_weight},
                     {"initialTier", tier_number(v.initial_tier)},
                     {"truthSlope", v.truth_slope},
                     {"truthInterceptUs", v.truth_intercept_us},
                     {"phases", std::move(phases)}});
  }
  root["vmdks"] = std::move(vmdks);

  const PolicyWeights& w = sc.weights;
  root["policyWeights"] = {
      {"alpha", per_kind_json(w.alpha)},
      {"beta", w.beta},
      {"agingFactor", w.aging_factor},
      {"monitorEpoch", w.monitor_epoch},
      {"migrationEpoch", w.migration_epoch},
      {"confidenceFloor", w.confidence_floor},
      {"injectedLatenciesUs", w.injected_latencies_us},
      {"samplesPerLatency", w.samples_per_latency},
      {"scoreDivisor", w.score_divisor == ScoreDivisor::AllWeights ? "all" : "active"},
  };
  root["simulation"] = {{"epochs", sc.simulation.epochs},
                        {"epochSeconds", sc.simulation.epoch_seconds},
                        {"noiseCv", sc.simulation.noise_cv},
                        {"seed", sc.simulation.seed}};
  return root;
}

std::string serialize_scenario(const Scenario& scenario) {
  return scenario_to_json(scenario).dump(2) + "\n";
}

std::vector<CdfPoint> emit_cdf(std::vector<double> series) {
  if (series.empty()) throw std::invalid_argument("CDF of an empty series");
  std::sort(series.begin(), series.end());
  const double n = static_cast<double>(series.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double fraction = static_cast<double>(i + 1) / n;
    if (!out.empty() && out.back().value == series[i]) {
      out.back().fraction = fraction;
    } else {
      out.push_back({series[i], fraction});
    }
  }
  return out;
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string metrics_csv(const RunResult& run) {
  std::ostringstream out;
  out << "epoch";
  const std::size_t nt = run.tier_names.size();
  for (std::size_t t = 0; t < nt; ++t) {
    const std::string p = "t" + std::to_string(t + 1) + "_";
    for (const char* col : {"read_iops", "write_iops", "read_mbps", "write_mbps",
                            "mean_latency_us", "migration_bytes", "migrations", "overloads",
                            "stored_gb"}) {
      out << ',' << p << col;
    }
  }
  out << ",total_read_iops,total_write_iops,total_iops,total_read_mbps,total_write_mbps"
         ",total_mbps,total_mean_latency_us,total_migration_bytes,total_migrations"
         ",total_overloads,migrations_completed,stalled_migrations\n";

  for (const EpochMetrics& m : run.epochs) {
    out << m.epoch;
    for (const TierEpochMetrics& t : m.tiers) {
      for (double v : {t.read_iops, t.write_iops, t.read_mbps, t.write_mbps, t.mean_latency_us,
                       t.migration_bytes}) {
        out << ',' << format_number(v);
      }
      out << ',' << t.migrations << ',' << t.overloads << ',' << format_number(t.stored_gb);
    }
    const TierEpochMetrics& s = m.total;
    for (double v : {s.read_iops, s.write_iops, s.iops(), s.read_mbps, s.write_mbps, s.mbps(),
                     s.mean_latency_us, s.migration_bytes}) {
      out << ',' << format_number(v);
    }
    out << ',' << s.migrations << ',' << s.overloads << ',' << m.migrations_completed << ','
        << m.stalled_migrations << '\n';
  }
  return out.str();
}

namespace {

double mean_of(const RunResult& run, auto&& field) {
  if (run.epochs.empty()) return 0.0;
  double sum = 0.0;
  for (const EpochMetrics& m : run.epochs) sum += field(m);
  return sum / static_cast<double>(run.epochs.size());
}

}  // namespace

json summary_json(const RunResult& run) {
  json tiers = json::array();
  for (std::size_t t = 0; t < run.tier_names.size(); ++t) {
    auto tier = [t](const EpochMetrics& m) -> const TierEpochMetrics& { return m.tiers[t]; };
    tiers.push_back({
        {"id", t + 1},
        {"name", run.tier_names[t]},
        {"mean_read_iops", mean_of(run, [&](const EpochMetrics& m) { return tier(m).read_iops; })},
        {"mean_write_iops",
         mean_of(run, [&](const EpochMetrics& m) { return tier(m).write_iops; })},
        {"mean_read_mbps", mean_of(run, [&](const EpochMetrics& m) { return tier(m).read_mbps; })},
        {"mean_write_mbps",
         mean_of(run, [&](const EpochMetrics& m) { return tier(m).write_mbps; })},
        {"mean_latency_us",
         mean_of(run, [&](const EpochMetrics& m) { return tier(m).mean_latency_us; })},
        {"mean_stored_gb", mean_of(run, [&](const EpochMetrics& m) { return tier(m).stored_gb; })},
    });
  }

  double iops_sum = 0.0, migration_bytes = 0.0;
  int overload_epochs = 0;
  for (const EpochMetrics& m : run.epochs) {
    iops_sum += m.total.iops();
    migration_bytes += m.total.migration_bytes;
    if (m.total.overloads > 0) ++overload_epochs;
  }
  int completed = 0;
  for (const MigrationRecord& r : run.migrations) completed += r.completed_epoch ? 1 : 0;

  json total = {
      {"mean_read_iops", mean_of(run, [](const EpochMetrics& m) { return m.total.read_iops; })},
      {"mean_write_iops", mean_of(run, [](const EpochMetrics& m) { return m.total.write_iops; })},
      {"mean_iops", mean_of(run, [](const EpochMetrics& m) { return m.total.iops(); })},
      {"mean_read_mbps", mean_of(run, [](const EpochMetrics& m) { return m.total.read_mbps; })},
      {"mean_write_mbps", mean_of(run, [](const EpochMetrics& m) { return m.total.write_mbps; })},
      {"mean_mbps", mean_of(run, [](const EpochMetrics& m) { return m.total.mbps(); })},
      {"mean_latency_us",
       mean_of(run, [](const EpochMetrics& m) { return m.total.mean_latency_us; })},
      {"sum_iops", iops_sum},
      {"migration_bytes", migration_bytes},
      {"migrations_started", run.migrations.size()},
      {"migrations_completed", completed},
      {"overload_epochs", overload_epochs},
  };
  return {{"scenario", run.scenario}, {"policy", run.policy}, {"seed", run.seed},
          {"epochs", run.epochs.size()}, {"tiers", std::move(tiers)}, {"total", std::move(total)}};
}

json migrations_json(const RunResult& run) {
  std::map<std::size_t, std::pair<int, double>> per_vmdk;  // started count, bytes moved
  double total_bytes = 0.0;
  int completed = 0, cancelled = 0;
  json events = json::array();
  for (const MigrationRecord& r : run.migrations) {
    auto& entry = per_vmdk[r.vmdk];
    ++entry.first;
    entry.second += r.bytes_moved;
    total_bytes += r.bytes_moved;
    if (r.completed_epoch) ++completed;
    if (r.cancelled) ++cancelled;
    events.push_back({{"vmdk", run.vmdk_ids.at(r.vmdk)},
                      {"from", tier_number(r.from)},
                      {"to", tier_number(r.to)},
                      {"started_epoch", r.started_epoch},
                      {"completed_epoch", r.completed_epoch ? json(*r.completed_epoch) : json()},
                      {"bytes_total", r.bytes_total},
                      {"bytes_moved", r.bytes_moved},
                      {"cancelled", r.cancelled}});
  }
  json vmdks = json::array();
  for (const auto& [v, entry] : per_vmdk) {
    vmdks.push_back({{"vmdk", run.vmdk_ids.at(v)},
                     {"migrations", entry.first},
                     {"bytes_moved", entry.second}});
  }
  return {{"policy", run.policy},
          {"total_bytes_moved", total_bytes},
          {"total_gb_moved", total_bytes / (kBytesPerMb * kMbPerGb)},
          {"migrations_started", run.migrations.size()},
          {"migrations_completed", completed},
          {"migrations_cancelled", cancelled},
          {"distinct_vmdks_migrated", per_vmdk.size()},
          {"per_vmdk", std::move(vmdks)},
          {"events", std::move(events)}};
}

std::string cdf_text(const std::vector<CdfPoint>& cdf, std::string_view label) {
  std::ostringstream out;
  out << "# " << label << " cumulative_fraction\n";
  for (const CdfPoint& p : cdf) {
    out << format_number(p.value) << ' ' << format_number(p.fraction) << '\n';
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

void write_run_artifacts(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "metrics.csv", metrics_csv(run));
  write_file(dir / "summary.json", summary_json(run).dump(2) + "\n");
  write_file(dir / "migrations.json", migrations_json(run).dump(2) + "\n");

  std::vector<double> iops, mbps;
  for (const EpochMetrics& m : run.epochs) {
    iops.push_back(m.total.iops());
    mbps.push_back(m.total.mbps());
  }
  // An empty run still gets (header-only) CDF files.
  write_file(dir / "cdf_iops.dat", cdf_text(iops.empty() ? std::vector<CdfPoint>{} : emit_cdf(iops),
                                            "total_iops"));
  write_file(dir / "cdf_bw.dat",
             cdf_text(mbps.empty() ? std::vector<CdfPoint>{} : emit_cdf(mbps), "total_mbps"));
}

json compare_summaries(const std::vector<json>& summaries) {
  const json* at = nullptr;
  for (const json& s : summaries) {
    if (s.value("policy", "") == "autotiering") at = &s;
  }
  if (!at) throw std::invalid_argument("compare needs an autotiering run");

  json out;
  json runs = json::object();
  for (const json& s : summaries) runs[s.at("policy").get<std::string>()] = s.at("total");
  out["runs"] = std::move(runs);

  json ratios = json::object();
  const json& a = at->at("total");
  for (const json& s : summaries) {
    const std::string name = s.at("policy").get<std::string>();
    if (name == "autotiering") continue;
    const json& b = s.at("total");
    json r = json::object();
    for (const char* key : {"mean_iops", "mean_mbps", "mean_latency_us", "migration_bytes"}) {
      const double den = b.at(key).get<double>();
      r[key] = den != 0.0 ? json(a.at(key).get<double>() / den) : json();
    }
    ratios["autotiering/" + name] = std::move(r);
  }
  out["ratios"] = std::move(ratios);
  return out;
}

}  // namespace autotier
