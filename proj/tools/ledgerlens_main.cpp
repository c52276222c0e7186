// ledgerlens - blockchain-log analysis toolkit and EOV pipeline simulator.
//
// Exit codes: 0 success, 2 input/validation error, 3 internal failure.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ledgerlens/csv.hpp"
#include "ledgerlens/eventlog.hpp"
#include "ledgerlens/ingest.hpp"
#include "ledgerlens/metrics.hpp"
#include "ledgerlens/miner.hpp"
#include "ledgerlens/model.hpp"
#include "ledgerlens/recommender.hpp"
#include "ledgerlens/sim.hpp"

namespace {

using namespace ledgerlens;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Outputs land via temp file + rename so readers never observe a half-written
// file.
void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

Thresholds load_thresholds(const std::string& flag_path) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("LEDGERLENS_THRESHOLDS")) path = env;
  }
  if (path.empty()) return Thresholds{};
  return Thresholds::parse(slurp(path));
}

SimConfig load_sim_config(const std::string& config_path, const std::string& preset,
                          std::uint64_t seed, bool seed_given) {
  SimConfig cfg;
  if (!preset.empty()) {
    auto presets = builtin_scenarios();
    auto it = presets.find(preset);
    if (it == presets.end()) throw Error("unknown preset: " + preset);
    cfg = it->second;
    if (!config_path.empty()) {
      // Overrides on top of the preset.
      std::string text = "scenario=" + preset + "\n" + slurp(config_path);
      cfg = SimConfig::parse(text);
    }
  } else if (!config_path.empty()) {
    cfg = SimConfig::parse(slurp(config_path));
  }
  if (seed_given) cfg.seed = seed;
  return cfg;
}

struct EventArtifacts {
  EventLog event_log;
  std::vector<AnomalyFinding> anomalies;
  bool case_field_found = false;
};

EventArtifacts build_event_artifacts(const BlockchainLog& log) {
  EventArtifacts out;
  if (log.transactions.empty()) return out;
  try {
    const CaseField field = derive_case_field(log);
    out.event_log = build_event_log(log, field);
    out.anomalies = detect_anomalous_paths(out.event_log);
    out.case_field_found = true;
  } catch (const Error&) {
    // No usable common element; user-level process evidence is unavailable.
  }
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& preset,
                 std::uint64_t seed, bool seed_given, const std::string& out_path,
                 const std::string& raw_path, const std::string& summary_path) {
  const SimConfig cfg = load_sim_config(config_path, preset, seed, seed_given);
  const SimResult result = run(cfg);
  write_atomic(out_path, write_canonical_csv(result.log));
  if (!raw_path.empty()) {
    std::ostringstream os;
    write_raw_dump(result.log, os);
    write_atomic(raw_path, os.str());
  }
  if (!summary_path.empty()) write_atomic(summary_path, perf_to_json(result.perf));
  std::cerr << "simulated " << result.log.transactions.size() << " transactions, "
            << result.perf.successes << " successful\n";
  return kExitOk;
}

int cmd_ingest(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw Error("cannot open " + in_path);
  const RawBlockDump dump = parse_raw_blocks(in);
  const BlockchainLog log = preprocess(dump);
  write_atomic(out_path, write_canonical_csv(log));
  std::cerr << "ingested " << dump.blocks.size() << " raw blocks into "
            << log.transactions.size() << " transactions\n";
  return kExitOk;
}

int cmd_analyze(const std::string& in_path, double ins_s, const std::string& out_path,
                const std::string& thresholds_path) {
  const BlockchainLog log = load_canonical_csv(in_path);
  Thresholds thresholds = load_thresholds(thresholds_path);
  if (ins_s > 0) thresholds.ins_s = ins_s;
  const MetricsReport report = compute_metrics(log, thresholds);
  write_atomic(out_path, metrics_to_json(report));
  return kExitOk;
}

int cmd_recommend(const std::string& in_path, const std::string& thresholds_path,
                  const std::string& out_path, const std::string& json_path) {
  const BlockchainLog log = load_canonical_csv(in_path);
  const Thresholds thresholds = load_thresholds(thresholds_path);
  const MetricsReport metrics = compute_metrics(log, thresholds);
  const EventArtifacts events = build_event_artifacts(log);
  const RecommendationSet recs = recommend(log, metrics, thresholds, events.anomalies);
  if (!out_path.empty()) write_atomic(out_path, render_report_markdown(recs, metrics));
  if (!json_path.empty())
    write_atomic(json_path, recommendations_to_json(recs, thresholds));
  std::cerr << recs.recommendations.size() << " recommendation(s)\n";
  return kExitOk;
}

int cmd_eventlog(const std::string& in_path, const std::string& xes_path,
                 const std::string& csv_path, const std::string& case_field_spec,
                 bool successes_only) {
  const BlockchainLog log = load_canonical_csv(in_path);
  const CaseField field = case_field_spec.empty() ? derive_case_field(log)
                                                  : CaseField::parse(case_field_spec);
  const EventLog event_log = build_event_log(log, field, successes_only);
  if (!xes_path.empty()) write_atomic(xes_path, export_xes(event_log));
  if (!csv_path.empty()) write_atomic(csv_path, export_eventlog_csv(event_log));
  std::cerr << "case field " << field.describe() << ", " << event_log.traces.size()
            << " trace(s)\n";
  return kExitOk;
}

int cmd_mine(const std::string& in_path, const std::string& dfg_path,
             const std::string& alpha_path, const std::string& anomalies_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw Error("cannot open " + in_path);
  const EventLog event_log = read_eventlog_csv(in);
  if (!dfg_path.empty()) write_atomic(dfg_path, export_dot(mine_dfg(event_log)));
  if (!alpha_path.empty()) write_atomic(alpha_path, export_dot(alpha_mine(event_log)));
  if (!anomalies_path.empty())
    write_atomic(anomalies_path, anomalies_to_json(detect_anomalous_paths(event_log)));
  return kExitOk;
}

nlohmann::json perf_row(const std::string& name, const PerfSummary& perf) {
  return {{"leg", name},
          {"throughput_tps", perf.throughput_tps},
          {"success_rate", perf.success_rate},
          {"avg_latency_ms", perf.avg_latency_ms},
          {"successes", perf.successes},
          {"submitted", perf.submitted},
          {"aborted", perf.aborted}};
}

int cmd_loop(const std::string& config_path, const std::string& preset, std::uint64_t seed,
             bool seed_given, const std::string& thresholds_path, const std::string& out_path,
             const std::string& json_path) {
  const SimConfig base_cfg = load_sim_config(config_path, preset, seed, seed_given);
  const Thresholds thresholds = load_thresholds(thresholds_path);

  const SimResult baseline = run(base_cfg);
  const MetricsReport metrics = compute_metrics(baseline.log, thresholds);
  const EventArtifacts events = build_event_artifacts(baseline.log);
  const RecommendationSet recs =
      recommend(baseline.log, metrics, thresholds, events.anomalies);

  struct Leg {
    std::string name;
    PerfSummary perf;
  };
  std::vector<Leg> legs;
  legs.push_back({"baseline", baseline.perf});
  SimConfig combined = base_cfg;
  for (const auto& rec : recs.recommendations) {
    const SimConfig leg_cfg = apply_optimization(base_cfg, rec);
    legs.push_back({to_string(rec.kind), run(leg_cfg).perf});
    combined = apply_optimization(combined, rec);
  }
  if (!recs.recommendations.empty()) legs.push_back({"all", run(combined).perf});

  std::ostringstream md;
  md << "# Closed-loop comparison\n\n";
  md << "Recommendations applied one at a time against the same seed, then all "
        "together.\n\n";
  md << "| leg | throughput (tx/s) | success rate | avg latency (ms) | successes | "
        "submitted | aborted |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& leg : legs) {
    md << "| " << leg.name << " | " << leg.perf.throughput_tps << " | "
       << leg.perf.success_rate << " | " << leg.perf.avg_latency_ms << " | "
       << leg.perf.successes << " | " << leg.perf.submitted << " | " << leg.perf.aborted
       << " |\n";
  }
  md << "\n";
  md << render_report_markdown(recs, metrics);

  nlohmann::json legs_json = nlohmann::json::array();
  for (const auto& leg : legs) legs_json.push_back(perf_row(leg.name, leg.perf));
  nlohmann::json j = {{"schema", "ledgerlens-loop v1"}, {"legs", std::move(legs_json)}};

  if (!out_path.empty()) write_atomic(out_path, md.str());
  if (!json_path.empty()) write_atomic(json_path, j.dump(2) + "\n");
  if (out_path.empty() && json_path.empty()) std::cout << md.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ledgerlens - blockchain log analysis and EOV simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string("ledgerlens 1.0 (") + std::string(kCanonicalCsvSchema) +
                           ", " + std::string(kRawDumpSchema) + ", eventlog-csv v1)");

  std::string config_path, preset, out_path, raw_path, summary_path;
  std::uint64_t seed = 1;
  auto* sim = app.add_subcommand("simulate", "run the EOV pipeline on a workload");
  sim->add_option("--config", config_path, "sim config file (key=value)");
  sim->add_option("--preset", preset, "builtin scenario: scm, drm, ehr, dv, lap");
  auto* seed_opt = sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--out", out_path, "canonical log CSV output")->required();
  sim->add_option("--emit-raw", raw_path, "also write the raw block dump (NDJSON)");
  sim->add_option("--summary", summary_path, "performance summary JSON");

  std::string ingest_in, ingest_out;
  auto* ing = app.add_subcommand("ingest", "convert a raw block dump to a canonical log");
  ing->add_option("--in", ingest_in, "raw block dump (NDJSON)")->required();
  ing->add_option("--out", ingest_out, "canonical log CSV output")->required();

  std::string analyze_in, analyze_out, analyze_thresholds;
  double ins_s = 0.0;
  auto* ana = app.add_subcommand("analyze", "compute the metric suite from a canonical log");
  ana->add_option("--in", analyze_in, "canonical log CSV")->required();
  ana->add_option("--ins", ins_s, "interval size in seconds");
  ana->add_option("--out", analyze_out, "metrics JSON output")->required();
  ana->add_option("--thresholds", analyze_thresholds, "thresholds file (key=value)");

  std::string rec_in, rec_thresholds, rec_out, rec_json;
  auto* rec = app.add_subcommand("recommend", "evaluate the nine optimization rules");
  rec->add_option("--in", rec_in, "canonical log CSV")->required();
  rec->add_option("--thresholds", rec_thresholds, "thresholds file (key=value)");
  rec->add_option("--out", rec_out, "markdown report output");
  rec->add_option("--json", rec_json, "recommendations JSON output");

  std::string ev_in, ev_xes, ev_csv, ev_case;
  bool successes_only = false;
  auto* ev = app.add_subcommand("eventlog", "derive a process-mining event log");
  ev->add_option("--in", ev_in, "canonical log CSV")->required();
  ev->add_option("--xes", ev_xes, "XES output");
  ev->add_option("--csv", ev_csv, "event-log CSV output");
  ev->add_option("--case-field", ev_case, "argN or prefix:<p> (default: derived)");
  ev->add_flag("--successes-only", successes_only, "drop failed transactions");

  std::string mine_in, mine_dfg, mine_alpha, mine_anoms;
  auto* mine = app.add_subcommand("mine", "derive process models from an event log");
  mine->add_option("--in", mine_in, "event-log CSV")->required();
  mine->add_option("--dfg", mine_dfg, "directly-follows graph DOT output");
  mine->add_option("--alpha", mine_alpha, "alpha-algorithm Petri net DOT output");
  mine->add_option("--anomalies", mine_anoms, "anomalous-path findings JSON output");

  std::string loop_config, loop_preset, loop_thresholds, loop_out, loop_json;
  std::uint64_t loop_seed = 1;
  auto* loop = app.add_subcommand(
      "loop", "simulate, recommend, apply each recommendation, re-simulate, compare");
  loop->add_option("--config", loop_config, "sim config file");
  loop->add_option("--preset", loop_preset, "builtin scenario");
  auto* loop_seed_opt = loop->add_option("--seed", loop_seed, "RNG seed");
  loop->add_option("--thresholds", loop_thresholds, "thresholds file");
  loop->add_option("--out", loop_out, "comparison table markdown output");
  loop->add_option("--json", loop_json, "comparison JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, preset, seed, seed_opt->count() > 0, out_path,
                          raw_path, summary_path);
    if (ing->parsed()) return cmd_ingest(ingest_in, ingest_out);
    if (ana->parsed()) return cmd_analyze(analyze_in, ins_s, analyze_out, analyze_thresholds);
    if (rec->parsed()) return cmd_recommend(rec_in, rec_thresholds, rec_out, rec_json);
    if (ev->parsed()) return cmd_eventlog(ev_in, ev_xes, ev_csv, ev_case, successes_only);
    if (mine->parsed()) return cmd_mine(mine_in, mine_dfg, mine_alpha, mine_anoms);
    if (loop->parsed())
      return cmd_loop(loop_config, loop_preset, loop_seed, loop_seed_opt->count() > 0,
                      loop_thresholds, loop_out, loop_json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
