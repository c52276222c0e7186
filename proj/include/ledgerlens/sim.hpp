// Deterministic discrete-event simulation of the execute-order-validate
// pipeline plus the workload generator, producing canonical blockchain logs
// and performance summaries. Scenario transforms mirror each optimization so
// the recommend -> apply -> re-measure loop runs closed.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ledgerlens/model.hpp"

namespace ledgerlens {

enum class WorkloadType { kUniform, kReadHeavy, kInsertHeavy, kUpdateHeavy, kRangeReadHeavy };
enum class Scenario { kSynthetic, kScm, kDrm, kEhr, kDv, kLap };
enum class ContractVariant { kPruned, kDeltaWrite, kPartitioned, kAlteredDataModel };

std::string to_string(WorkloadType t);
std::string to_string(Scenario s);
std::string to_string(ContractVariant v);
WorkloadType workload_type_from_string(std::string_view s);
Scenario scenario_from_string(std::string_view s);
ContractVariant contract_variant_from_string(std::string_view s);

struct SimConfig {
  std::uint64_t seed = 1;
  int n_transactions = 10000;
  double send_rate = 300.0;  // TPS
  WorkloadType workload_type = WorkloadType::kUniform;
  int key_space_size = 1000;
  double key_skew = 1.0;  // Zipf exponent over the key space
  int n_orgs = 2;
  std::string endorsement_policy;  // empty: Majority(Org1..OrgN)
  double endorser_skew = 0.0;      // Zipf exponent over endorser preference
  double tx_dist_skew = 0.0;       // fraction of transactions invoked by org 1
  int block_count = 300;
  double block_timeout_s = 1.0;
  double endorse_latency_ms = 50.0;
  double order_latency_ms = 100.0;
  double validate_latency_ms = 1.0;  // per transaction
  double block_overhead_ms = 150.0;  // fixed per-block validation cost
  int clients_per_org = 4;
  double endorser_drop_rate = 0.0;  // chance of an under-collected endorsement
  Scenario scenario = Scenario::kSynthetic;
  std::set<ContractVariant> contract_variants;  // empty: baseline contract
  std::vector<std::string> reorder_after;   // activities displaced to the end
  std::vector<std::string> delta_activities;
  std::set<int> boosted_orgs;  // orgs with doubled clients

  bool operator==(const SimConfig&) const = default;
  std::vector<std::string> validate() const;
  EndorsementPolicy policy() const;

  // Flat key=value file ("sim config"); `scenario=<preset>` keys load a
  // builtin preset first, remaining keys override it.
  static SimConfig parse(std::string_view text);
  std::string to_text() const;
};

struct PerfSummary {
  std::uint64_t submitted = 0;  // transactions that reached the ledger
  std::uint64_t aborted = 0;    // pruned at endorsement, never submitted
  std::uint64_t successes = 0;
  std::map<std::string, std::uint64_t> status_counts;
  double success_rate = 0.0;    // successes / submitted
  double throughput_tps = 0.0;  // successes / makespan
  double avg_latency_ms = 0.0;  // commit - client send, successful txs
  double makespan_s = 0.0;
  std::map<std::string, std::uint64_t> per_activity_total;
  std::map<std::string, std::uint64_t> per_activity_success;
};

std::string perf_to_json(const PerfSummary& perf);

struct SimResult {
  BlockchainLog log;
  PerfSummary perf;
};

// Deterministic: identical (config, seed) yields a byte-identical canonical
// log.
SimResult run(const SimConfig& config);

// Translates a fired recommendation into its configuration change: block
// count from the derived rate, OutOf policy, capped send rate, doubled
// clients, displaced activities, or a contract variant.
SimConfig apply_optimization(const SimConfig& config, const Recommendation& rec);

// Named presets reproducing the evaluation workloads: a supply-chain
// pipeline, play-heavy rights management, update-heavy health records, a
// bursty voting scenario, and an employee-keyed loan process.
std::map<std::string, SimConfig> builtin_scenarios();

}  // namespace ledgerlens
