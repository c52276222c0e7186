// Metric suite computed from a canonical blockchain log: rate and failure
// distributions, block statistics, endorser/invoker significance, key
// frequency/significance and hotkeys, data-value and proximity correlation,
// and conflict locality.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ledgerlens/model.hpp"

namespace ledgerlens {

// Raw correlated-pair storage is capped (aggregate counts stay exact). The
// cap covers every log of up to 2000 transactions in full.
inline constexpr std::size_t kMaxStoredPairs = 2000000;

struct IntervalSeries {
  std::vector<std::uint64_t> counts;  // transactions per interval
  std::vector<double> rates;          // counts / ins

  bool operator==(const IntervalSeries&) const = default;
};

struct CorrelatedPair {
  std::uint64_t earlier = 0;  // commit orders, earlier < later
  std::uint64_t later = 0;
  auto operator<=>(const CorrelatedPair&) const = default;
};

struct ConflictLocality {
  std::uint64_t intra_block = 0;
  std::uint64_t inter_block = 0;
  bool operator==(const ConflictLocality&) const = default;
};

struct KeyStats {
  std::map<std::string, std::uint64_t> kfreq;  // failed-tx accesses per key
  std::map<std::string, std::uint64_t> ksig;   // distinct activities per key
  std::vector<std::string> hotkeys;            // sorted
  // activity sets of the hotkeys only (evidence for the data-level rules)
  std::map<std::string, std::vector<std::string>> hotkey_activities;
  bool operator==(const KeyStats&) const = default;
};

struct MetricsReport {
  std::size_t n_transactions = 0;
  double duration_s = 0.0;
  double ins_s = 10.0;

  double tr = 0.0;   // average send rate, TPS
  double tfr = 0.0;  // total failure rate, TPS
  std::uint64_t total_failed = 0;
  std::map<std::string, std::uint64_t> failure_counts;  // by status name
  std::map<std::string, double> failure_rates;

  IntervalSeries trd;
  IntervalSeries frd;

  std::optional<int> b_count_cfg;
  std::optional<double> b_timeout_cfg_s;
  double b_sizeavg = 0.0;

  std::map<std::string, std::uint64_t> edsig_peer;
  std::map<std::string, std::uint64_t> edsig_org;
  std::map<std::string, std::uint64_t> ivsig_client;
  std::map<std::string, std::uint64_t> ivsig_org;

  KeyStats keys;

  std::uint64_t cordv_pair_count = 0;
  bool pairs_truncated = false;
  std::vector<CorrelatedPair> cordv_pairs;  // first kMaxStoredPairs, in order
  std::vector<std::uint64_t> corp;          // commit-order distance per stored pair
  // Same-activity correlated pairs, grouped as a distance histogram. The
  // distance is measured on that activity's own transaction subsequence
  // (1 = immediately next transaction of the activity). Always exact.
  std::map<std::string, std::map<std::uint64_t, std::uint64_t>> corpa;
  std::map<std::string, std::uint64_t> corpa_pair_count;

  ConflictLocality locality;
};

// --- individual metric operations ------------------------------------------

// |TX| / elapsed client time; 0 for fewer than two distinct timestamps.
double transaction_rate(const BlockchainLog& log);

// Interval i covers client_ts in [i*ins, (i+1)*ins), from scenario start.
IntervalSeries rate_distribution(const BlockchainLog& log, double ins_s);
IntervalSeries failure_distribution(const BlockchainLog& log, double ins_s);

struct BlockStats {
  int b_count_cfg = 0;
  double b_timeout_cfg_s = 0.0;
  double b_sizeavg = 0.0;
};
// Throws Error when the log carries no configuration record.
BlockStats block_stats(const BlockchainLog& log);

std::map<std::string, std::uint64_t> endorser_significance(const BlockchainLog& log);
std::map<std::string, std::uint64_t> endorser_significance_by_org(const BlockchainLog& log);

struct InvokerSignificance {
  std::map<std::string, std::uint64_t> by_client;
  std::map<std::string, std::uint64_t> by_org;
};
InvokerSignificance invoker_significance(const BlockchainLog& log);

KeyStats key_stats(const BlockchainLog& log, const Thresholds& thresholds);

// Enumerates every unordered pair (x,y), commit_order(x) < commit_order(y),
// sharing at least one accessed key with at least one of the two failed.
// Deterministic order: ascending later commit_order, then earlier.
void for_each_correlated_pair(
    const BlockchainLog& log,
    const std::function<void(const TransactionRecord& earlier,
                             const TransactionRecord& later)>& fn);

// Materialized pair list (capped at kMaxStoredPairs) plus the exact count.
struct DataValueCorrelation {
  std::vector<CorrelatedPair> pairs;
  std::uint64_t pair_count = 0;
  bool truncated = false;
};
DataValueCorrelation data_value_correlation(const BlockchainLog& log);

ConflictLocality classify_conflict_locality(const BlockchainLog& log);

// Full report under one threshold configuration.
MetricsReport compute_metrics(const BlockchainLog& log, const Thresholds& thresholds);

std::string metrics_to_json(const MetricsReport& report);

}  // namespace ledgerlens
