// Canonical data model shared by every ledgerlens module: transactions,
// blocks, endorsement policies, thresholds, recommendations.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ledgerlens {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Reserved write value marking a key deletion.
inline constexpr std::string_view kTombstoneValue = "__DELETED__";

enum class TxStatus {
  kSuccess,
  kMvccReadConflict,
  kPhantomReadConflict,
  kEndorsementPolicyFailure,
};

enum class TxType { kRead, kWrite, kUpdate, kRangeRead, kDelete };

enum class CutReason { kCount, kTimeout, kFlush };

std::string to_string(TxStatus s);
std::string to_string(TxType t);
std::string to_string(CutReason r);
TxStatus tx_status_from_string(std::string_view s);
TxType tx_type_from_string(std::string_view s);
CutReason cut_reason_from_string(std::string_view s);

inline bool is_failure(TxStatus s) { return s != TxStatus::kSuccess; }
// Phantom conflicts are the range-read variant of MVCC read conflicts.
inline bool is_mvcc_family(TxStatus s) {
  return s == TxStatus::kMvccReadConflict || s == TxStatus::kPhantomReadConflict;
}

struct ReadAccess {
  std::string key;
  std::uint64_t version = 0;
  auto operator<=>(const ReadAccess&) const = default;
};

struct WriteAccess {
  std::string key;
  std::string value;
  auto operator<=>(const WriteAccess&) const = default;
};

struct RangeRead {
  std::string start_key;  // inclusive
  std::string end_key;    // exclusive
  std::vector<ReadAccess> observed;
  auto operator<=>(const RangeRead&) const = default;
};

// One ledger entry with the nine extracted/derived attributes.
struct TransactionRecord {
  std::int64_t client_timestamp_ms = 0;
  std::string activity_name;
  std::vector<std::string> function_arguments;
  std::vector<std::string> endorsers;  // sorted, org-qualified ("Org1.peer0")
  std::string invoker_client;
  std::string invoker_org;
  std::vector<ReadAccess> read_set;
  std::vector<WriteAccess> write_set;
  std::vector<RangeRead> range_reads;
  TxStatus status = TxStatus::kSuccess;
  TxType tx_type = TxType::kRead;
  std::uint64_t commit_order = 0;
  std::uint64_t block_number = 0;

  auto operator<=>(const TransactionRecord&) const = default;
};

// Every key the transaction touched: reads, writes, and range observations.
std::set<std::string> accessed_keys(const TransactionRecord& tx);
std::set<std::string> read_keys(const TransactionRecord& tx);
std::set<std::string> write_keys(const TransactionRecord& tx);

struct Block {
  std::uint64_t block_number = 0;
  std::vector<std::uint64_t> tx_commit_orders;
  CutReason cut_reason = CutReason::kCount;
  auto operator<=>(const Block&) const = default;
};

// Network configuration echoed into the log by the producing network.
struct NetworkConfig {
  int block_count = 0;
  double block_timeout_s = 0.0;
  std::string policy_text;
  auto operator<=>(const NetworkConfig&) const = default;
};

struct BlockchainLog {
  std::vector<TransactionRecord> transactions;
  std::vector<Block> blocks;
  std::optional<NetworkConfig> config;

  bool operator==(const BlockchainLog&) const = default;
  std::size_t size() const { return transactions.size(); }
};

// Empty result iff every model invariant holds. Violations are data, not
// errors; each one names the commit_order (where applicable) and the
// broken invariant.
std::vector<std::string> validate_log(const BlockchainLog& log);

// Boolean expression over organizations. Majority(children) is semantically
// OutOf(floor(n/2)+1, children).
struct EndorsementPolicy {
  enum class Kind { kAnd, kOr, kOutOf, kMajority, kOrg };

  Kind kind = Kind::kOrg;
  int required = 0;  // OutOf only
  std::string org;   // leaf only
  std::vector<EndorsementPolicy> children;

  bool operator==(const EndorsementPolicy&) const = default;

  // Parses e.g. "And(Org1,Or(Org2,Org3,Org4))", "OutOf(2,Org1,Org2)",
  // "Majority(Org1,Org2,Org3)". Throws Error on malformed text.
  static EndorsementPolicy parse(std::string_view text);
  std::string to_text() const;

  // Structural satisfaction by a set of endorsing organizations.
  bool satisfied_by(const std::set<std::string>& orgs) const;
  std::vector<std::string> validate() const;
  std::set<std::string> org_leaves() const;
};

// User-configurable rule thresholds. Defaults follow the evaluation setup:
// Et=0.5, Rt1=300, Rt2=0.3, Bt=0.6, It=0.5, At=0.4; hotkey cutoffs and the
// interval size are local defaults.
struct Thresholds {
  double rt1 = 300.0;     // rate threshold, TPS
  double rt2 = 0.3;       // failure fraction within a flagged interval
  double bt = 0.6;        // block-size deviation fraction
  double et = 0.5;        // endorser fraction
  double it = 0.5;        // invoker fraction
  double at = 0.4;        // reorderable-MVCC fraction
  double hk_frac = 0.10;  // hotkey share of all failed transactions
  int hk_min = 5;         // hotkey minimum failed-access count
  double ins_s = 10.0;    // interval size, seconds

  bool operator==(const Thresholds&) const = default;
  std::vector<std::string> validate() const;

  // Flat key=value text with keys Rt1, Rt2, Bt, Et, It, At, Hk_frac,
  // Hk_min, ins. Unset keys keep defaults.
  static Thresholds parse(std::string_view text);
  std::string to_text() const;
};

enum class RecLevel { kUser, kData, kSystem };

enum class RecKind {
  kActivityReordering,
  kProcessModelPruning,
  kTransactionRateControl,
  kDeltaWrites,
  kSmartContractPartitioning,
  kDataModelAlteration,
  kBlockSizeAdaptation,
  kEndorserRestructuring,
  kClientResourceBoost,
};

std::string to_string(RecLevel level);
std::string to_string(RecKind kind);
RecKind rec_kind_from_string(std::string_view s);
// Fixed kind -> level taxonomy: reordering/pruning/rate-control are user
// level, delta/partitioning/data-model data level, the rest system level.
RecLevel level_of(RecKind kind);

struct Evidence {
  std::vector<std::uint64_t> commit_orders;
  std::vector<std::string> keys;
  std::vector<std::string> activities;
  std::vector<std::string> endorsers;
  std::vector<std::string> clients;
  std::vector<int> intervals;

  bool operator==(const Evidence&) const = default;
  bool empty() const {
    return commit_orders.empty() && keys.empty() && activities.empty() &&
           endorsers.empty() && clients.empty() && intervals.empty();
  }
};

struct Recommendation {
  RecKind kind = RecKind::kActivityReordering;
  RecLevel level = RecLevel::kUser;
  Evidence evidence;
  // Structured action parameters, e.g. {"block_count","300"} or
  // {"reorder_after","queryProducts,updateAuditInfo"}.
  std::map<std::string, std::string> action;
  std::string explanation;

  bool operator==(const Recommendation&) const = default;
};

}  // namespace ledgerlens
