// Raw block-dump ingestion: converts the newline-delimited JSON dump a
// network client produces into a clean canonical BlockchainLog.
//
// Raw format (one block document per line, schema version field required):
//   {"raw_v":1, "block_number":N, "cut":"count|timeout|flush",
//    "transactions":[{...}]}
// Transaction fields: "timestamp_ms", "kind" ("application"|"config"),
// "function", "args", "endorsers", "invoker":{"client","org"},
// "rwset":{"reads":[{"key","version"}], "writes":[{"key","value"}],
// "range_reads":[{"start","end","observed":[...]}]},
// "validation_code". Config transactions carry a "config" payload
// ({"block_count","block_timeout_s","policy"}) instead of an rwset.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ledgerlens/model.hpp"

namespace ledgerlens {

inline constexpr std::string_view kRawDumpSchema = "raw v1";
inline constexpr int kRawSchemaVersion = 1;

enum class RawTxKind { kApplication, kConfig };

struct RawTransaction {
  std::int64_t timestamp_ms = 0;
  RawTxKind kind = RawTxKind::kApplication;
  std::string function;
  std::vector<std::string> args;
  std::vector<std::string> endorsers;
  std::string invoker_client;
  std::string invoker_org;
  std::optional<std::vector<ReadAccess>> reads;
  std::optional<std::vector<WriteAccess>> writes;
  std::optional<std::vector<RangeRead>> range_reads;
  std::string validation_code;
  std::optional<NetworkConfig> config;  // config transactions only
};

struct RawBlock {
  std::uint64_t block_number = 0;
  CutReason cut_reason = CutReason::kCount;
  std::vector<RawTransaction> transactions;
};

struct RawBlockDump {
  std::vector<RawBlock> blocks;
  std::size_t application_tx_count() const;
};

// Streaming line-by-line parse; whole-file residency is never required by
// the parse itself. Errors name the block index and offending field path.
RawBlockDump parse_raw_blocks(std::istream& in);
RawBlockDump parse_raw_blocks(std::string_view text);

// Removes config/setup transactions, assigns commit_order 0..n-1 in ledger
// order, derives the transaction type of every record, and echoes network
// configuration found in config transactions.
BlockchainLog preprocess(const RawBlockDump& raw);

// Classification from the read-write set alone:
// range reads dominate, then tombstone writes (delete), then mixed
// read/write (update), write-only (write), read-only (read).
TxType derive_transaction_type(const std::vector<ReadAccess>& read_set,
                               const std::vector<WriteAccess>& write_set,
                               const std::vector<RangeRead>& range_reads);

// Raw twin of a canonical log (the simulator's --emit-raw output). The
// network config is prepended as a config transaction in the first block.
void write_raw_dump(const BlockchainLog& log, std::ostream& out);

}  // namespace ledgerlens
