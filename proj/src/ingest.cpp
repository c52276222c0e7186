#include "ledgerlens/ingest.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace ledgerlens {

using nlohmann::json;

std::size_t RawBlockDump::application_tx_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks)
    for (const auto& tx : b.transactions)
      if (tx.kind == RawTxKind::kApplication) ++n;
  return n;
}

namespace {

[[noreturn]] void raw_error(std::size_t block_index, const std::string& path,
                            const std::string& what) {
  throw Error("raw dump block " + std::to_string(block_index) + ", field " + path + ": " + what);
}

const json& need(const json& obj, const char* key, std::size_t block_index,
                 const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) raw_error(block_index, path + "." + key, "missing");
  return *it;
}

std::vector<ReadAccess> parse_reads(const json& arr, std::size_t bi, const std::string& path) {
  if (!arr.is_array()) raw_error(bi, path, "expected array");
  std::vector<ReadAccess> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& e = arr[i];
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!e.is_object()) raw_error(bi, p, "expected object");
    ReadAccess r;
    r.key = need(e, "key", bi, p).get<std::string>();
    r.version = need(e, "version", bi, p).get<std::uint64_t>();
    out.push_back(std::move(r));
  }
  return out;
}

RawTransaction parse_raw_tx(const json& j, std::size_t bi, std::size_t ti) {
  const std::string path = "transactions[" + std::to_string(ti) + "]";
  if (!j.is_object()) raw_error(bi, path, "expected object");
  RawTransaction tx;
  tx.timestamp_ms = need(j, "timestamp_ms", bi, path).get<std::int64_t>();
  const std::string kind = need(j, "kind", bi, path).get<std::string>();
  if (kind == "application") tx.kind = RawTxKind::kApplication;
  else if (kind == "config") tx.kind = RawTxKind::kConfig;
  else raw_error(bi, path + ".kind", "unknown kind '" + kind + "'");
  tx.function = need(j, "function", bi, path).get<std::string>();
  if (auto it = j.find("args"); it != j.end())
    tx.args = it->get<std::vector<std::string>>();
  if (auto it = j.find("endorsers"); it != j.end())
    tx.endorsers = it->get<std::vector<std::string>>();
  if (auto it = j.find("invoker"); it != j.end()) {
    tx.invoker_client = need(*it, "client", bi, path + ".invoker").get<std::string>();
    tx.invoker_org = need(*it, "org", bi, path + ".invoker").get<std::string>();
  }
  if (auto it = j.find("rwset"); it != j.end()) {
    const json& rw = *it;
    if (!rw.is_object()) raw_error(bi, path + ".rwset", "expected object");
    if (auto r = rw.find("reads"); r != rw.end())
      tx.reads = parse_reads(*r, bi, path + ".rwset.reads");
    else
      tx.reads = std::vector<ReadAccess>{};
    if (auto w = rw.find("writes"); w != rw.end()) {
      std::vector<WriteAccess> writes;
      for (std::size_t i = 0; i < w->size(); ++i) {
        const auto& e = (*w)[i];
        const std::string p = path + ".rwset.writes[" + std::to_string(i) + "]";
        WriteAccess wa;
        wa.key = need(e, "key", bi, p).get<std::string>();
        wa.value = need(e, "value", bi, p).get<std::string>();
        writes.push_back(std::move(wa));
      }
      tx.writes = std::move(writes);
    } else {
      tx.writes = std::vector<WriteAccess>{};
    }
    if (auto rr = rw.find("range_reads"); rr != rw.end()) {
      std::vector<RangeRead> ranges;
      for (std::size_t i = 0; i < rr->size(); ++i) {
        const auto& e = (*rr)[i];
        const std::string p = path + ".rwset.range_reads[" + std::to_string(i) + "]";
        RangeRead range;
        range.start_key = need(e, "start", bi, p).get<std::string>();
        range.end_key = need(e, "end", bi, p).get<std::string>();
        if (auto obs = e.find("observed"); obs != e.end())
          range.observed = parse_reads(*obs, bi, p + ".observed");
        ranges.push_back(std::move(range));
      }
      tx.range_reads = std::move(ranges);
    } else {
      tx.range_reads = std::vector<RangeRead>{};
    }
  }
  tx.validation_code = need(j, "validation_code", bi, path).get<std::string>();
  if (auto it = j.find("config"); it != j.end()) {
    NetworkConfig cfg;
    cfg.block_count = need(*it, "block_count", bi, path + ".config").get<int>();
    cfg.block_timeout_s = need(*it, "block_timeout_s", bi, path + ".config").get<double>();
    cfg.policy_text = need(*it, "policy", bi, path + ".config").get<std::string>();
    tx.config = cfg;
  }
  return tx;
}

}  // namespace

RawBlockDump parse_raw_blocks(std::istream& in) {
  RawBlockDump dump;
  std::string line;
  std::size_t block_index = 0;
  std::optional<std::uint64_t> prev_number;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      raw_error(block_index, "<document>", e.what());
    }
    if (!j.is_object()) raw_error(block_index, "<document>", "expected object");
    const int version = need(j, "raw_v", block_index, "").get<int>();
    if (version != kRawSchemaVersion)
      raw_error(block_index, ".raw_v",
                "unsupported schema version " + std::to_string(version));
    RawBlock block;
    block.block_number = need(j, "block_number", block_index, "").get<std::uint64_t>();
    if (prev_number && block.block_number <= *prev_number)
      raw_error(block_index, ".block_number", "block numbers must strictly increase");
    prev_number = block.block_number;
    if (auto it = j.find("cut"); it != j.end())
      block.cut_reason = cut_reason_from_string(it->get<std::string>());
    const json& txs = need(j, "transactions", block_index, "");
    if (!txs.is_array()) raw_error(block_index, ".transactions", "expected array");
    for (std::size_t ti = 0; ti < txs.size(); ++ti)
      block.transactions.push_back(parse_raw_tx(txs[ti], block_index, ti));
    dump.blocks.push_back(std::move(block));
    ++block_index;
  }
  return dump;
}

RawBlockDump parse_raw_blocks(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_raw_blocks(in);
}

TxType derive_transaction_type(const std::vector<ReadAccess>& read_set,
                               const std::vector<WriteAccess>& write_set,
                               const std::vector<RangeRead>& range_reads) {
  if (read_set.empty() && write_set.empty() && range_reads.empty())
    throw Error("derive_transaction_type: empty read-write set");
  if (!range_reads.empty()) return TxType::kRangeRead;
  for (const auto& w : write_set)
    if (w.value == kTombstoneValue) return TxType::kDelete;
  if (!write_set.empty() && !read_set.empty()) return TxType::kUpdate;
  if (!write_set.empty()) return TxType::kWrite;
  return TxType::kRead;
}

namespace {

TxStatus status_from_code(const std::string& code, std::size_t block_index) {
  if (code == "VALID") return TxStatus::kSuccess;
  if (code == "MVCC_READ_CONFLICT") return TxStatus::kMvccReadConflict;
  if (code == "PHANTOM" || code == "PHANTOM_READ_CONFLICT")
    return TxStatus::kPhantomReadConflict;
  if (code == "ENDORSEMENT_POLICY_FAILURE") return TxStatus::kEndorsementPolicyFailure;
  throw Error("raw dump block " + std::to_string(block_index) +
              ": unknown validation code '" + code + "'");
}

}  // namespace

BlockchainLog preprocess(const RawBlockDump& raw) {
  BlockchainLog log;
  std::uint64_t commit_order = 0;
  for (std::size_t bi = 0; bi < raw.blocks.size(); ++bi) {
    const RawBlock& rb = raw.blocks[bi];
    Block block;
    block.block_number = rb.block_number;
    block.cut_reason = rb.cut_reason;
    for (const auto& rtx : rb.transactions) {
      if (rtx.kind == RawTxKind::kConfig) {
        if (rtx.config) log.config = rtx.config;
        continue;
      }
      if (!rtx.reads.has_value())
        throw Error("raw dump block " + std::to_string(bi) +
                    ": application transaction lacks a read-write payload");
      TransactionRecord tx;
      tx.client_timestamp_ms = rtx.timestamp_ms;
      tx.activity_name = rtx.function;
      tx.function_arguments = rtx.args;
      tx.endorsers = rtx.endorsers;
      std::ranges::sort(tx.endorsers);
      tx.invoker_client = rtx.invoker_client;
      tx.invoker_org = rtx.invoker_org;
      tx.read_set = *rtx.reads;
      tx.write_set = *rtx.writes;
      tx.range_reads = *rtx.range_reads;
      tx.status = status_from_code(rtx.validation_code, bi);
      tx.tx_type = derive_transaction_type(tx.read_set, tx.write_set, tx.range_reads);
      tx.commit_order = commit_order++;
      tx.block_number = rb.block_number;
      block.tx_commit_orders.push_back(tx.commit_order);
      log.transactions.push_back(std::move(tx));
    }
    if (!block.tx_commit_orders.empty()) log.blocks.push_back(std::move(block));
  }
  return log;
}

namespace {

json reads_to_json(const std::vector<ReadAccess>& reads) {
  json arr = json::array();
  for (const auto& r : reads) arr.push_back({{"key", r.key}, {"version", r.version}});
  return arr;
}

std::string code_of(TxStatus s) {
  switch (s) {
    case TxStatus::kSuccess: return "VALID";
    case TxStatus::kMvccReadConflict: return "MVCC_READ_CONFLICT";
    case TxStatus::kPhantomReadConflict: return "PHANTOM_READ_CONFLICT";
    case TxStatus::kEndorsementPolicyFailure: return "ENDORSEMENT_POLICY_FAILURE";
  }
  throw Error("bad TxStatus");
}

json raw_tx_json(const TransactionRecord& tx) {
  json writes = json::array();
  for (const auto& w : tx.write_set) writes.push_back({{"key", w.key}, {"value", w.value}});
  json ranges = json::array();
  for (const auto& rr : tx.range_reads)
    ranges.push_back({{"start", rr.start_key},
                      {"end", rr.end_key},
                      {"observed", reads_to_json(rr.observed)}});
  return json{{"timestamp_ms", tx.client_timestamp_ms},
              {"kind", "application"},
              {"function", tx.activity_name},
              {"args", tx.function_arguments},
              {"endorsers", tx.endorsers},
              {"invoker", {{"client", tx.invoker_client}, {"org", tx.invoker_org}}},
              {"rwset",
               {{"reads", reads_to_json(tx.read_set)},
                {"writes", writes},
                {"range_reads", ranges}}},
              {"validation_code", code_of(tx.status)}};
}

}  // namespace

void write_raw_dump(const BlockchainLog& log, std::ostream& out) {
  std::map<std::uint64_t, const Block*> blocks;
  for (const auto& b : log.blocks) blocks[b.block_number] = &b;
  std::map<std::uint64_t, std::vector<const TransactionRecord*>> members;
  for (const auto& tx : log.transactions) members[tx.block_number].push_back(&tx);

  bool config_pending = log.config.has_value();
  for (const auto& [number, block] : blocks) {
    json txs = json::array();
    if (config_pending) {
      json cfg_tx = {{"timestamp_ms", 0},
                     {"kind", "config"},
                     {"function", "__network_config__"},
                     {"validation_code", "VALID"},
                     {"config",
                      {{"block_count", log.config->block_count},
                       {"block_timeout_s", log.config->block_timeout_s},
                       {"policy", log.config->policy_text}}}};
      txs.push_back(std::move(cfg_tx));
      config_pending = false;
    }
    for (const TransactionRecord* tx : members[number]) txs.push_back(raw_tx_json(*tx));
    json doc = {{"raw_v", kRawSchemaVersion},
                {"block_number", number},
                {"cut", to_string(block->cut_reason)},
                {"transactions", std::move(txs)}};
    out << doc.dump() << "\n";
  }
}

}  // namespace ledgerlens
