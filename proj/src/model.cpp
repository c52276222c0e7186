#include "ledgerlens/model.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ledgerlens {

std::string to_string(TxStatus s) {
  switch (s) {
    case TxStatus::kSuccess: return "success";
    case TxStatus::kMvccReadConflict: return "mvcc_read_conflict";
    case TxStatus::kPhantomReadConflict: return "phantom_read_conflict";
    case TxStatus::kEndorsementPolicyFailure: return "endorsement_policy_failure";
  }
  throw Error("bad TxStatus");
}

std::string to_string(TxType t) {
  switch (t) {
    case TxType::kRead: return "read";
    case TxType::kWrite: return "write";
    case TxType::kUpdate: return "update";
    case TxType::kRangeRead: return "range_read";
    case TxType::kDelete: return "delete";
  }
  throw Error("bad TxType");
}

std::string to_string(CutReason r) {
  switch (r) {
    case CutReason::kCount: return "count";
    case CutReason::kTimeout: return "timeout";
    case CutReason::kFlush: return "flush";
  }
  throw Error("bad CutReason");
}

TxStatus tx_status_from_string(std::string_view s) {
  if (s == "success") return TxStatus::kSuccess;
  if (s == "mvcc_read_conflict") return TxStatus::kMvccReadConflict;
  if (s == "phantom_read_conflict") return TxStatus::kPhantomReadConflict;
  if (s == "endorsement_policy_failure") return TxStatus::kEndorsementPolicyFailure;
  throw Error("unknown transaction status: " + std::string(s));
}

TxType tx_type_from_string(std::string_view s) {
  if (s == "read") return TxType::kRead;
  if (s == "write") return TxType::kWrite;
  if (s == "update") return TxType::kUpdate;
  if (s == "range_read") return TxType::kRangeRead;
  if (s == "delete") return TxType::kDelete;
  throw Error("unknown transaction type: " + std::string(s));
}

CutReason cut_reason_from_string(std::string_view s) {
  if (s == "count") return CutReason::kCount;
  if (s == "timeout") return CutReason::kTimeout;
  if (s == "flush") return CutReason::kFlush;
  throw Error("unknown cut reason: " + std::string(s));
}

std::set<std::string> read_keys(const TransactionRecord& tx) {
  std::set<std::string> out;
  for (const auto& r : tx.read_set) out.insert(r.key);
  for (const auto& rr : tx.range_reads)
    for (const auto& o : rr.observed) out.insert(o.key);
  return out;
}

std::set<std::string> write_keys(const TransactionRecord& tx) {
  std::set<std::string> out;
  for (const auto& w : tx.write_set) out.insert(w.key);
  return out;
}

std::set<std::string> accessed_keys(const TransactionRecord& tx) {
  std::set<std::string> out = read_keys(tx);
  for (const auto& w : tx.write_set) out.insert(w.key);
  return out;
}

// ---------------------------------------------------------------------------
// validate_log

namespace {

// Same classification the ingestion layer performs; duplicated predicate kept
// local so model validation does not depend on the ingestion module.
TxType classify(const TransactionRecord& tx) {
  if (tx.read_set.empty() && tx.write_set.empty() && tx.range_reads.empty())
    throw Error("empty read-write set");
  if (!tx.range_reads.empty()) return TxType::kRangeRead;
  for (const auto& w : tx.write_set)
    if (w.value == kTombstoneValue) return TxType::kDelete;
  if (!tx.write_set.empty() && !tx.read_set.empty()) return TxType::kUpdate;
  if (!tx.write_set.empty()) return TxType::kWrite;
  return TxType::kRead;
}

}  // namespace

std::vector<std::string> validate_log(const BlockchainLog& log) {
  std::vector<std::string> out;
  auto fail = [&](std::uint64_t co, const std::string& what) {
    out.push_back("commit_order " + std::to_string(co) + ": " + what);
  };

  std::unordered_set<std::uint64_t> seen;
  const TransactionRecord* prev = nullptr;
  for (const auto& tx : log.transactions) {
    if (!seen.insert(tx.commit_order).second)
      fail(tx.commit_order, "commit_order is not unique");
    if (prev != nullptr) {
      if (tx.commit_order <= prev->commit_order)
        fail(tx.commit_order, "transactions are not ordered by commit_order");
      if (tx.block_number < prev->block_number)
        fail(tx.commit_order, "block_number decreases in commit_order");
    }
    try {
      if (classify(tx) != tx.tx_type)
        fail(tx.commit_order, "tx_type does not match its read-write set derivation");
    } catch (const Error&) {
      fail(tx.commit_order, "read-write set is empty");
    }
    if (tx.status == TxStatus::kPhantomReadConflict && tx.range_reads.empty())
      fail(tx.commit_order, "phantom_read_conflict without range reads");
    prev = &tx;
  }

  // Block table: each block non-empty, covers a contiguous commit_order run,
  // in order, and jointly covers exactly the transactions of the log.
  std::unordered_map<std::uint64_t, std::uint64_t> tx_block;
  for (const auto& tx : log.transactions) tx_block[tx.commit_order] = tx.block_number;
  std::size_t covered = 0;
  const Block* prev_block = nullptr;
  for (const auto& b : log.blocks) {
    if (b.tx_commit_orders.empty()) {
      out.push_back("block " + std::to_string(b.block_number) + ": contains no transactions");
      continue;
    }
    if (prev_block != nullptr) {
      if (b.block_number <= prev_block->block_number)
        out.push_back("block " + std::to_string(b.block_number) + ": block numbers not increasing");
      if (b.tx_commit_orders.front() !=
          prev_block->tx_commit_orders.back() + 1)
        out.push_back("block " + std::to_string(b.block_number) +
                      ": commit_orders not contiguous with previous block");
    }
    for (std::size_t i = 0; i < b.tx_commit_orders.size(); ++i) {
      const std::uint64_t co = b.tx_commit_orders[i];
      if (i > 0 && co != b.tx_commit_orders[i - 1] + 1)
        fail(co, "commit_orders not contiguous within block " + std::to_string(b.block_number));
      auto it = tx_block.find(co);
      if (it == tx_block.end()) {
        fail(co, "block " + std::to_string(b.block_number) + " lists unknown transaction");
      } else {
        ++covered;
        if (it->second != b.block_number)
          fail(co, "transaction block_number disagrees with block table");
      }
    }
    prev_block = &b;
  }
  if (!log.blocks.empty() && covered != log.transactions.size())
    out.push_back("block table does not cover every transaction (" +
                  std::to_string(covered) + " of " +
                  std::to_string(log.transactions.size()) + ")");
  return out;
}

// ---------------------------------------------------------------------------
// EndorsementPolicy

namespace {

void skip_ws(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
}

std::string parse_word(std::string_view text, std::size_t& pos) {
  skip_ws(text, pos);
  const std::size_t start = pos;
  while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                               text[pos] == '_' || text[pos] == '.'))
    ++pos;
  if (pos == start) throw Error("endorsement policy: expected identifier at offset " +
                                std::to_string(start));
  return std::string(text.substr(start, pos - start));
}

EndorsementPolicy parse_node(std::string_view text, std::size_t& pos);

void expect(std::string_view text, std::size_t& pos, char c) {
  skip_ws(text, pos);
  if (pos >= text.size() || text[pos] != c)
    throw Error("endorsement policy: expected '" + std::string(1, c) + "' at offset " +
                std::to_string(pos));
  ++pos;
}

// Child list up to the closing ')'. The opening '(' is already consumed.
std::vector<EndorsementPolicy> parse_rest_of_children(std::string_view text, std::size_t& pos) {
  std::vector<EndorsementPolicy> children;
  while (true) {
    children.push_back(parse_node(text, pos));
    skip_ws(text, pos);
    if (pos < text.size() && text[pos] == ',') {
      ++pos;
      continue;
    }
    break;
  }
  expect(text, pos, ')');
  return children;
}

EndorsementPolicy parse_node(std::string_view text, std::size_t& pos) {
  const std::string word = parse_word(text, pos);
  skip_ws(text, pos);
  const bool call = pos < text.size() && text[pos] == '(';
  EndorsementPolicy node;
  if (call && (word == "And" || word == "Or" || word == "Majority")) {
    node.kind = word == "And"  ? EndorsementPolicy::Kind::kAnd
                : word == "Or" ? EndorsementPolicy::Kind::kOr
                               : EndorsementPolicy::Kind::kMajority;
    expect(text, pos, '(');
    node.children = parse_rest_of_children(text, pos);
  } else if (call && word == "OutOf") {
    node.kind = EndorsementPolicy::Kind::kOutOf;
    expect(text, pos, '(');
    skip_ws(text, pos);
    std::size_t num_end = pos;
    while (num_end < text.size() && std::isdigit(static_cast<unsigned char>(text[num_end])))
      ++num_end;
    if (num_end == pos) throw Error("endorsement policy: OutOf requires a leading count");
    std::from_chars(text.data() + pos, text.data() + num_end, node.required);
    pos = num_end;
    expect(text, pos, ',');
    node.children = parse_rest_of_children(text, pos);
  } else {
    node.kind = EndorsementPolicy::Kind::kOrg;
    node.org = word;
  }
  return node;
}

}  // namespace

EndorsementPolicy EndorsementPolicy::parse(std::string_view text) {
  std::size_t pos = 0;
  EndorsementPolicy node = parse_node(text, pos);
  skip_ws(text, pos);
  if (pos != text.size())
    throw Error("endorsement policy: trailing characters at offset " + std::to_string(pos));
  auto problems = node.validate();
  if (!problems.empty()) throw Error("endorsement policy: " + problems.front());
  return node;
}

std::string EndorsementPolicy::to_text() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kOrg:
      os << org;
      break;
    case Kind::kAnd:
    case Kind::kOr:
    case Kind::kMajority: {
      os << (kind == Kind::kAnd ? "And" : kind == Kind::kOr ? "Or" : "Majority") << '(';
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i > 0) os << ',';
        os << children[i].to_text();
      }
      os << ')';
      break;
    }
    case Kind::kOutOf: {
      os << "OutOf(" << required;
      for (const auto& c : children) os << ',' << c.to_text();
      os << ')';
      break;
    }
  }
  return os.str();
}

bool EndorsementPolicy::satisfied_by(const std::set<std::string>& orgs) const {
  switch (kind) {
    case Kind::kOrg:
      return orgs.count(org) > 0;
    case Kind::kAnd:
      return std::ranges::all_of(children, [&](const auto& c) { return c.satisfied_by(orgs); });
    case Kind::kOr:
      return std::ranges::any_of(children, [&](const auto& c) { return c.satisfied_by(orgs); });
    case Kind::kOutOf:
    case Kind::kMajority: {
      const int need = kind == Kind::kOutOf
                           ? required
                           : static_cast<int>(children.size()) / 2 + 1;
      int have = 0;
      for (const auto& c : children)
        if (c.satisfied_by(orgs)) ++have;
      return have >= need;
    }
  }
  return false;
}

std::vector<std::string> EndorsementPolicy::validate() const {
  std::vector<std::string> out;
  if (kind == Kind::kOrg) {
    if (org.empty()) out.push_back("organization leaf with empty id");
    return out;
  }
  if (children.empty()) out.push_back("operator node without children");
  if (kind == Kind::kOutOf &&
      (required < 1 || required > static_cast<int>(children.size())))
    out.push_back("OutOf count must satisfy 1 <= k <= children");
  for (const auto& c : children) {
    auto sub = c.validate();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::set<std::string> EndorsementPolicy::org_leaves() const {
  std::set<std::string> out;
  if (kind == Kind::kOrg) {
    out.insert(org);
    return out;
  }
  for (const auto& c : children) {
    auto sub = c.org_leaves();
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thresholds

std::vector<std::string> Thresholds::validate() const {
  std::vector<std::string> out;
  auto frac = [&](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0))
      out.push_back(std::string(name) + " must lie in (0,1]");
  };
  frac(rt2, "Rt2");
  frac(bt, "Bt");
  frac(et, "Et");
  frac(it, "It");
  frac(at, "At");
  frac(hk_frac, "Hk_frac");
  if (!(rt1 > 0)) out.push_back("Rt1 must be positive");
  if (!(ins_s > 0)) out.push_back("ins must be positive");
  if (hk_min < 1) out.push_back("Hk_min must be at least 1");
  return out;
}

Thresholds Thresholds::parse(std::string_view text) {
  Thresholds t;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("thresholds line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "Rt1") t.rt1 = std::stod(value);
      else if (key == "Rt2") t.rt2 = std::stod(value);
      else if (key == "Bt") t.bt = std::stod(value);
      else if (key == "Et") t.et = std::stod(value);
      else if (key == "It") t.it = std::stod(value);
      else if (key == "At") t.at = std::stod(value);
      else if (key == "Hk_frac") t.hk_frac = std::stod(value);
      else if (key == "Hk_min") t.hk_min = std::stoi(value);
      else if (key == "ins") t.ins_s = std::stod(value);
      else throw Error("thresholds line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw Error("thresholds line " + std::to_string(line_no) + ": bad value for " + key);
    }
  }
  auto problems = t.validate();
  if (!problems.empty()) throw Error("thresholds: " + problems.front());
  return t;
}

namespace {
std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  std::string s = os.str();
  return s;
}
}  // namespace

std::string Thresholds::to_text() const {
  std::ostringstream os;
  os << "Rt1=" << format_double(rt1) << '\n'
     << "Rt2=" << format_double(rt2) << '\n'
     << "Bt=" << format_double(bt) << '\n'
     << "Et=" << format_double(et) << '\n'
     << "It=" << format_double(it) << '\n'
     << "At=" << format_double(at) << '\n'
     << "Hk_frac=" << format_double(hk_frac) << '\n'
     << "Hk_min=" << hk_min << '\n'
     << "ins=" << format_double(ins_s) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Recommendations

std::string to_string(RecLevel level) {
  switch (level) {
    case RecLevel::kUser: return "user";
    case RecLevel::kData: return "data";
    case RecLevel::kSystem: return "system";
  }
  throw Error("bad RecLevel");
}

std::string to_string(RecKind kind) {
  switch (kind) {
    case RecKind::kActivityReordering: return "activity_reordering";
    case RecKind::kProcessModelPruning: return "process_model_pruning";
    case RecKind::kTransactionRateControl: return "transaction_rate_control";
    case RecKind::kDeltaWrites: return "delta_writes";
    case RecKind::kSmartContractPartitioning: return "smart_contract_partitioning";
    case RecKind::kDataModelAlteration: return "data_model_alteration";
    case RecKind::kBlockSizeAdaptation: return "block_size_adaptation";
    case RecKind::kEndorserRestructuring: return "endorser_restructuring";
    case RecKind::kClientResourceBoost: return "client_resource_boost";
  }
  throw Error("bad RecKind");
}

RecKind rec_kind_from_string(std::string_view s) {
  static const std::unordered_map<std::string_view, RecKind> table = {
      {"activity_reordering", RecKind::kActivityReordering},
      {"process_model_pruning", RecKind::kProcessModelPruning},
      {"transaction_rate_control", RecKind::kTransactionRateControl},
      {"delta_writes", RecKind::kDeltaWrites},
      {"smart_contract_partitioning", RecKind::kSmartContractPartitioning},
      {"data_model_alteration", RecKind::kDataModelAlteration},
      {"block_size_adaptation", RecKind::kBlockSizeAdaptation},
      {"endorser_restructuring", RecKind::kEndorserRestructuring},
      {"client_resource_boost", RecKind::kClientResourceBoost},
  };
  auto it = table.find(s);
  if (it == table.end()) throw Error("unknown recommendation kind: " + std::string(s));
  return it->second;
}

RecLevel level_of(RecKind kind) {
  switch (kind) {
    case RecKind::kActivityReordering:
    case RecKind::kProcessModelPruning:
    case RecKind::kTransactionRateControl:
      return RecLevel::kUser;
    case RecKind::kDeltaWrites:
    case RecKind::kSmartContractPartitioning:
    case RecKind::kDataModelAlteration:
      return RecLevel::kData;
    case RecKind::kBlockSizeAdaptation:
    case RecKind::kEndorserRestructuring:
    case RecKind::kClientResourceBoost:
      return RecLevel::kSystem;
  }
  throw Error("bad RecKind");
}

}  // namespace ledgerlens
