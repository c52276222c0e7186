// Process-mining event log derived from a blockchain log: automated
// common-element (case) extraction, trace construction ordered by commit
// order, and XES / CSV export.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ledgerlens/model.hpp"

namespace ledgerlens {

inline constexpr std::string_view kOrphanTraceLabel = "__orphan__";
inline constexpr std::string_view kEventLogCsvHeader =
    "case_id,activity,commit_order,status,tx_type";

struct CaseField {
  enum class Source { kArgumentPosition, kKeyPrefix };
  Source source = Source::kArgumentPosition;
  std::size_t argument_position = 0;  // kArgumentPosition
  std::string key_prefix;             // kKeyPrefix
  double coverage = 0.0;              // informational, not part of identity

  bool operator==(const CaseField& other) const {
    return source == other.source && argument_position == other.argument_position &&
           key_prefix == other.key_prefix;
  }
  std::string describe() const;
  // "argN" or "prefix:<p>", the CLI --case-field syntax.
  static CaseField parse(std::string_view text);
};

struct Event {
  std::string activity;
  std::uint64_t commit_order = 0;
  TxStatus status = TxStatus::kSuccess;
  TxType tx_type = TxType::kRead;
  bool operator==(const Event&) const = default;
};

struct Trace {
  std::uint64_t case_id = 0;
  std::string case_value;  // common-element value, or the orphan label
  std::vector<Event> events;
  bool operator==(const Trace&) const = default;
};

struct EventLog {
  std::optional<CaseField> case_field;
  std::vector<Trace> traces;  // case ids dense 0..m-1, in trace order

  bool operator==(const EventLog&) const = default;
  std::size_t event_count() const;
};

// The common-element value a transaction carries for a candidate field, if
// present. Key-prefix candidates require exactly one distinct suffix among
// the accessed keys of that prefix class.
std::optional<std::string> case_value_of(const TransactionRecord& tx, const CaseField& field);

// Splits a key into its prefix class and suffix at the last non-alphanumeric
// separator or letter/digit boundary ("product_42" -> {"product_","42"}).
std::pair<std::string, std::string> split_key_prefix(std::string_view key);

// Scores every argument position and key-prefix class by coverage (distinct
// value count breaks ties) and returns the winner. Throws Error when no
// candidate covers at least half of the transactions.
CaseField derive_case_field(const BlockchainLog& log);

// One trace per distinct common-element value; events ordered by commit
// order; dense integer case ids assigned by first appearance. Transactions
// lacking the field land in a reserved orphan trace (last).
EventLog build_event_log(const BlockchainLog& log, const CaseField& field,
                         bool successes_only = false);

void export_xes(const EventLog& event_log, std::ostream& out);
std::string export_xes(const EventLog& event_log);

void export_eventlog_csv(const EventLog& event_log, std::ostream& out);
std::string export_eventlog_csv(const EventLog& event_log);
EventLog read_eventlog_csv(std::istream& in);
EventLog read_eventlog_csv(std::string_view text);

}  // namespace ledgerlens
