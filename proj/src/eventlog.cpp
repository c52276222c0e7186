#include "ledgerlens/eventlog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "ledgerlens/csv.hpp"

namespace ledgerlens {

std::string CaseField::describe() const {
  if (source == Source::kArgumentPosition)
    return "arg" + std::to_string(argument_position);
  return "prefix:" + key_prefix;
}

CaseField CaseField::parse(std::string_view text) {
  CaseField f;
  if (text.starts_with("arg")) {
    const auto digits = text.substr(3);
    std::size_t pos = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), pos);
    if (ec != std::errc() || p != digits.data() + digits.size())
      throw Error("bad case field spec: " + std::string(text));
    f.source = Source::kArgumentPosition;
    f.argument_position = pos;
    return f;
  }
  if (text.starts_with("prefix:")) {
    f.source = Source::kKeyPrefix;
    f.key_prefix = std::string(text.substr(7));
    if (f.key_prefix.empty()) throw Error("empty key prefix in case field spec");
    return f;
  }
  throw Error("bad case field spec: " + std::string(text) + " (want argN or prefix:<p>)");
}

std::pair<std::string, std::string> split_key_prefix(std::string_view key) {
  // Split point: after the last non-alphanumeric character, or at the last
  // letter->digit boundary, whichever is further right.
  std::size_t split = 0;
  for (std::size_t i = 0; i < key.size(); ++i) {
    const unsigned char c = key[i];
    if (!std::isalnum(c)) {
      split = i + 1;
    } else if (i > 0 && std::isdigit(c) &&
               std::isalpha(static_cast<unsigned char>(key[i - 1]))) {
      split = i;
    }
  }
  return {std::string(key.substr(0, split)), std::string(key.substr(split))};
}

std::optional<std::string> case_value_of(const TransactionRecord& tx, const CaseField& field) {
  if (field.source == CaseField::Source::kArgumentPosition) {
    if (field.argument_position < tx.function_arguments.size())
      return tx.function_arguments[field.argument_position];
    return std::nullopt;
  }
  std::optional<std::string> value;
  for (const auto& k : accessed_keys(tx)) {
    auto [prefix, suffix] = split_key_prefix(k);
    if (prefix != field.key_prefix) continue;
    if (value && *value != suffix) return std::nullopt;  // ambiguous
    value = suffix;
  }
  return value;
}

CaseField derive_case_field(const BlockchainLog& log) {
  if (log.transactions.empty()) throw Error("derive_case_field: empty log");

  std::size_t max_args = 0;
  std::set<std::string> prefixes;
  for (const auto& tx : log.transactions) {
    max_args = std::max(max_args, tx.function_arguments.size());
    for (const auto& k : accessed_keys(tx)) {
      auto [prefix, suffix] = split_key_prefix(k);
      if (!prefix.empty() && !suffix.empty()) prefixes.insert(prefix);
    }
  }

  std::vector<CaseField> candidates;
  for (std::size_t i = 0; i < max_args; ++i) {
    CaseField f;
    f.source = CaseField::Source::kArgumentPosition;
    f.argument_position = i;
    candidates.push_back(f);
  }
  for (const auto& p : prefixes) {
    CaseField f;
    f.source = CaseField::Source::kKeyPrefix;
    f.key_prefix = p;
    candidates.push_back(f);
  }

  const double n = static_cast<double>(log.transactions.size());
  std::optional<CaseField> best;
  std::size_t best_distinct = 0;
  for (auto& cand : candidates) {
    std::set<std::string> distinct;
    std::size_t present = 0;
    for (const auto& tx : log.transactions) {
      if (auto v = case_value_of(tx, cand)) {
        ++present;
        distinct.insert(*v);
      }
    }
    cand.coverage = static_cast<double>(present) / n;
    if (!best || cand.coverage > best->coverage ||
        (cand.coverage == best->coverage && distinct.size() > best_distinct)) {
      best = cand;
      best_distinct = distinct.size();
    }
  }
  if (!best || best->coverage < 0.5)
    throw Error("derive_case_field: no candidate field covers at least 50% of transactions");
  return *best;
}

std::size_t EventLog::event_count() const {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.events.size();
  return n;
}

EventLog build_event_log(const BlockchainLog& log, const CaseField& field,
                         bool successes_only) {
  std::vector<const TransactionRecord*> order;
  order.reserve(log.transactions.size());
  for (const auto& tx : log.transactions) order.push_back(&tx);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->commit_order < b->commit_order;
  });

  EventLog out;
  out.case_field = field;
  std::map<std::string, std::size_t> trace_index;
  std::vector<Event> orphans;
  for (const TransactionRecord* tx : order) {
    if (successes_only && is_failure(tx->status)) continue;
    Event ev{tx->activity_name, tx->commit_order, tx->status, tx->tx_type};
    const auto value = case_value_of(*tx, field);
    if (!value) {
      orphans.push_back(std::move(ev));
      continue;
    }
    auto [it, inserted] = trace_index.emplace(*value, out.traces.size());
    if (inserted) {
      Trace t;
      t.case_value = *value;
      out.traces.push_back(std::move(t));
    }
    out.traces[it->second].events.push_back(std::move(ev));
  }
  if (!orphans.empty()) {
    Trace t;
    t.case_value = std::string(kOrphanTraceLabel);
    t.events = std::move(orphans);
    out.traces.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < out.traces.size(); ++i) out.traces[i].case_id = i;
  return out;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Monotone synthetic timestamp: commit order as seconds from 2000-01-01.
std::string synthetic_timestamp(std::uint64_t commit_order) {
  std::uint64_t secs = commit_order;
  const std::uint64_t s = secs % 60;
  secs /= 60;
  const std::uint64_t m = secs % 60;
  secs /= 60;
  const std::uint64_t h = secs % 24;
  // civil-from-days, era-based (days since 1970-01-01; 10957 = 2000-01-01)
  std::int64_t z = static_cast<std::int64_t>(secs / 24) + 10957 + 719468;
  const std::int64_t era = z / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t year_raw = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned month = mp < 10 ? mp + 3 : mp - 9;
  const std::int64_t year = year_raw + (month <= 2);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02llu:%02llu:%02llu.000+00:00",
                static_cast<long long>(year), month, day,
                static_cast<unsigned long long>(h), static_cast<unsigned long long>(m),
                static_cast<unsigned long long>(s));
  return buf;
}

}  // namespace

void export_xes(const EventLog& event_log, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<log xes.version=\"1.0\" xes.features=\"\" xmlns=\"http://www.xes-standard.org/\">\n";
  out << "  <extension name=\"Concept\" prefix=\"concept\" "
         "uri=\"http://www.xes-standard.org/concept.xesext\"/>\n";
  out << "  <extension name=\"Time\" prefix=\"time\" "
         "uri=\"http://www.xes-standard.org/time.xesext\"/>\n";
  if (event_log.case_field)
    out << "  <string key=\"ledgerlens:case_field\" value=\""
        << xml_escape(event_log.case_field->describe()) << "\"/>\n";
  for (const auto& trace : event_log.traces) {
    out << "  <trace>\n";
    out << "    <string key=\"concept:name\" value=\"" << trace.case_id << "\"/>\n";
    out << "    <string key=\"ledgerlens:case_value\" value=\""
        << xml_escape(trace.case_value) << "\"/>\n";
    for (const auto& ev : trace.events) {
      out << "    <event>\n";
      out << "      <string key=\"concept:name\" value=\"" << xml_escape(ev.activity)
          << "\"/>\n";
      out << "      <date key=\"time:timestamp\" value=\""
          << synthetic_timestamp(ev.commit_order) << "\"/>\n";
      out << "      <int key=\"ledgerlens:commit_order\" value=\"" << ev.commit_order
          << "\"/>\n";
      out << "      <string key=\"ledgerlens:status\" value=\"" << to_string(ev.status)
          << "\"/>\n";
      out << "      <string key=\"ledgerlens:tx_type\" value=\"" << to_string(ev.tx_type)
          << "\"/>\n";
      out << "    </event>\n";
    }
    out << "  </trace>\n";
  }
  out << "</log>\n";
}

std::string export_xes(const EventLog& event_log) {
  std::ostringstream os;
  export_xes(event_log, os);
  return os.str();
}

void export_eventlog_csv(const EventLog& event_log, std::ostream& out) {
  out << "# case_field "
      << (event_log.case_field ? event_log.case_field->describe() : std::string("unknown"))
      << "\n";
  for (const auto& trace : event_log.traces)
    out << "# case " << trace.case_id << " value=" << encode_token(trace.case_value) << "\n";
  out << kEventLogCsvHeader << "\n";
  // Events in global commit order so the file mirrors the ledger.
  struct Row {
    std::uint64_t case_id;
    const Event* ev;
  };
  std::vector<Row> rows;
  for (const auto& trace : event_log.traces)
    for (const auto& ev : trace.events) rows.push_back({trace.case_id, &ev});
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.ev->commit_order < b.ev->commit_order; });
  for (const auto& row : rows)
    out << row.case_id << ',' << encode_token(row.ev->activity) << ',' << row.ev->commit_order
        << ',' << to_string(row.ev->status) << ',' << to_string(row.ev->tx_type) << "\n";
}

std::string export_eventlog_csv(const EventLog& event_log) {
  std::ostringstream os;
  export_eventlog_csv(event_log, os);
  return os.str();
}

EventLog read_eventlog_csv(std::istream& in) {
  EventLog out;
  std::map<std::uint64_t, std::string> case_values;
  std::map<std::uint64_t, std::vector<Event>> traces;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string word;
      ls >> word;
      if (word == "case_field") {
        std::string desc;
        ls >> desc;
        if (desc != "unknown") out.case_field = CaseField::parse(desc);
      } else if (word == "case") {
        std::string id_text, value_field;
        ls >> id_text >> value_field;
        if (!value_field.starts_with("value="))
          throw Error("event log line " + std::to_string(line_no) + ": bad case line");
        try {
          case_values[std::stoull(id_text)] = decode_token(value_field.substr(6));
        } catch (const std::invalid_argument&) {
          throw Error("event log line " + std::to_string(line_no) + ": bad case id");
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != kEventLogCsvHeader)
        throw Error("event log line " + std::to_string(line_no) + ": unexpected header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      if (pos == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (cells.size() != 5)
      throw Error("event log line " + std::to_string(line_no) + ": expected 5 columns");
    try {
      Event ev;
      const std::uint64_t case_id = std::stoull(cells[0]);
      ev.activity = decode_token(cells[1]);
      ev.commit_order = std::stoull(cells[2]);
      ev.status = tx_status_from_string(cells[3]);
      ev.tx_type = tx_type_from_string(cells[4]);
      traces[case_id].push_back(std::move(ev));
    } catch (const std::invalid_argument&) {
      throw Error("event log line " + std::to_string(line_no) + ": malformed row");
    }
  }
  if (!header_seen) throw Error("event log CSV: missing header row");
  for (auto& [case_id, events] : traces) {
    Trace t;
    t.case_id = case_id;
    auto it = case_values.find(case_id);
    t.case_value = it != case_values.end() ? it->second : std::to_string(case_id);
    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.commit_order < b.commit_order; });
    t.events = std::move(events);
    out.traces.push_back(std::move(t));
  }
  std::sort(out.traces.begin(), out.traces.end(),
            [](const Trace& a, const Trace& b) { return a.case_id < b.case_id; });
  return out;
}

EventLog read_eventlog_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_eventlog_csv(in);
}

}  // namespace ledgerlens
