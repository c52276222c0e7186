// Process-model discovery over an event log: directly-follows graph,
// alpha-algorithm footprint and Petri net, anomalous-path detection used as
// pruning evidence, and DOT export.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ledgerlens/eventlog.hpp"
#include "ledgerlens/model.hpp"

namespace ledgerlens {

struct DirectlyFollowsGraph {
  std::set<std::string> activities;
  std::map<std::pair<std::string, std::string>, std::uint64_t> edges;
  std::map<std::string, std::uint64_t> start_activities;  // multiset as counts
  std::map<std::string, std::uint64_t> end_activities;

  bool operator==(const DirectlyFollowsGraph&) const = default;
  bool follows(const std::string& a, const std::string& b) const {
    return edges.count({a, b}) > 0;
  }
};

enum class AlphaRelation { kCausality, kReverseCausality, kParallel, kChoice };

struct FootprintMatrix {
  std::vector<std::string> activities;  // sorted
  // relation(a,b) for every ordered pair; exactly one relation per pair
  std::map<std::pair<std::string, std::string>, AlphaRelation> relations;

  bool operator==(const FootprintMatrix&) const = default;
  AlphaRelation at(const std::string& a, const std::string& b) const;
};

struct AlphaPlace {
  std::set<std::string> inputs;   // A: every a->b holds, A pairwise choice
  std::set<std::string> outputs;  // B: pairwise choice
  auto operator<=>(const AlphaPlace&) const = default;
};

struct AlphaNet {
  std::set<std::string> transitions;
  std::vector<AlphaPlace> places;  // maximal pairs, sorted
  std::set<std::string> source_activities;
  std::set<std::string> sink_activities;

  bool operator==(const AlphaNet&) const = default;
};

struct AnomalyFinding {
  std::string activity;
  TxType expected_type = TxType::kRead;   // majority type of the activity
  TxType anomalous_type = TxType::kRead;
  std::vector<std::uint64_t> witnesses;   // commit orders of anomalous txs
  // Immediately preceding activity in each witness's trace ("" at trace start).
  std::vector<std::string> preceding_context;

  bool operator==(const AnomalyFinding&) const = default;
};

DirectlyFollowsGraph mine_dfg(const EventLog& event_log);
FootprintMatrix compute_footprint(const DirectlyFollowsGraph& dfg);
AlphaNet alpha_mine(const EventLog& event_log);

// One finding per (activity, minority type) when an activity exhibits two or
// more distinct transaction types; the expected type is the majority one
// (ties emit findings in both directions).
std::vector<AnomalyFinding> detect_anomalous_paths(const EventLog& event_log);

std::string export_dot(const DirectlyFollowsGraph& dfg);
std::string export_dot(const AlphaNet& net);
std::string anomalies_to_json(const std::vector<AnomalyFinding>& findings);

}  // namespace ledgerlens
