#include "ledgerlens/miner.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace ledgerlens {

DirectlyFollowsGraph mine_dfg(const EventLog& event_log) {
  DirectlyFollowsGraph dfg;
  bool any = false;
  for (const auto& trace : event_log.traces) {
    if (trace.events.empty()) continue;
    any = true;
    ++dfg.start_activities[trace.events.front().activity];
    ++dfg.end_activities[trace.events.back().activity];
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      dfg.activities.insert(trace.events[i].activity);
      if (i + 1 < trace.events.size())
        ++dfg.edges[{trace.events[i].activity, trace.events[i + 1].activity}];
    }
  }
  if (!any) throw Error("mine_dfg: event log has no non-empty trace");
  return dfg;
}

AlphaRelation FootprintMatrix::at(const std::string& a, const std::string& b) const {
  auto it = relations.find({a, b});
  if (it == relations.end()) throw Error("footprint: unknown activity pair " + a + "," + b);
  return it->second;
}

FootprintMatrix compute_footprint(const DirectlyFollowsGraph& dfg) {
  FootprintMatrix fp;
  fp.activities.assign(dfg.activities.begin(), dfg.activities.end());
  for (const auto& a : fp.activities) {
    for (const auto& b : fp.activities) {
      const bool ab = dfg.follows(a, b);
      const bool ba = dfg.follows(b, a);
      AlphaRelation rel;
      if (ab && ba) rel = AlphaRelation::kParallel;
      else if (ab) rel = AlphaRelation::kCausality;
      else if (ba) rel = AlphaRelation::kReverseCausality;
      else rel = AlphaRelation::kChoice;
      fp.relations[{a, b}] = rel;
    }
  }
  return fp;
}

namespace {

bool all_choice(const FootprintMatrix& fp, const std::set<std::string>& xs) {
  for (const auto& a : xs)
    for (const auto& b : xs)
      if (fp.at(a, b) != AlphaRelation::kChoice) return false;
  return true;
}

bool all_causal(const FootprintMatrix& fp, const std::set<std::string>& as,
                const std::set<std::string>& bs) {
  for (const auto& a : as)
    for (const auto& b : bs)
      if (fp.at(a, b) != AlphaRelation::kCausality) return false;
  return true;
}

// Subsets of `universe` that are pairwise in choice relation (includes
// singletons; the alpha relations make a#a false only when a>a occurs).
std::vector<std::set<std::string>> choice_cliques(const FootprintMatrix& fp,
                                                  const std::vector<std::string>& universe) {
  std::vector<std::set<std::string>> out;
  const std::size_t n = universe.size();
  if (n > 20) throw Error("alpha miner: too many activities for subset enumeration");
  for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
    std::set<std::string> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ull << i)) subset.insert(universe[i]);
    if (all_choice(fp, subset)) out.push_back(std::move(subset));
  }
  return out;
}

bool subset_of(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

AlphaNet alpha_mine(const EventLog& event_log) {
  const DirectlyFollowsGraph dfg = mine_dfg(event_log);
  const FootprintMatrix fp = compute_footprint(dfg);

  AlphaNet net;
  net.transitions = dfg.activities;
  for (const auto& [a, n] : dfg.start_activities) net.source_activities.insert(a);
  for (const auto& [a, n] : dfg.end_activities) net.sink_activities.insert(a);

  // Only activities with outgoing (resp. incoming) causality can sit on the
  // input (resp. output) side of a place.
  std::vector<std::string> producers, consumers;
  for (const auto& a : fp.activities) {
    bool out = false, in = false;
    for (const auto& b : fp.activities) {
      out = out || fp.at(a, b) == AlphaRelation::kCausality;
      in = in || fp.at(b, a) == AlphaRelation::kCausality;
    }
    if (out) producers.push_back(a);
    if (in) consumers.push_back(a);
  }
  const auto input_cliques = choice_cliques(fp, producers);
  const auto output_cliques = choice_cliques(fp, consumers);
  std::vector<AlphaPlace> candidates;
  for (const auto& as : input_cliques)
    for (const auto& bs : output_cliques)
      if (all_causal(fp, as, bs)) candidates.push_back({as, bs});

  for (const auto& cand : candidates) {
    const bool maximal = std::none_of(
        candidates.begin(), candidates.end(), [&](const AlphaPlace& other) {
          if (other == cand) return false;
          return subset_of(cand.inputs, other.inputs) && subset_of(cand.outputs, other.outputs);
        });
    if (maximal) net.places.push_back(cand);
  }
  std::sort(net.places.begin(), net.places.end());
  return net;
}

std::vector<AnomalyFinding> detect_anomalous_paths(const EventLog& event_log) {
  struct PerActivity {
    std::map<TxType, std::uint64_t> type_counts;
    // per type: (commit order, preceding activity in trace)
    std::map<TxType, std::vector<std::pair<std::uint64_t, std::string>>> occurrences;
  };
  std::map<std::string, PerActivity> per_activity;
  for (const auto& trace : event_log.traces) {
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
      const Event& ev = trace.events[i];
      auto& pa = per_activity[ev.activity];
      ++pa.type_counts[ev.tx_type];
      pa.occurrences[ev.tx_type].push_back(
          {ev.commit_order, i > 0 ? trace.events[i - 1].activity : std::string()});
    }
  }

  std::vector<AnomalyFinding> findings;
  for (const auto& [activity, pa] : per_activity) {
    if (pa.type_counts.size() < 2) continue;
    std::uint64_t majority_count = 0;
    for (const auto& [type, count] : pa.type_counts)
      majority_count = std::max(majority_count, count);
    std::vector<TxType> expected;
    for (const auto& [type, count] : pa.type_counts)
      if (count == majority_count) expected.push_back(type);
    // Ties: each majority type is treated as the expected baseline in turn.
    for (TxType exp : expected) {
      for (const auto& [type, occs] : pa.occurrences) {
        if (type == exp) continue;
        AnomalyFinding f;
        f.activity = activity;
        f.expected_type = exp;
        f.anomalous_type = type;
        for (const auto& [co, prev] : occs) {
          f.witnesses.push_back(co);
          f.preceding_context.push_back(prev);
        }
        findings.push_back(std::move(f));
      }
    }
  }
  return findings;
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string place_label(const AlphaPlace& p) {
  std::string out = "{";
  bool first = true;
  for (const auto& a : p.inputs) {
    if (!first) out += ",";
    out += a;
    first = false;
  }
  out += "}->{";
  first = true;
  for (const auto& b : p.outputs) {
    if (!first) out += ",";
    out += b;
    first = false;
  }
  out += "}";
  return out;
}

}  // namespace

std::string export_dot(const DirectlyFollowsGraph& dfg) {
  std::ostringstream os;
  os << "digraph dfg {\n  rankdir=LR;\n  node [shape=box];\n";
  for (const auto& a : dfg.activities) os << "  \"" << dot_escape(a) << "\";\n";
  for (const auto& [edge, freq] : dfg.edges)
    os << "  \"" << dot_escape(edge.first) << "\" -> \"" << dot_escape(edge.second)
       << "\" [label=\"" << freq << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string export_dot(const AlphaNet& net) {
  std::ostringstream os;
  os << "digraph alpha {\n  rankdir=LR;\n";
  os << "  node [shape=box];\n";
  for (const auto& t : net.transitions) os << "  \"" << dot_escape(t) << "\";\n";
  os << "  node [shape=circle];\n";
  os << "  \"p_source\" [label=\"\"];\n";
  os << "  \"p_sink\" [label=\"\", peripheries=2];\n";
  for (std::size_t i = 0; i < net.places.size(); ++i)
    os << "  \"p" << i << "\" [label=\"\", tooltip=\""
       << dot_escape(place_label(net.places[i])) << "\"];\n";
  for (const auto& a : net.source_activities)
    os << "  \"p_source\" -> \"" << dot_escape(a) << "\";\n";
  for (const auto& a : net.sink_activities)
    os << "  \"" << dot_escape(a) << "\" -> \"p_sink\";\n";
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    for (const auto& a : net.places[i].inputs)
      os << "  \"" << dot_escape(a) << "\" -> \"p" << i << "\";\n";
    for (const auto& b : net.places[i].outputs)
      os << "  \"p" << i << "\" -> \"" << dot_escape(b) << "\";\n";
  }
  os << "}\n";
  return os.str();
}

std::string anomalies_to_json(const std::vector<AnomalyFinding>& findings) {
  using nlohmann::json;
  json arr = json::array();
  for (const auto& f : findings) {
    arr.push_back({{"activity", f.activity},
                   {"expected_type", to_string(f.expected_type)},
                   {"anomalous_type", to_string(f.anomalous_type)},
                   {"witness_commit_orders", f.witnesses},
                   {"preceding_context", f.preceding_context}});
  }
  json j = {{"schema", "ledgerlens-anomalies v1"}, {"findings", std::move(arr)}};
  return j.dump(2) + "\n";
}

}  // namespace ledgerlens
