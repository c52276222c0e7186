#include "ledgerlens/recommender.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace ledgerlens {

namespace {

// Per-key committed-write history: every successful write bumps the version
// by one, so version v was produced by history[v-1].
struct KeyHistory {
  std::vector<std::uint64_t> writer_commit_orders;  // index = version_after - 1
  std::vector<bool> live_after;
};

std::unordered_map<std::string, KeyHistory> build_histories(const BlockchainLog& log) {
  std::unordered_map<std::string, KeyHistory> out;
  for (const auto& tx : log.transactions) {
    if (tx.status != TxStatus::kSuccess) continue;
    for (const auto& w : tx.write_set) {
      auto& h = out[w.key];
      h.writer_commit_orders.push_back(tx.commit_order);
      h.live_after.push_back(w.value != kTombstoneValue);
    }
  }
  return out;
}

// Committed version of the key as seen by a validation at `before` (strictly
// earlier commit orders only).
std::uint64_t version_before(const KeyHistory& h, std::uint64_t before) {
  auto it = std::lower_bound(h.writer_commit_orders.begin(), h.writer_commit_orders.end(), before);
  return static_cast<std::uint64_t>(it - h.writer_commit_orders.begin());
}

}  // namespace

std::vector<ConflictAttribution> attribute_conflicts(const BlockchainLog& log) {
  const auto histories = build_histories(log);
  std::vector<ConflictAttribution> out;

  std::unordered_map<std::uint64_t, const TransactionRecord*> by_commit;
  for (const auto& tx : log.transactions) by_commit[tx.commit_order] = &tx;

  for (const auto& tx : log.transactions) {
    if (!is_mvcc_family(tx.status)) continue;
    ConflictAttribution attr;
    attr.victim = tx.commit_order;
    std::set<std::uint64_t> invalidators;

    auto first_invalidator = [&](const std::string& key, std::uint64_t observed_version) {
      auto it = histories.find(key);
      if (it == histories.end()) return;
      const KeyHistory& h = it->second;
      const std::uint64_t now = version_before(h, tx.commit_order);
      if (now <= observed_version) return;  // read still valid
      invalidators.insert(h.writer_commit_orders[observed_version]);  // wrote v+1
    };

    for (const auto& r : tx.read_set) first_invalidator(r.key, r.version);

    for (const auto& rr : tx.range_reads) {
      std::set<std::string> observed_keys;
      for (const auto& o : rr.observed) {
        observed_keys.insert(o.key);
        first_invalidator(o.key, o.version);
      }
      // Keys that entered the range after the observation: attribute to the
      // latest committed write that produced the state the validation saw.
      for (const auto& [key, h] : histories) {
        if (key < rr.start_key || key >= rr.end_key) continue;
        if (observed_keys.count(key)) continue;
        const std::uint64_t now = version_before(h, tx.commit_order);
        if (now == 0 || !h.live_after[now - 1]) continue;  // still absent
        invalidators.insert(h.writer_commit_orders[now - 1]);
      }
    }

    attr.invalidators.assign(invalidators.begin(), invalidators.end());
    if (!attr.invalidators.empty()) {
      const auto victim_writes = write_keys(tx);
      attr.reorderable = std::ranges::all_of(attr.invalidators, [&](std::uint64_t co) {
        const auto inv_writes = write_keys(*by_commit.at(co));
        return std::ranges::none_of(inv_writes,
                                    [&](const std::string& k) { return victim_writes.count(k); });
      });
    }
    out.push_back(std::move(attr));
  }
  return out;
}

ReorderAnalysis analyze_reorderability(const BlockchainLog& log) {
  ReorderAnalysis out;
  std::unordered_map<std::uint64_t, const TransactionRecord*> by_commit;
  for (const auto& tx : log.transactions) by_commit[tx.commit_order] = &tx;

  std::set<std::string> victims_side, invalidator_side;
  for (const auto& attr : attribute_conflicts(log)) {
    ++out.total_mvcc_failures;
    if (!attr.reorderable) continue;
    ++out.reorderable_failures;
    const TransactionRecord& victim = *by_commit.at(attr.victim);
    victims_side.insert(victim.activity_name);
    if (out.sample_victims.size() < 16) out.sample_victims.push_back(attr.victim);
    for (std::uint64_t co : attr.invalidators) {
      const TransactionRecord& inv = *by_commit.at(co);
      invalidator_side.insert(inv.activity_name);
      auto pair = std::minmax(victim.activity_name, inv.activity_name);
      ++out.pair_victims[{pair.first, pair.second}];
    }
  }
  for (const auto& a : victims_side)
    if (!invalidator_side.count(a)) out.displaced_activities.insert(a);
  return out;
}

std::optional<Recommendation> detect_activity_reordering(const BlockchainLog& log,
                                                         const MetricsReport& metrics,
                                                         const Thresholds& thresholds) {
  (void)metrics;
  const ReorderAnalysis analysis = analyze_reorderability(log);
  if (analysis.total_mvcc_failures == 0) return std::nullopt;
  const double share = static_cast<double>(analysis.reorderable_failures);
  if (share < thresholds.at * static_cast<double>(analysis.total_mvcc_failures))
    return std::nullopt;
  if (analysis.reorderable_failures == 0) return std::nullopt;

  Recommendation rec;
  rec.kind = RecKind::kActivityReordering;
  rec.level = level_of(rec.kind);
  rec.evidence.commit_orders = analysis.sample_victims;
  std::ostringstream pairs;
  bool first = true;
  for (const auto& [pair, count] : analysis.pair_victims) {
    rec.evidence.activities.push_back(pair.first + "<->" + pair.second);
    if (!first) pairs << "; ";
    pairs << pair.first << "/" << pair.second << " (" << count << " conflicts)";
    first = false;
  }
  std::string displaced;
  for (const auto& a : analysis.displaced_activities) {
    if (!displaced.empty()) displaced += ",";
    displaced += a;
  }
  rec.action["reorder_after"] = displaced;
  std::ostringstream why;
  why << analysis.reorderable_failures << " of " << analysis.total_mvcc_failures
      << " MVCC-family failures stem from write-disjoint activity pairs: " << pairs.str()
      << ". Rescheduling " << (displaced.empty() ? std::string("the victim activities") : displaced)
      << " outside the conflicting phases removes these dependencies.";
  rec.explanation = why.str();
  return rec;
}

std::optional<Recommendation> detect_pruning(const std::vector<AnomalyFinding>& anomalies) {
  if (anomalies.empty()) return std::nullopt;
  Recommendation rec;
  rec.kind = RecKind::kProcessModelPruning;
  rec.level = level_of(rec.kind);
  std::ostringstream why;
  why << "Activities deviate from their expected transaction type:";
  for (const auto& f : anomalies) {
    rec.evidence.activities.push_back(f.activity);
    for (std::uint64_t w : f.witnesses) rec.evidence.commit_orders.push_back(w);
    rec.action["guard_" + f.activity] =
        "abort when the " + f.activity + " path degrades to " + to_string(f.anomalous_type);
    why << " " << f.activity << " ran as " << to_string(f.anomalous_type) << " instead of "
        << to_string(f.expected_type) << " (" << f.witnesses.size() << " occurrences);";
  }
  std::sort(rec.evidence.commit_orders.begin(), rec.evidence.commit_orders.end());
  rec.evidence.commit_orders.erase(
      std::unique(rec.evidence.commit_orders.begin(), rec.evidence.commit_orders.end()),
      rec.evidence.commit_orders.end());
  std::sort(rec.evidence.activities.begin(), rec.evidence.activities.end());
  rec.evidence.activities.erase(
      std::unique(rec.evidence.activities.begin(), rec.evidence.activities.end()),
      rec.evidence.activities.end());
  why << " guard these paths in the contract so they abort at endorsement.";
  rec.explanation = why.str();
  return rec;
}

std::optional<Recommendation> detect_rate_control(const MetricsReport& metrics,
                                                  const Thresholds& thresholds) {
  std::vector<int> flagged;
  for (std::size_t i = 0; i < metrics.trd.rates.size(); ++i) {
    const double trd = metrics.trd.rates[i];
    const double frd = i < metrics.frd.rates.size() ? metrics.frd.rates[i] : 0.0;
    if (trd >= thresholds.rt1 && frd >= trd * thresholds.rt2)
      flagged.push_back(static_cast<int>(i));
  }
  if (flagged.empty()) return std::nullopt;

  // Suggested cap: the busiest interval that was not flagged, i.e. traffic
  // the deployment demonstrably sustained; otherwise a third of Rt1.
  double cap = 0.0;
  for (std::size_t i = 0; i < metrics.trd.rates.size(); ++i)
    if (std::find(flagged.begin(), flagged.end(), static_cast<int>(i)) == flagged.end())
      cap = std::max(cap, metrics.trd.rates[i]);
  if (cap <= 0.0) cap = thresholds.rt1 / 3.0;

  Recommendation rec;
  rec.kind = RecKind::kTransactionRateControl;
  rec.level = level_of(rec.kind);
  rec.evidence.intervals = flagged;
  std::ostringstream cap_text;
  cap_text << std::llround(cap);
  rec.action["send_rate"] = cap_text.str();
  std::ostringstream why;
  why << flagged.size() << " interval(s) of " << metrics.ins_s
      << " s carry both a high send rate (>= " << thresholds.rt1
      << " TPS) and a failure rate of at least " << thresholds.rt2 * 100
      << "% of traffic. Capping the send rate at ~" << cap_text.str()
      << " TPS keeps the workload inside the sustainable envelope.";
  rec.explanation = why.str();
  return rec;
}

namespace {

std::optional<std::int64_t> parse_integer(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Recommendation> detect_delta_writes(const BlockchainLog& log,
                                                  const MetricsReport& metrics,
                                                  std::vector<DeltaNearMiss>* near_misses) {
  (void)metrics;
  std::map<std::string, std::vector<const TransactionRecord*>> by_activity;
  for (const auto& tx : log.transactions) by_activity[tx.activity_name].push_back(&tx);

  std::set<std::pair<std::string, std::string>> hits;  // (activity, key)
  std::vector<std::uint64_t> witnesses;
  std::set<DeltaNearMiss> misses;
  for (const auto& [activity, txs] : by_activity) {
    for (std::size_t i = 0; i + 1 < txs.size(); ++i) {
      const TransactionRecord& x = *txs[i];
      const TransactionRecord& y = *txs[i + 1];  // corPA(x,y) == 1
      if (x.status != TxStatus::kMvccReadConflict) continue;
      if (x.write_set.size() != 1 || y.write_set.size() != 1) continue;
      if (x.write_set[0].key != y.write_set[0].key) continue;
      const auto vx = parse_integer(x.write_set[0].value);
      const auto vy = parse_integer(y.write_set[0].value);
      if (!vx || !vy) continue;
      const std::int64_t diff = std::llabs(*vy - *vx);
      if (diff == 1) {
        hits.insert({activity, x.write_set[0].key});
        if (witnesses.size() < 16) witnesses.push_back(x.commit_order);
      } else if (diff >= 2 && diff <= 4) {
        misses.insert({activity, x.write_set[0].key, *vy - *vx});
      }
    }
  }
  if (near_misses) near_misses->assign(misses.begin(), misses.end());
  if (hits.empty()) return std::nullopt;

  Recommendation rec;
  rec.kind = RecKind::kDeltaWrites;
  rec.level = level_of(rec.kind);
  std::set<std::string> activities;
  for (const auto& [activity, key] : hits) {
    activities.insert(activity);
    rec.evidence.keys.push_back(key);
  }
  std::sort(rec.evidence.keys.begin(), rec.evidence.keys.end());
  rec.evidence.keys.erase(std::unique(rec.evidence.keys.begin(), rec.evidence.keys.end()),
                          rec.evidence.keys.end());
  rec.evidence.activities.assign(activities.begin(), activities.end());
  rec.evidence.commit_orders = witnesses;
  std::string acts;
  for (const auto& a : activities) {
    if (!acts.empty()) acts += ",";
    acts += a;
  }
  rec.action["convert_to_delta_writes"] = acts;
  rec.explanation =
      "Failed transactions of " + acts +
      " increment or decrement a single key by one. Rewriting the update as blind "
      "writes to unique delta keys (aggregated on read) removes the read dependency "
      "that causes these MVCC conflicts.";
  return rec;
}

std::optional<Recommendation> detect_partitioning(const MetricsReport& metrics) {
  std::vector<std::pair<std::string, std::vector<std::string>>> offenders;
  for (const auto& hk : metrics.keys.hotkeys) {
    auto sig = metrics.keys.ksig.find(hk);
    if (sig != metrics.keys.ksig.end() && sig->second > 1) {
      auto acts = metrics.keys.hotkey_activities.find(hk);
      offenders.push_back(
          {hk, acts != metrics.keys.hotkey_activities.end() ? acts->second
                                                            : std::vector<std::string>{}});
    }
  }
  if (offenders.empty()) return std::nullopt;

  Recommendation rec;
  rec.kind = RecKind::kSmartContractPartitioning;
  rec.level = level_of(rec.kind);
  std::ostringstream why;
  why << "Hotkeys are shared by several contract functions:";
  for (const auto& [key, acts] : offenders) {
    rec.evidence.keys.push_back(key);
    std::string list;
    for (const auto& a : acts) {
      rec.evidence.activities.push_back(a);
      if (!list.empty()) list += ",";
      list += a;
    }
    rec.action["split_" + key] = list;
    why << " " << key << " is accessed by {" << list << "};";
  }
  std::sort(rec.evidence.activities.begin(), rec.evidence.activities.end());
  rec.evidence.activities.erase(
      std::unique(rec.evidence.activities.begin(), rec.evidence.activities.end()),
      rec.evidence.activities.end());
  why << " splitting these function groups into separate contracts gives each its own "
         "world state and removes the shared dependency.";
  rec.explanation = why.str();
  return rec;
}

std::optional<Recommendation> detect_data_model_alteration(const MetricsReport& metrics) {
  std::vector<std::string> solo_hotkeys;
  for (const auto& hk : metrics.keys.hotkeys) {
    auto sig = metrics.keys.ksig.find(hk);
    if (sig != metrics.keys.ksig.end() && sig->second == 1) solo_hotkeys.push_back(hk);
  }
  const bool single_hotkey = metrics.keys.hotkeys.size() == 1;
  if (solo_hotkeys.empty() && !single_hotkey) return std::nullopt;

  Recommendation rec;
  rec.kind = RecKind::kDataModelAlteration;
  rec.level = level_of(rec.kind);
  std::ostringstream why;
  const std::vector<std::string>& keys = solo_hotkeys.empty()
                                             ? metrics.keys.hotkeys
                                             : solo_hotkeys;
  why << "Skewed access concentrates failures on ";
  for (const auto& hk : keys) {
    rec.evidence.keys.push_back(hk);
    auto acts = metrics.keys.hotkey_activities.find(hk);
    std::string list;
    if (acts != metrics.keys.hotkey_activities.end())
      for (const auto& a : acts->second) {
        rec.evidence.activities.push_back(a);
        if (!list.empty()) list += ",";
        list += a;
      }
    why << hk << " (used by " << list << ") ";
  }
  std::sort(rec.evidence.activities.begin(), rec.evidence.activities.end());
  rec.evidence.activities.erase(
      std::unique(rec.evidence.activities.begin(), rec.evidence.activities.end()),
      rec.evidence.activities.end());
  rec.action["rekey"] = keys.front();
  why << "- remodel the data so updates target a finer-grained primary key instead of "
         "serialising on this element.";
  rec.explanation = why.str();
  return rec;
}

std::optional<Recommendation> detect_block_size(const MetricsReport& metrics,
                                                const Thresholds& thresholds) {
  if (metrics.b_sizeavg <= 0.0 || metrics.tr <= 0.0) return std::nullopt;
  const double hi = metrics.tr * (1.0 + thresholds.bt);
  const double lo = metrics.tr * (1.0 - thresholds.bt);
  if (!(metrics.b_sizeavg >= hi || metrics.b_sizeavg <= lo)) return std::nullopt;

  Recommendation rec;
  rec.kind = RecKind::kBlockSizeAdaptation;
  rec.level = level_of(rec.kind);
  const long long target = std::llround(metrics.tr);
  rec.action["block_count"] = std::to_string(target);
  rec.action["block_timeout_s"] = "1";
  rec.evidence.intervals.push_back(0);  // whole-log observation
  std::ostringstream why;
  why << "Average block size " << metrics.b_sizeavg << " deviates from the derived send rate "
      << metrics.tr << " TPS by more than " << thresholds.bt * 100
      << "%. Setting block_count=" << target
      << " and block_timeout=1 s aligns min{B_count, Tr*B_timeout} with the rate.";
  if (metrics.b_count_cfg)
    why << " (configured block_count=" << *metrics.b_count_cfg << ")";
  rec.explanation = why.str();
  return rec;
}

std::optional<Recommendation> detect_endorser_restructuring(const MetricsReport& metrics,
                                                            const Thresholds& thresholds) {
  const double limit = thresholds.et * static_cast<double>(metrics.n_transactions);
  Recommendation rec;
  rec.kind = RecKind::kEndorserRestructuring;
  rec.level = level_of(rec.kind);
  for (const auto& [peer, count] : metrics.edsig_peer)
    if (static_cast<double>(count) > limit) rec.evidence.endorsers.push_back(peer);
  for (const auto& [org, count] : metrics.edsig_org)
    if (static_cast<double>(count) > limit) rec.evidence.endorsers.push_back("org:" + org);
  if (rec.evidence.endorsers.empty()) return std::nullopt;

  std::string orgs;
  int n_orgs = 0;
  for (const auto& [org, count] : metrics.edsig_org) {
    if (!orgs.empty()) orgs += ",";
    orgs += org;
    ++n_orgs;
  }
  const int k = std::min(2, std::max(1, n_orgs));
  rec.action["policy"] = "OutOf(" + std::to_string(k) + "," + orgs + ")";
  rec.action["client_distribution"] = "even";
  std::ostringstream why;
  why << "Endorsers carry more than " << thresholds.et * 100
      << "% of all transactions:";
  for (const auto& e : rec.evidence.endorsers) why << " " << e;
  why << ". A balanced OutOf policy over " << orgs
      << " plus an even client-to-endorser distribution removes the bottleneck.";
  rec.explanation = why.str();
  return rec;
}

std::optional<Recommendation> detect_client_boost(const MetricsReport& metrics,
                                                  const Thresholds& thresholds) {
  const double limit = thresholds.it * static_cast<double>(metrics.n_transactions);
  Recommendation rec;
  rec.kind = RecKind::kClientResourceBoost;
  rec.level = level_of(rec.kind);
  std::set<std::string> orgs;
  for (const auto& [client, count] : metrics.ivsig_client)
    if (static_cast<double>(count) > limit) rec.evidence.clients.push_back(client);
  for (const auto& [org, count] : metrics.ivsig_org)
    if (static_cast<double>(count) > limit) {
      rec.evidence.clients.push_back("org:" + org);
      orgs.insert(org);
    }
  if (rec.evidence.clients.empty()) return std::nullopt;

  std::string org_list;
  for (const auto& o : orgs) {
    if (!org_list.empty()) org_list += ",";
    org_list += o;
  }
  rec.action["scale_clients_of"] = org_list.empty() ? "invoking organisations" : org_list;
  std::ostringstream why;
  why << "More than " << thresholds.it * 100
      << "% of transactions are invoked by the same client or organisation (";
  for (const auto& c : rec.evidence.clients) why << " " << c;
  why << " ). Scaling the client resources of "
      << (org_list.empty() ? "these invokers" : org_list)
      << " relieves the submission bottleneck.";
  rec.explanation = why.str();
  return rec;
}

std::set<RecKind> RecommendationSet::kinds() const {
  std::set<RecKind> out;
  for (const auto& r : recommendations) out.insert(r.kind);
  return out;
}

RecommendationSet recommend(const BlockchainLog& log, const MetricsReport& metrics,
                            const Thresholds& thresholds,
                            const std::vector<AnomalyFinding>& anomalies) {
  RecommendationSet out;
  auto add = [&](std::optional<Recommendation> rec) {
    if (rec) out.recommendations.push_back(std::move(*rec));
  };
  add(detect_activity_reordering(log, metrics, thresholds));
  add(detect_pruning(anomalies));
  add(detect_rate_control(metrics, thresholds));
  add(detect_delta_writes(log, metrics, &out.delta_near_misses));
  add(detect_partitioning(metrics));
  add(detect_data_model_alteration(metrics));
  add(detect_block_size(metrics, thresholds));
  add(detect_endorser_restructuring(metrics, thresholds));
  add(detect_client_boost(metrics, thresholds));

  std::sort(out.recommendations.begin(), out.recommendations.end(),
            [](const Recommendation& a, const Recommendation& b) {
              if (a.level != b.level) return a.level < b.level;
              if (a.kind != b.kind) return a.kind < b.kind;
              const std::uint64_t ca =
                  a.evidence.commit_orders.empty() ? 0 : a.evidence.commit_orders.front();
              const std::uint64_t cb =
                  b.evidence.commit_orders.empty() ? 0 : b.evidence.commit_orders.front();
              return ca < cb;
            });
  return out;
}

namespace {

nlohmann::json evidence_json(const Evidence& e) {
  nlohmann::json j;
  if (!e.commit_orders.empty()) j["commit_orders"] = e.commit_orders;
  if (!e.keys.empty()) j["keys"] = e.keys;
  if (!e.activities.empty()) j["activities"] = e.activities;
  if (!e.endorsers.empty()) j["endorsers"] = e.endorsers;
  if (!e.clients.empty()) j["clients"] = e.clients;
  if (!e.intervals.empty()) j["intervals"] = e.intervals;
  return j;
}

}  // namespace

std::string recommendations_to_json(const RecommendationSet& recs, const Thresholds& thresholds) {
  using nlohmann::json;
  json arr = json::array();
  for (const auto& rec : recs.recommendations) {
    arr.push_back({{"kind", to_string(rec.kind)},
                   {"level", to_string(rec.level)},
                   {"evidence", evidence_json(rec.evidence)},
                   {"action", rec.action},
                   {"explanation", rec.explanation}});
  }
  json near = json::array();
  for (const auto& m : recs.delta_near_misses)
    near.push_back({{"activity", m.activity}, {"key", m.key}, {"delta", m.delta}});
  json j = {{"schema", "ledgerlens-recommendations v1"},
            {"thresholds",
             {{"Rt1", thresholds.rt1},
              {"Rt2", thresholds.rt2},
              {"Bt", thresholds.bt},
              {"Et", thresholds.et},
              {"It", thresholds.it},
              {"At", thresholds.at},
              {"Hk_frac", thresholds.hk_frac},
              {"Hk_min", thresholds.hk_min},
              {"ins", thresholds.ins_s}}},
            {"recommendations", std::move(arr)},
            {"delta_near_misses", std::move(near)}};
  return j.dump(2) + "\n";
}

std::string render_report_markdown(const RecommendationSet& recs, const MetricsReport& metrics) {
  std::ostringstream os;
  os << "# Optimization recommendations\n\n";
  os << "Log: " << metrics.n_transactions << " transactions over " << metrics.duration_s
     << " s (" << metrics.tr << " TPS, " << metrics.total_failed << " failed).\n\n";
  os << "Note: the block-size rule is evaluated as a relative deviation check - it fires "
        "when the average block size leaves the band of +/-Bt around the derived send "
        "rate.\n\n";
  if (recs.recommendations.empty()) {
    os << "No recommendations: every rule is within its configured thresholds.\n";
    return os.str();
  }
  for (const auto& rec : recs.recommendations) {
    os << "## [" << to_string(rec.level) << "] " << to_string(rec.kind) << "\n\n";
    os << rec.explanation << "\n\n";
    if (!rec.action.empty()) {
      os << "| setting | value |\n|---|---|\n";
      for (const auto& [k, v] : rec.action) os << "| " << k << " | " << v << " |\n";
      os << "\n";
    }
    const Evidence& e = rec.evidence;
    os << "Evidence:";
    auto list = [&os](const char* label, const auto& values) {
      if (values.empty()) return;
      os << " " << label << "=[";
      for (std::size_t i = 0; i < values.size() && i < 12; ++i) {
        if (i) os << ",";
        os << values[i];
      }
      if (values.size() > 12) os << ",...";
      os << "]";
    };
    list("commit_orders", e.commit_orders);
    list("keys", e.keys);
    list("activities", e.activities);
    list("endorsers", e.endorsers);
    list("clients", e.clients);
    list("intervals", e.intervals);
    os << "\n\n";
  }
  if (!recs.delta_near_misses.empty()) {
    os << "## Delta-write near misses\n\n";
    os << "Counters stepping by more than one (not recommended under the strict +/-1 "
          "rule):\n\n";
    for (const auto& m : recs.delta_near_misses)
      os << "- " << m.activity << " on " << m.key << " (step " << m.delta << ")\n";
    os << "\n";
  }
  return os.str();
}

}  // namespace ledgerlens
