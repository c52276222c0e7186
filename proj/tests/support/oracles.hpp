// Independent brute-force oracles used to pin expected values. Everything
// here recomputes results straight from the definitions (O(n^2) pair scans,
// full replays) without touching the implementation paths under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ledgerlens/metrics.hpp"
#include "ledgerlens/model.hpp"

namespace ledgerlens::testing {

struct OracleMetrics {
  double tr = 0.0;
  std::vector<std::uint64_t> trd_counts;
  std::vector<std::uint64_t> frd_counts;
  std::uint64_t total_failed = 0;
  std::map<std::string, std::uint64_t> failure_counts;
  double b_sizeavg = 0.0;
  std::map<std::string, std::uint64_t> edsig_peer;
  std::map<std::string, std::uint64_t> edsig_org;
  std::map<std::string, std::uint64_t> ivsig_client;
  std::map<std::string, std::uint64_t> ivsig_org;
  std::map<std::string, std::uint64_t> kfreq;
  std::map<std::string, std::uint64_t> ksig;
  std::vector<std::string> hotkeys;
  std::vector<CorrelatedPair> cordv_pairs;
  std::vector<std::uint64_t> corp;
  std::map<std::string, std::map<std::uint64_t, std::uint64_t>> corpa;
  ConflictLocality locality;
};

inline std::set<std::string> oracle_keys(const TransactionRecord& tx) {
  std::set<std::string> keys;
  for (const auto& r : tx.read_set) keys.insert(r.key);
  for (const auto& w : tx.write_set) keys.insert(w.key);
  for (const auto& rr : tx.range_reads)
    for (const auto& o : rr.observed) keys.insert(o.key);
  return keys;
}

inline OracleMetrics oracle_metrics(const BlockchainLog& log, const Thresholds& t) {
  OracleMetrics m;
  const auto& txs = log.transactions;
  if (txs.size() >= 2) {
    std::int64_t lo = txs[0].client_timestamp_ms, hi = txs[0].client_timestamp_ms;
    for (const auto& tx : txs) {
      lo = std::min(lo, tx.client_timestamp_ms);
      hi = std::max(hi, tx.client_timestamp_ms);
    }
    if (hi > lo) m.tr = static_cast<double>(txs.size()) / (static_cast<double>(hi - lo) / 1000.0);
  }

  for (const auto& tx : txs) {
    const auto idx = static_cast<std::size_t>(
        tx.client_timestamp_ms <= 0
            ? 0
            : std::floor(static_cast<double>(tx.client_timestamp_ms) / (t.ins_s * 1000.0)));
    if (idx >= m.trd_counts.size()) {
      m.trd_counts.resize(idx + 1, 0);
      m.frd_counts.resize(idx + 1, 0);
    }
    ++m.trd_counts[idx];
    if (tx.status != TxStatus::kSuccess) {
      ++m.frd_counts[idx];
      ++m.total_failed;
      ++m.failure_counts[to_string(tx.status)];
    }
  }

  if (!log.blocks.empty())
    m.b_sizeavg = static_cast<double>(txs.size()) / static_cast<double>(log.blocks.size());

  for (const auto& tx : txs) {
    for (const auto& e : tx.endorsers) ++m.edsig_peer[e];
    std::set<std::string> orgs;
    for (const auto& e : tx.endorsers) orgs.insert(e.substr(0, e.find('.')));
    for (const auto& org : orgs) ++m.edsig_org[org];
    ++m.ivsig_client[tx.invoker_client];
    ++m.ivsig_org[tx.invoker_org];
  }

  std::map<std::string, std::set<std::string>> acts_per_key;
  for (const auto& tx : txs) {
    const auto keys = oracle_keys(tx);
    for (const auto& k : keys) acts_per_key[k].insert(tx.activity_name);
    if (tx.status != TxStatus::kSuccess)
      for (const auto& k : keys) ++m.kfreq[k];
  }
  for (const auto& [k, acts] : acts_per_key) m.ksig[k] = acts.size();
  const double cutoff =
      std::max(static_cast<double>(t.hk_min), t.hk_frac * static_cast<double>(m.total_failed));
  for (const auto& [k, f] : m.kfreq)
    if (static_cast<double>(f) >= cutoff) m.hotkeys.push_back(k);

  // Activity subsequence positions.
  std::map<std::uint64_t, std::uint64_t> seq_pos;
  {
    std::map<std::string, std::uint64_t> counters;
    std::vector<const TransactionRecord*> in_order;
    for (const auto& tx : txs) in_order.push_back(&tx);
    std::sort(in_order.begin(), in_order.end(),
              [](auto* a, auto* b) { return a->commit_order < b->commit_order; });
    for (const auto* tx : in_order) seq_pos[tx->commit_order] = counters[tx->activity_name]++;
  }

  // O(n^2) pair scan, later transaction outermost so pair order matches.
  std::vector<std::set<std::string>> keys_of(txs.size());
  for (std::size_t i = 0; i < txs.size(); ++i) keys_of[i] = oracle_keys(txs[i]);
  for (std::size_t j = 0; j < txs.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      bool shares = false;
      for (const auto& k : keys_of[i])
        if (keys_of[j].count(k)) {
          shares = true;
          break;
        }
      if (!shares) continue;
      const bool failed =
          txs[i].status != TxStatus::kSuccess || txs[j].status != TxStatus::kSuccess;
      if (!failed) continue;
      m.cordv_pairs.push_back({txs[i].commit_order, txs[j].commit_order});
      m.corp.push_back(txs[j].commit_order - txs[i].commit_order);
      if (txs[i].activity_name == txs[j].activity_name)
        ++m.corpa[txs[i].activity_name][seq_pos[txs[j].commit_order] -
                                        seq_pos[txs[i].commit_order]];
      if (txs[j].status != TxStatus::kSuccess) {
        if (txs[i].block_number == txs[j].block_number)
          ++m.locality.intra_block;
        else
          ++m.locality.inter_block;
      }
    }
  }
  return m;
}

// Serial re-validation: replays every transaction in commit order from its
// recorded endorse-time snapshot and recomputes the status it must have.
inline std::vector<TxStatus> revalidation_oracle(const BlockchainLog& log) {
  EndorsementPolicy policy;
  bool has_policy = false;
  if (log.config && !log.config->policy_text.empty()) {
    policy = EndorsementPolicy::parse(log.config->policy_text);
    has_policy = true;
  }
  struct Entry {
    std::uint64_t version = 0;
    bool live = false;
  };
  std::map<std::string, Entry> world;
  std::vector<TxStatus> out;
  for (const auto& tx : log.transactions) {
    TxStatus status = TxStatus::kSuccess;
    if (has_policy) {
      std::set<std::string> orgs;
      for (const auto& e : tx.endorsers) orgs.insert(e.substr(0, e.find('.')));
      if (!policy.satisfied_by(orgs)) status = TxStatus::kEndorsementPolicyFailure;
    }
    if (status == TxStatus::kSuccess) {
      for (const auto& r : tx.read_set) {
        auto it = world.find(r.key);
        const std::uint64_t now = it != world.end() ? it->second.version : 0;
        if (now != r.version) {
          status = TxStatus::kMvccReadConflict;
          break;
        }
      }
    }
    if (status == TxStatus::kSuccess) {
      for (const auto& rr : tx.range_reads) {
        std::vector<ReadAccess> now;
        for (auto it = world.lower_bound(rr.start_key);
             it != world.end() && it->first < rr.end_key; ++it)
          if (it->second.live) now.push_back({it->first, it->second.version});
        if (now != rr.observed) {
          status = TxStatus::kPhantomReadConflict;
          break;
        }
      }
    }
    if (status == TxStatus::kSuccess) {
      for (const auto& w : tx.write_set) {
        Entry& e = world[w.key];
        ++e.version;
        e.live = w.value != kTombstoneValue;
      }
    }
    out.push_back(status);
  }
  return out;
}

}  // namespace ledgerlens::testing
