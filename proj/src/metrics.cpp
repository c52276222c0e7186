#include "ledgerlens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"

namespace ledgerlens {

namespace {

double duration_seconds(const BlockchainLog& log) {
  if (log.transactions.size() < 2) return 0.0;
  std::int64_t lo = log.transactions.front().client_timestamp_ms;
  std::int64_t hi = lo;
  for (const auto& tx : log.transactions) {
    lo = std::min(lo, tx.client_timestamp_ms);
    hi = std::max(hi, tx.client_timestamp_ms);
  }
  return static_cast<double>(hi - lo) / 1000.0;
}

std::size_t interval_index(std::int64_t ts_ms, double ins_s) {
  if (ts_ms <= 0) return 0;
  return static_cast<std::size_t>(std::floor(static_cast<double>(ts_ms) / (ins_s * 1000.0)));
}

IntervalSeries bucketize(const BlockchainLog& log, double ins_s, bool failures_only) {
  IntervalSeries series;
  if (log.transactions.empty()) return series;
  std::size_t max_idx = 0;
  for (const auto& tx : log.transactions)
    max_idx = std::max(max_idx, interval_index(tx.client_timestamp_ms, ins_s));
  series.counts.assign(max_idx + 1, 0);
  for (const auto& tx : log.transactions) {
    if (failures_only && !is_failure(tx.status)) continue;
    ++series.counts[interval_index(tx.client_timestamp_ms, ins_s)];
  }
  series.rates.reserve(series.counts.size());
  for (std::uint64_t c : series.counts)
    series.rates.push_back(static_cast<double>(c) / ins_s);
  return series;
}

}  // namespace

double transaction_rate(const BlockchainLog& log) {
  if (log.transactions.size() < 2) return 0.0;
  const double d = duration_seconds(log);
  if (d <= 0.0) return 0.0;
  return static_cast<double>(log.transactions.size()) / d;
}

IntervalSeries rate_distribution(const BlockchainLog& log, double ins_s) {
  if (!(ins_s > 0)) throw Error("rate_distribution: interval size must be positive");
  return bucketize(log, ins_s, false);
}

IntervalSeries failure_distribution(const BlockchainLog& log, double ins_s) {
  if (!(ins_s > 0)) throw Error("failure_distribution: interval size must be positive");
  return bucketize(log, ins_s, true);
}

BlockStats block_stats(const BlockchainLog& log) {
  if (!log.config)
    throw Error("block_stats: log carries no network configuration record");
  if (log.blocks.empty()) throw Error("block_stats: log has no blocks");
  BlockStats st;
  st.b_count_cfg = log.config->block_count;
  st.b_timeout_cfg_s = log.config->block_timeout_s;
  st.b_sizeavg =
      static_cast<double>(log.transactions.size()) / static_cast<double>(log.blocks.size());
  return st;
}

std::map<std::string, std::uint64_t> endorser_significance(const BlockchainLog& log) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& tx : log.transactions)
    for (const auto& e : tx.endorsers) ++out[e];
  return out;
}

std::map<std::string, std::uint64_t> endorser_significance_by_org(const BlockchainLog& log) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& tx : log.transactions) {
    std::set<std::string> orgs;
    for (const auto& e : tx.endorsers) orgs.insert(e.substr(0, e.find('.')));
    for (const auto& org : orgs) ++out[org];
  }
  return out;
}

InvokerSignificance invoker_significance(const BlockchainLog& log) {
  InvokerSignificance out;
  for (const auto& tx : log.transactions) {
    ++out.by_client[tx.invoker_client];
    ++out.by_org[tx.invoker_org];
  }
  return out;
}

KeyStats key_stats(const BlockchainLog& log, const Thresholds& thresholds) {
  KeyStats st;
  std::uint64_t total_failed = 0;
  for (const auto& tx : log.transactions) {
    const auto keys = accessed_keys(tx);
    if (is_failure(tx.status)) {
      ++total_failed;
      for (const auto& k : keys) ++st.kfreq[k];  // once per failed transaction
    }
  }
  std::map<std::string, std::set<std::string>> activities_per_key;
  for (const auto& tx : log.transactions)
    for (const auto& k : accessed_keys(tx)) activities_per_key[k].insert(tx.activity_name);
  for (const auto& [k, acts] : activities_per_key)
    st.ksig[k] = static_cast<std::uint64_t>(acts.size());

  const double cutoff = std::max(static_cast<double>(thresholds.hk_min),
                                 thresholds.hk_frac * static_cast<double>(total_failed));
  for (const auto& [k, freq] : st.kfreq)
    if (static_cast<double>(freq) >= cutoff) st.hotkeys.push_back(k);
  for (const auto& hk : st.hotkeys) {
    const auto& acts = activities_per_key[hk];
    st.hotkey_activities[hk].assign(acts.begin(), acts.end());
  }
  return st;
}

void for_each_correlated_pair(
    const BlockchainLog& log,
    const std::function<void(const TransactionRecord&, const TransactionRecord&)>& fn) {
  // Per-key accessor lists in commit order; each pair is visited exactly once
  // at its later transaction.
  std::unordered_map<std::string, std::vector<std::uint32_t>> accessors;
  std::vector<std::set<std::string>> keys_of(log.transactions.size());
  for (std::size_t i = 0; i < log.transactions.size(); ++i)
    keys_of[i] = accessed_keys(log.transactions[i]);
  for (std::size_t i = 0; i < log.transactions.size(); ++i)
    for (const auto& k : keys_of[i]) accessors[k].push_back(static_cast<std::uint32_t>(i));

  std::vector<std::uint32_t> partners;
  for (std::size_t yi = 0; yi < log.transactions.size(); ++yi) {
    const TransactionRecord& y = log.transactions[yi];
    partners.clear();
    for (const auto& k : keys_of[yi]) {
      const auto& list = accessors[k];
      for (std::uint32_t xi : list) {
        if (xi >= yi) break;
        partners.push_back(xi);
      }
    }
    if (partners.empty()) continue;
    std::sort(partners.begin(), partners.end());
    partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
    const bool y_failed = is_failure(y.status);
    for (std::uint32_t xi : partners) {
      const TransactionRecord& x = log.transactions[xi];
      if (y_failed || is_failure(x.status)) fn(x, y);
    }
  }
}

DataValueCorrelation data_value_correlation(const BlockchainLog& log) {
  DataValueCorrelation out;
  for_each_correlated_pair(log, [&](const TransactionRecord& x, const TransactionRecord& y) {
    ++out.pair_count;
    if (out.pairs.size() < kMaxStoredPairs)
      out.pairs.push_back({x.commit_order, y.commit_order});
    else
      out.truncated = true;
  });
  return out;
}

ConflictLocality classify_conflict_locality(const BlockchainLog& log) {
  ConflictLocality out;
  for_each_correlated_pair(log, [&](const TransactionRecord& x, const TransactionRecord& y) {
    if (!is_failure(y.status)) return;
    if (x.block_number == y.block_number)
      ++out.intra_block;
    else
      ++out.inter_block;
  });
  return out;
}

MetricsReport compute_metrics(const BlockchainLog& log, const Thresholds& thresholds) {
  MetricsReport r;
  r.n_transactions = log.transactions.size();
  r.duration_s = duration_seconds(log);
  r.ins_s = thresholds.ins_s;
  r.tr = transaction_rate(log);

  for (const auto& tx : log.transactions) {
    if (is_failure(tx.status)) {
      ++r.total_failed;
      ++r.failure_counts[to_string(tx.status)];
    }
  }
  r.tfr = r.duration_s > 0 ? static_cast<double>(r.total_failed) / r.duration_s : 0.0;
  for (const auto& [name, count] : r.failure_counts)
    r.failure_rates[name] =
        r.duration_s > 0 ? static_cast<double>(count) / r.duration_s : 0.0;

  r.trd = rate_distribution(log, thresholds.ins_s);
  r.frd = failure_distribution(log, thresholds.ins_s);

  if (log.config) {
    const BlockStats st = block_stats(log);
    r.b_count_cfg = st.b_count_cfg;
    r.b_timeout_cfg_s = st.b_timeout_cfg_s;
  }
  if (!log.blocks.empty())
    r.b_sizeavg = static_cast<double>(log.transactions.size()) /
                  static_cast<double>(log.blocks.size());

  r.edsig_peer = endorser_significance(log);
  r.edsig_org = endorser_significance_by_org(log);
  auto iv = invoker_significance(log);
  r.ivsig_client = std::move(iv.by_client);
  r.ivsig_org = std::move(iv.by_org);
  r.keys = key_stats(log, thresholds);

  // Activity subsequence positions for corPA distances.
  std::unordered_map<std::uint64_t, std::uint64_t> seq_pos;
  {
    std::unordered_map<std::string, std::uint64_t> next_pos;
    for (const auto& tx : log.transactions)
      seq_pos[tx.commit_order] = next_pos[tx.activity_name]++;
  }

  for_each_correlated_pair(log, [&](const TransactionRecord& x, const TransactionRecord& y) {
    ++r.cordv_pair_count;
    if (r.cordv_pairs.size() < kMaxStoredPairs) {
      r.cordv_pairs.push_back({x.commit_order, y.commit_order});
      r.corp.push_back(y.commit_order - x.commit_order);
    } else {
      r.pairs_truncated = true;
    }
    if (x.activity_name == y.activity_name) {
      ++r.corpa_pair_count[x.activity_name];
      ++r.corpa[x.activity_name][seq_pos[y.commit_order] - seq_pos[x.commit_order]];
    }
    if (is_failure(y.status)) {
      if (x.block_number == y.block_number)
        ++r.locality.intra_block;
      else
        ++r.locality.inter_block;
    }
  });
  return r;
}

std::string metrics_to_json(const MetricsReport& r) {
  using nlohmann::json;
  json j;
  j["schema"] = "ledgerlens-metrics v1";
  j["n_transactions"] = r.n_transactions;
  j["duration_s"] = r.duration_s;
  j["interval_s"] = r.ins_s;
  j["tr_tps"] = r.tr;
  j["tfr_tps"] = r.tfr;
  j["total_failed"] = r.total_failed;
  j["failure_counts"] = r.failure_counts;
  j["failure_rates_tps"] = r.failure_rates;
  j["trd_counts"] = r.trd.counts;
  j["trd_tps"] = r.trd.rates;
  j["frd_counts"] = r.frd.counts;
  j["frd_tps"] = r.frd.rates;
  if (r.b_count_cfg) j["block_count_cfg"] = *r.b_count_cfg;
  if (r.b_timeout_cfg_s) j["block_timeout_cfg_s"] = *r.b_timeout_cfg_s;
  j["block_size_avg"] = r.b_sizeavg;
  j["edsig_peer"] = r.edsig_peer;
  j["edsig_org"] = r.edsig_org;
  j["ivsig_client"] = r.ivsig_client;
  j["ivsig_org"] = r.ivsig_org;
  j["kfreq"] = r.keys.kfreq;
  j["ksig"] = r.keys.ksig;
  j["hotkeys"] = r.keys.hotkeys;
  j["cordv_pair_count"] = r.cordv_pair_count;
  // The serialized pair sample is bounded; counts above stay exact.
  constexpr std::size_t kMaxJsonPairs = 50000;
  j["cordv_pairs_truncated"] =
      r.pairs_truncated || r.cordv_pairs.size() > kMaxJsonPairs;
  json pairs = json::array();
  for (std::size_t i = 0; i < r.cordv_pairs.size() && i < kMaxJsonPairs; ++i)
    pairs.push_back({r.cordv_pairs[i].earlier, r.cordv_pairs[i].later, r.corp[i]});
  j["cordv_pairs"] = std::move(pairs);
  j["corpa_pair_count"] = r.corpa_pair_count;
  {
    json corpa = json::object();
    for (const auto& [activity, histogram] : r.corpa) {
      json h = json::object();
      for (const auto& [distance, count] : histogram)
        h[std::to_string(distance)] = count;
      corpa[activity] = std::move(h);
    }
    j["corpa_distances"] = std::move(corpa);
  }
  j["conflict_locality"] = {{"intra_block", r.locality.intra_block},
                            {"inter_block", r.locality.inter_block}};
  return j.dump(2) + "\n";
}

}  // namespace ledgerlens
