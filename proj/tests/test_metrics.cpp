#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ledgerlens/metrics.hpp"
#include "ledgerlens/sim.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace ledgerlens;
using namespace ledgerlens::testing;

TEST_CASE("transaction rate is count over elapsed client time") {
  LogBuilder b;
  b.ts_step(111);  // overridden below
  BlockchainLog log;
  {
    LogBuilder builder;
    builder.at(0).ts_step(111);
    for (int i = 0; i < 10; ++i) with_read(builder.add("a"), "k", 0);
    log = builder.build();
    for (int i = 0; i < 10; ++i)
      log.transactions[i].client_timestamp_ms = i * 1000 / 9;  // span exactly 1000 ms
    log.transactions[9].client_timestamp_ms = 1000;
  }
  CHECK(transaction_rate(log) == doctest::Approx(10.0).epsilon(1e-12));

  BlockchainLog tiny;
  CHECK(transaction_rate(tiny) == 0.0);
  tiny.transactions.push_back(log.transactions[0]);
  CHECK(transaction_rate(tiny) == 0.0);
}

TEST_CASE("rate distribution buckets by interval") {
  LogBuilder b;
  b.ts_step(100);
  for (int i = 0; i < 6; ++i) with_read(b.add("a"), "k", 0);
  const auto log = b.build();  // ts 0..500 ms
  const auto series = rate_distribution(log, 1.0);
  REQUIRE(series.counts.size() == 1);
  CHECK(series.counts[0] == 6);
  CHECK(series.rates[0] == doctest::Approx(6.0));
  CHECK_THROWS_AS(rate_distribution(log, 0.0), Error);
}

TEST_CASE("failure distribution counts only non-success statuses") {
  LogBuilder b;
  b.ts_step(10);
  with_read(b.add("a"), "k", 0);
  with_read(b.add("a", TxStatus::kMvccReadConflict), "k", 0);
  with_read(b.add("a", TxStatus::kEndorsementPolicyFailure), "k", 0);
  with_read(b.add("a"), "k", 0);
  const auto log = b.build();
  const auto trd = rate_distribution(log, 2.0);
  const auto frd = failure_distribution(log, 2.0);
  REQUIRE(trd.counts.size() == 1);
  CHECK(trd.counts[0] == 4);
  CHECK(frd.counts[0] == 2);
  CHECK(frd.rates[0] == doctest::Approx(1.0));
}

TEST_CASE("block stats need a configuration record") {
  LogBuilder b;
  b.blocks_of(7);
  for (int i = 0; i < 7; ++i) with_read(b.add("a"), "k", 0);
  BlockchainLog log = b.build();
  CHECK_THROWS_WITH_AS(block_stats(log), doctest::Contains("configuration"), Error);
  log.config = NetworkConfig{100, 1.0, "Or(Org1)"};
  const auto st = block_stats(log);
  CHECK(st.b_count_cfg == 100);
  CHECK(st.b_sizeavg == doctest::Approx(7.0));
}

TEST_CASE("endorser and invoker significance") {
  LogBuilder b;
  auto& t1 = b.add("a");
  t1.endorsers = {"Org1.peer0", "Org2.peer0"};
  auto& t2 = b.add("a");
  t2.endorsers = {"Org1.peer0", "Org2.peer0"};
  with_read(t1, "k", 0);
  with_read(t2, "k", 0);
  const auto log = b.build();
  const auto peers = endorser_significance(log);
  CHECK(peers.at("Org1.peer0") == 2);
  CHECK(peers.at("Org2.peer0") == 2);
  const auto orgs = endorser_significance_by_org(log);
  CHECK(orgs.at("Org1") == 2);
  const auto iv = invoker_significance(log);
  CHECK(iv.by_client.at("Org1.client0") == 2);
  CHECK(iv.by_org.at("Org1") == 2);
}

TEST_CASE("key stats: hotkey thresholding and activity sets") {
  Thresholds t;
  t.hk_min = 2;
  t.hk_frac = 0.5;
  LogBuilder b;
  // 4 failed txs: 3 touch "hot", 1 touches "cold"; activities differ.
  with_read(b.add("p1", TxStatus::kMvccReadConflict), "hot", 0);
  with_read(b.add("p2", TxStatus::kMvccReadConflict), "hot", 1);
  with_write(b.add("p1", TxStatus::kMvccReadConflict), "hot", "x");
  with_read(b.add("p3", TxStatus::kMvccReadConflict), "cold", 0);
  with_read(b.add("p9"), "hot", 2);  // success: counts for ksig only
  const auto log = b.build();
  const auto st = key_stats(log, t);
  CHECK(st.kfreq.at("hot") == 3);
  CHECK(st.kfreq.at("cold") == 1);
  CHECK(st.ksig.at("hot") == 3);  // p1, p2, p9
  REQUIRE(st.hotkeys == std::vector<std::string>{"hot"});  // cutoff max(2, 2)=2
  CHECK(st.hotkey_activities.at("hot") == std::vector<std::string>{"p1", "p2", "p9"});

  BlockchainLog clean;
  const auto empty = key_stats(clean, t);
  CHECK(empty.kfreq.empty());
  CHECK(empty.hotkeys.empty());
}

TEST_CASE("data value correlation emits exactly the defined pairs") {
  LogBuilder b;
  auto& x = b.add("writer");
  with_write(x, "k", "v");
  auto& y = b.add("reader", TxStatus::kMvccReadConflict);
  with_read(y, "k", 0);
  auto& z = b.add("other");
  with_read(z, "unrelated", 0);
  auto& w = b.add("reader2");
  with_read(w, "k", 1);  // success + success with x -> no pair
  const auto log = b.build();
  const auto dv = data_value_correlation(log);
  REQUIRE(dv.pair_count == 2);  // (x,y) and (y,w) share k with y failed
  CHECK(dv.pairs[0] == CorrelatedPair{0, 1});
  CHECK(dv.pairs[1] == CorrelatedPair{1, 3});
}

TEST_CASE("conflict locality splits by block membership") {
  LogBuilder b;
  b.blocks_of(2);
  auto& x = b.add("w");
  with_write(x, "k", "v");
  auto& y = b.add("r", TxStatus::kMvccReadConflict);
  with_read(y, "k", 0);
  auto& z = b.add("r2", TxStatus::kMvccReadConflict);
  with_read(z, "k", 0);
  const auto log = b.build();  // blocks: {x,y}, {z}
  const auto loc = classify_conflict_locality(log);
  CHECK(loc.intra_block == 1);   // (x,y) same block
  CHECK(loc.inter_block == 2);   // (x,z) and (y,z)
}

TEST_CASE("proximity correlation distances, including activity subsequences") {
  LogBuilder b;
  auto& a0 = b.add("act");  // subsequence pos 0
  with_write(a0, "k", "v");
  auto& other = b.add("noise");
  with_read(other, "n", 0);
  auto& a1 = b.add("act", TxStatus::kMvccReadConflict);  // subsequence pos 1
  with_read(a1, "k", 0);
  const auto log = b.build();
  Thresholds t;
  const auto m = compute_metrics(log, t);
  REQUIRE(m.cordv_pair_count == 1);
  CHECK(m.corp[0] == 2);  // commit orders 0 and 2
  REQUIRE(m.corpa.count("act"));
  const std::map<std::uint64_t, std::uint64_t> want{{1, 1}};
  CHECK(m.corpa.at("act") == want);  // adjacent in subsequence
}

TEST_CASE("interval count identity: sum(Trd_i * ins) == |TX|") {
  SimConfig cfg;
  cfg.seed = 3;
  cfg.n_transactions = 1500;
  cfg.send_rate = 120;
  const auto log = run(cfg).log;
  Thresholds t;
  const auto m = compute_metrics(log, t);
  std::uint64_t total = 0, failed = 0;
  for (auto c : m.trd.counts) total += c;
  for (auto c : m.frd.counts) failed += c;
  CHECK(total == log.transactions.size());
  CHECK(failed == m.total_failed);
  for (std::size_t i = 0; i < m.frd.counts.size(); ++i)
    CHECK(m.frd.counts[i] <= m.trd.counts[i]);
  std::uint64_t by_type = 0;
  for (const auto& [name, count] : m.failure_counts) by_type += count;
  CHECK(by_type == m.total_failed);
}

TEST_CASE("metrics equal the brute-force oracle on random simulated logs") {
  Thresholds t;
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.n_transactions = 800;
    cfg.send_rate = 150 + 50.0 * static_cast<double>(seed % 3);
    cfg.workload_type = seed % 2 ? WorkloadType::kUpdateHeavy : WorkloadType::kUniform;
    const auto log = run(cfg).log;
    const auto m = compute_metrics(log, t);
    const auto oracle = oracle_metrics(log, t);

    CHECK(m.tr == doctest::Approx(oracle.tr).epsilon(1e-12));
    CHECK(m.trd.counts == oracle.trd_counts);
    CHECK(m.frd.counts == oracle.frd_counts);
    CHECK(m.total_failed == oracle.total_failed);
    CHECK(m.failure_counts == oracle.failure_counts);
    CHECK(m.b_sizeavg == doctest::Approx(oracle.b_sizeavg).epsilon(1e-12));
    CHECK(m.edsig_peer == oracle.edsig_peer);
    CHECK(m.edsig_org == oracle.edsig_org);
    CHECK(m.ivsig_client == oracle.ivsig_client);
    CHECK(m.ivsig_org == oracle.ivsig_org);
    CHECK(m.keys.kfreq == oracle.kfreq);
    CHECK(m.keys.ksig == oracle.ksig);
    CHECK(m.keys.hotkeys == oracle.hotkeys);
    CHECK(m.cordv_pair_count == oracle.cordv_pairs.size());
    CHECK(m.cordv_pairs == oracle.cordv_pairs);
    CHECK(m.corp == oracle.corp);
    CHECK(m.corpa == oracle.corpa);
    CHECK(m.locality == oracle.locality);
  }
}

TEST_CASE("steady-state block size approximates min(B_count, Tr*B_timeout)") {
  SimConfig cfg;
  cfg.seed = 5;
  cfg.n_transactions = 4000;
  cfg.send_rate = 150;  // timeout-cut regime: expect ~150 tx blocks
  const auto log = run(cfg).log;
  Thresholds t;
  const auto m = compute_metrics(log, t);
  const double expected = std::min(static_cast<double>(cfg.block_count),
                                   m.tr * cfg.block_timeout_s);
  CHECK(std::abs(m.b_sizeavg - expected) <= 0.10 * expected);
}

TEST_CASE("block packing follows the configured cut: rate 500/count 100 and rate 100/count 500") {
  Thresholds t;
  {
    SimConfig cfg;
    cfg.seed = 8;
    cfg.n_transactions = 5000;
    cfg.send_rate = 500;
    cfg.block_count = 100;
    cfg.block_timeout_s = 1.0;
    cfg.validate_latency_ms = 0.1;  // keep the validator ahead of the 5 blocks/s
    cfg.block_overhead_ms = 50.0;
    const auto m = compute_metrics(run(cfg).log, t);
    CHECK(m.tr == doctest::Approx(500.0).epsilon(0.03));
    CHECK(m.b_sizeavg == doctest::Approx(100.0).epsilon(0.05));
  }
  {
    SimConfig cfg;
    cfg.seed = 8;
    cfg.n_transactions = 4000;
    cfg.send_rate = 100;
    cfg.block_count = 500;
    cfg.block_timeout_s = 2.0;  // blocks form only every two seconds
    const auto m = compute_metrics(run(cfg).log, t);
    CHECK(m.tr == doctest::Approx(100.0).epsilon(0.03));
    CHECK(m.b_sizeavg == doctest::Approx(200.0).epsilon(0.06));
  }
}

TEST_CASE("big blocks swallow a conflict burst; small blocks split it") {
  SimConfig cfg;
  cfg.seed = 9;
  cfg.n_transactions = 950;
  cfg.send_rate = 1000;
  cfg.block_count = 1000;  // whole burst fits into one block
  cfg.block_timeout_s = 5.0;
  cfg.key_space_size = 50;  // bursty contention
  const auto big = run(cfg).log;
  const auto loc_big = classify_conflict_locality(big);
  CHECK(loc_big.intra_block > 0);
  CHECK(loc_big.inter_block == 0);

  cfg.block_count = 50;
  const auto small = run(cfg).log;
  const auto loc_small = classify_conflict_locality(small);
  CHECK(loc_small.inter_block > loc_small.intra_block);

  // Oracle: per-pair block comparison.
  ConflictLocality manual;
  for_each_correlated_pair(small, [&](const TransactionRecord& x, const TransactionRecord& y) {
    if (!is_failure(y.status)) return;
    if (x.block_number == y.block_number) ++manual.intra_block;
    else ++manual.inter_block;
  });
  CHECK(manual.intra_block == loc_small.intra_block);
  CHECK(manual.inter_block == loc_small.inter_block);
}
