#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ledgerlens/recommender.hpp"
#include "support/builders.hpp"

using namespace ledgerlens;
using namespace ledgerlens::testing;

namespace {

// Writer invalidates a write-disjoint victim: the reorderable pattern. Keys
// get a per-call suffix so constructed conflicts stay independent.
void add_reorderable_conflict(LogBuilder& b, int i) {
  const std::string key = "shared" + std::to_string(i);
  auto& writer = b.add("pipelineWrite");
  with_read(writer, key, 0);
  with_write(writer, key, "w1");
  auto& victim = b.add("auditRead", TxStatus::kMvccReadConflict);
  with_read(victim, key, 0);
  with_write(victim, "aux" + std::to_string(i), "a");
}

// Two updates of the same key: the invalidator writes what the victim also
// writes, so reordering cannot help.
void add_self_conflict(LogBuilder& b, int i) {
  const std::string key = "own" + std::to_string(i);
  auto& first = b.add("updateThing");
  with_read(first, key, 0);
  with_write(first, key, "x1");
  auto& second = b.add("updateThing", TxStatus::kMvccReadConflict);
  with_read(second, key, 0);
  with_write(second, key, "x1");
}

MetricsReport metrics_of(const BlockchainLog& log, const Thresholds& t = Thresholds{}) {
  return compute_metrics(log, t);
}

}  // namespace

TEST_CASE("attribute_conflicts recovers the invalidating transaction") {
  LogBuilder b;
  add_reorderable_conflict(b, 0);
  add_self_conflict(b, 0);
  const auto log = b.build();
  const auto attrs = attribute_conflicts(log);
  REQUIRE(attrs.size() == 2);
  CHECK(attrs[0].victim == 1);
  CHECK(attrs[0].invalidators == std::vector<std::uint64_t>{0});
  CHECK(attrs[0].reorderable);
  CHECK(attrs[1].victim == 3);
  CHECK(attrs[1].invalidators == std::vector<std::uint64_t>{2});
  CHECK_FALSE(attrs[1].reorderable);
}

TEST_CASE("attribute_conflicts handles phantom range invalidation") {
  LogBuilder b;
  auto& insert = b.add("insertAsset");
  with_write(insert, "rk5", "fresh");
  auto& scan = b.add("rangeScan", TxStatus::kPhantomReadConflict);
  scan.range_reads.push_back({"rk0", "rk9", {}});  // observed empty, now rk5 live
  const auto log = b.build();
  const auto attrs = attribute_conflicts(log);
  REQUIRE(attrs.size() == 1);
  CHECK(attrs[0].invalidators == std::vector<std::uint64_t>{0});
  CHECK(attrs[0].reorderable);  // scan writes nothing
}

TEST_CASE("reordering fires at 40% attribution and not at 39%") {
  Thresholds t;
  SUBCASE("exactly 40 of 100 -> fire") {
    LogBuilder b;
    for (int i = 0; i < 40; ++i) add_reorderable_conflict(b, i);
    for (int i = 0; i < 60; ++i) add_self_conflict(b, i);
    const auto log = b.build();
    const auto rec = detect_activity_reordering(log, metrics_of(log), t);
    REQUIRE(rec.has_value());
    CHECK(rec->kind == RecKind::kActivityReordering);
    CHECK(rec->level == RecLevel::kUser);
    CHECK(rec->action.at("reorder_after") == "auditRead");
    bool found_pair = false;
    for (const auto& a : rec->evidence.activities)
      if (a == "auditRead<->pipelineWrite") found_pair = true;
    CHECK(found_pair);
  }
  SUBCASE("39 of 100 -> no fire") {
    LogBuilder b;
    for (int i = 0; i < 39; ++i) add_reorderable_conflict(b, i);
    for (int i = 0; i < 61; ++i) add_self_conflict(b, i);
    const auto log = b.build();
    CHECK_FALSE(detect_activity_reordering(log, metrics_of(log), t).has_value());
  }
  SUBCASE("update conflicting only with itself -> no fire") {
    LogBuilder b;
    for (int i = 0; i < 10; ++i) add_self_conflict(b, i);
    const auto log = b.build();
    CHECK_FALSE(detect_activity_reordering(log, metrics_of(log), t).has_value());
  }
  SUBCASE("no failures -> no fire") {
    LogBuilder b;
    with_read(b.add("a"), "k", 0);
    const auto log = b.build();
    CHECK_FALSE(detect_activity_reordering(log, metrics_of(log), t).has_value());
  }
}

TEST_CASE("pruning fires exactly when anomalies exist") {
  CHECK_FALSE(detect_pruning({}).has_value());
  AnomalyFinding f;
  f.activity = "unload";
  f.expected_type = TxType::kUpdate;
  f.anomalous_type = TxType::kRead;
  f.witnesses = {42};
  f.preceding_context = {"queryASN"};
  const auto rec = detect_pruning({f});
  REQUIRE(rec.has_value());
  CHECK(rec->level == RecLevel::kUser);
  CHECK(rec->evidence.commit_orders == std::vector<std::uint64_t>{42});
  CHECK(rec->action.count("guard_unload") == 1);
}

TEST_CASE("rate control boundary arithmetic") {
  Thresholds t;  // Rt1=300, Rt2=0.3
  MetricsReport m;
  m.ins_s = 10.0;
  SUBCASE("Trd=300, Frd=90 fires inclusively") {
    m.trd.counts = {3000};
    m.trd.rates = {300.0};
    m.frd.counts = {900};
    m.frd.rates = {90.0};
    const auto rec = detect_rate_control(m, t);
    REQUIRE(rec.has_value());
    CHECK(rec->evidence.intervals == std::vector<int>{0});
    // No unflagged interval to borrow a cap from: Rt1/3 = 100.
    CHECK(rec->action.at("send_rate") == "100");
  }
  SUBCASE("Trd=299 everywhere never fires") {
    m.trd.rates = {299.0, 299.0};
    m.frd.rates = {299.0, 299.0};
    CHECK_FALSE(detect_rate_control(m, t).has_value());
  }
  SUBCASE("failure fraction below Rt2 does not fire") {
    m.trd.rates = {400.0};
    m.frd.rates = {119.0};  // 0.2975 < 0.3
    CHECK_FALSE(detect_rate_control(m, t).has_value());
  }
  SUBCASE("cap borrows the busiest sustained interval") {
    m.trd.rates = {400.0, 250.0, 320.0};
    m.frd.rates = {200.0, 10.0, 5.0};  // only interval 0 flagged
    const auto rec = detect_rate_control(m, t);
    REQUIRE(rec.has_value());
    CHECK(rec->action.at("send_rate") == "320");
  }
}

namespace {

BlockchainLog delta_log(const std::string& second_value) {
  LogBuilder b;
  auto& winner = b.add("play");
  with_read(winner, "count", 0);
  with_write(winner, "count", "1");
  auto& loser = b.add("play", TxStatus::kMvccReadConflict);
  with_read(loser, "count", 0);
  with_write(loser, "count", "1");
  auto& next = b.add("play");
  with_read(next, "count", 1);
  with_write(next, "count", second_value);
  return b.build();
}

}  // namespace

TEST_CASE("delta writes detect failed unit increments") {
  std::vector<DeltaNearMiss> misses;
  SUBCASE("increment chain fires") {
    const auto log = delta_log("2");
    const auto rec = detect_delta_writes(log, metrics_of(log), &misses);
    REQUIRE(rec.has_value());
    CHECK(rec->level == RecLevel::kData);
    CHECK(rec->evidence.keys == std::vector<std::string>{"count"});
    CHECK(rec->evidence.activities == std::vector<std::string>{"play"});
    CHECK(misses.empty());
  }
  SUBCASE("step of two is only a near miss") {
    const auto log = delta_log("3");
    const auto rec = detect_delta_writes(log, metrics_of(log), &misses);
    CHECK_FALSE(rec.has_value());
    REQUIRE(misses.size() == 1);
    CHECK(misses[0].activity == "play");
    CHECK(misses[0].key == "count");
    CHECK(misses[0].delta == 2);
  }
  SUBCASE("non-numeric values never fire") {
    LogBuilder b;
    auto& x = b.add("grant", TxStatus::kMvccReadConflict);
    with_read(x, "acl", 0);
    with_write(x, "acl", "granted");
    auto& y = b.add("grant");
    with_read(y, "acl", 1);
    with_write(y, "acl", "granted");
    const auto log = b.build();
    CHECK_FALSE(detect_delta_writes(log, metrics_of(log), &misses).has_value());
  }
  SUBCASE("success on the earlier side does not fire") {
    LogBuilder b;
    auto& x = b.add("play");
    with_read(x, "count", 0);
    with_write(x, "count", "1");
    auto& y = b.add("play");
    with_read(y, "count", 1);
    with_write(y, "count", "2");
    const auto log = b.build();
    CHECK_FALSE(detect_delta_writes(log, metrics_of(log), &misses).has_value());
  }
}

TEST_CASE("partitioning needs a hotkey shared by several activities") {
  MetricsReport m;
  SUBCASE("hot key with two activities fires") {
    m.keys.hotkeys = {"musicX"};
    m.keys.ksig["musicX"] = 2;
    m.keys.hotkey_activities["musicX"] = {"play", "viewMetaData"};
    const auto rec = detect_partitioning(m);
    REQUIRE(rec.has_value());
    CHECK(rec->level == RecLevel::kData);
    CHECK(rec->evidence.keys == std::vector<std::string>{"musicX"});
    CHECK(rec->action.at("split_musicX") == "play,viewMetaData");
  }
  SUBCASE("hotkey with a single activity belongs to the data-model rule") {
    m.keys.hotkeys = {"tally"};
    m.keys.ksig["tally"] = 1;
    CHECK_FALSE(detect_partitioning(m).has_value());
  }
  SUBCASE("no hotkeys, no fire") { CHECK_FALSE(detect_partitioning(m).has_value()); }
}

TEST_CASE("data model alteration: solo-activity hotkey or a single hotkey") {
  MetricsReport m;
  SUBCASE("Ksig == 1 fires") {
    m.keys.hotkeys = {"tally"};
    m.keys.ksig["tally"] = 1;
    m.keys.hotkey_activities["tally"] = {"vote"};
    const auto rec = detect_data_model_alteration(m);
    REQUIRE(rec.has_value());
    CHECK(rec->evidence.keys == std::vector<std::string>{"tally"});
    CHECK(rec->evidence.activities == std::vector<std::string>{"vote"});
  }
  SUBCASE("single hotkey with many activities also fires") {
    m.keys.hotkeys = {"emp1"};
    m.keys.ksig["emp1"] = 4;
    m.keys.hotkey_activities["emp1"] = {"a", "b", "c", "d"};
    CHECK(detect_data_model_alteration(m).has_value());
  }
  SUBCASE("two multi-activity hotkeys do not fire") {
    m.keys.hotkeys = {"h1", "h2"};
    m.keys.ksig["h1"] = 2;
    m.keys.ksig["h2"] = 3;
    CHECK_FALSE(detect_data_model_alteration(m).has_value());
  }
  SUBCASE("no hotkeys, no fire") { CHECK_FALSE(detect_data_model_alteration(m).has_value()); }
}

TEST_CASE("block size adaptation uses the relative deviation band") {
  Thresholds t;  // Bt = 0.6
  MetricsReport m;
  m.tr = 300.0;
  SUBCASE("small blocks fire") {
    m.b_sizeavg = 50.0;
    const auto rec = detect_block_size(m, t);
    REQUIRE(rec.has_value());
    CHECK(rec->action.at("block_count") == "300");
    CHECK(rec->action.at("block_timeout_s") == "1");
  }
  SUBCASE("matched blocks do not fire") {
    m.b_sizeavg = 300.0;
    CHECK_FALSE(detect_block_size(m, t).has_value());
  }
  SUBCASE("lower boundary is inclusive") {
    m.b_sizeavg = 300.0 * (1.0 - t.bt);
    CHECK(detect_block_size(m, t).has_value());
    m.b_sizeavg = 300.0 * (1.0 - t.bt) + 0.5;
    CHECK_FALSE(detect_block_size(m, t).has_value());
  }
  SUBCASE("oversized blocks fire too") {
    m.b_sizeavg = 300.0 * (1.0 + t.bt);
    CHECK(detect_block_size(m, t).has_value());
  }
  SUBCASE("no blocks or no rate, no fire") {
    m.b_sizeavg = 0.0;
    CHECK_FALSE(detect_block_size(m, t).has_value());
  }
}

TEST_CASE("endorser restructuring is strict and org-aware") {
  Thresholds t;  // Et = 0.5
  MetricsReport m;
  m.n_transactions = 100;
  SUBCASE("org above the fraction fires with a balanced policy action") {
    m.edsig_peer["Org1.peer0"] = 51;
    m.edsig_org["Org1"] = 51;
    m.edsig_org["Org2"] = 49;
    const auto rec = detect_endorser_restructuring(m, t);
    REQUIRE(rec.has_value());
    CHECK(rec->action.at("policy") == "OutOf(2,Org1,Org2)");
    bool flagged_org = false;
    for (const auto& e : rec->evidence.endorsers)
      if (e == "org:Org1") flagged_org = true;
    CHECK(flagged_org);
  }
  SUBCASE("exactly the threshold does not fire") {
    m.edsig_peer["Org1.peer0"] = 50;
    m.edsig_org["Org1"] = 50;
    m.edsig_org["Org2"] = 50;
    CHECK_FALSE(detect_endorser_restructuring(m, t).has_value());
  }
  SUBCASE("four orgs at a quarter each do not fire") {
    for (int i = 1; i <= 4; ++i) {
      m.edsig_peer["Org" + std::to_string(i) + ".peer0"] = 25;
      m.edsig_org["Org" + std::to_string(i)] = 25;
    }
    CHECK_FALSE(detect_endorser_restructuring(m, t).has_value());
  }
}

TEST_CASE("client boost is strict and aggregates to orgs") {
  Thresholds t;  // It = 0.5
  MetricsReport m;
  m.n_transactions = 100;
  SUBCASE("heavy org fires") {
    m.ivsig_org["Org1"] = 70;
    m.ivsig_org["Org2"] = 30;
    m.ivsig_client["Org1.client0"] = 35;
    m.ivsig_client["Org1.client1"] = 35;
    m.ivsig_client["Org2.client0"] = 30;
    const auto rec = detect_client_boost(m, t);
    REQUIRE(rec.has_value());
    CHECK(rec->action.at("scale_clients_of") == "Org1");
  }
  SUBCASE("exactly It x TX does not fire") {
    m.ivsig_org["Org1"] = 50;
    m.ivsig_org["Org2"] = 50;
    CHECK_FALSE(detect_client_boost(m, t).has_value());
  }
}

TEST_CASE("recommend is deterministic, ordered by level then kind") {
  LogBuilder b;
  b.config(300, 1.0, "Or(Org1)");
  for (int i = 0; i < 40; ++i) add_reorderable_conflict(b, i);
  const auto log = b.build();
  Thresholds t;
  const auto m = metrics_of(log, t);
  AnomalyFinding f;
  f.activity = "x";
  f.expected_type = TxType::kUpdate;
  f.anomalous_type = TxType::kRead;
  f.witnesses = {1};
  f.preceding_context = {""};
  const auto recs1 = recommend(log, m, t, {f});
  const auto recs2 = recommend(log, m, t, {f});
  CHECK(recs1.recommendations == recs2.recommendations);
  for (std::size_t i = 1; i < recs1.recommendations.size(); ++i) {
    const auto& prev = recs1.recommendations[i - 1];
    const auto& cur = recs1.recommendations[i];
    CHECK((prev.level < cur.level ||
           (prev.level == cur.level && prev.kind <= cur.kind)));
  }
  CHECK(recommendations_to_json(recs1, t) == recommendations_to_json(recs2, t));
  CHECK(render_report_markdown(recs1, m) == render_report_markdown(recs2, m));
}

TEST_CASE("empty log produces no recommendations and a stub report") {
  BlockchainLog log;
  Thresholds t;
  const auto m = compute_metrics(log, t);
  const auto recs = recommend(log, m, t, {});
  CHECK(recs.recommendations.empty());
  const std::string report = render_report_markdown(recs, m);
  CHECK(report.find("No recommendations") != std::string::npos);
}

TEST_CASE("raising Et, It, Rt1 never adds the corresponding recommendation") {
  LogBuilder b;
  b.config(300, 1.0, "Or(Org1,Org2)");
  for (int i = 0; i < 30; ++i) {
    auto& tx = b.add("a", i % 3 == 0 ? TxStatus::kMvccReadConflict : TxStatus::kSuccess);
    tx.endorsers = {i % 4 == 0 ? "Org2.peer0" : "Org1.peer0"};
    tx.invoker_org = i % 5 == 0 ? "Org2" : "Org1";
    tx.invoker_client = tx.invoker_org + ".client0";
    with_read(tx, "k" + std::to_string(i % 7), 0);
  }
  const auto log = b.build();
  Thresholds lo;
  lo.et = 0.3;
  lo.it = 0.3;
  lo.rt1 = 1.0;
  lo.rt2 = 0.05;
  Thresholds hi = lo;
  hi.et = 0.9;
  hi.it = 0.9;
  hi.rt1 = 1e6;
  const auto kinds_lo = recommend(log, compute_metrics(log, lo), lo, {}).kinds();
  const auto kinds_hi = recommend(log, compute_metrics(log, hi), hi, {}).kinds();
  for (RecKind k : {RecKind::kEndorserRestructuring, RecKind::kClientResourceBoost,
                    RecKind::kTransactionRateControl})
    if (kinds_hi.count(k)) CHECK(kinds_lo.count(k));
}
