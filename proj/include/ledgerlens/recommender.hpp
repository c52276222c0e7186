// The nine optimization rules evaluated against a metrics report and the
// log itself, producing recommendations with evidence and suggested actions.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ledgerlens/metrics.hpp"
#include "ledgerlens/miner.hpp"
#include "ledgerlens/model.hpp"

namespace ledgerlens {

// Which committed transactions invalidated a failed one, recovered by
// replaying key versions through the log. A victim is reorderable when every
// invalidator's write-key set is disjoint from its own: separating the two
// activities in time would have avoided the conflict.
struct ConflictAttribution {
  std::uint64_t victim = 0;  // commit order, mvcc/phantom family status
  std::vector<std::uint64_t> invalidators;
  bool reorderable = false;
};

std::vector<ConflictAttribution> attribute_conflicts(const BlockchainLog& log);

struct ReorderAnalysis {
  std::uint64_t total_mvcc_failures = 0;  // mvcc + phantom statuses
  std::uint64_t reorderable_failures = 0;
  // unordered activity pair (sorted) -> reorderable victims involved
  std::map<std::pair<std::string, std::string>, std::uint64_t> pair_victims;
  // victim-side activities that never appear as invalidators of reorderable
  // conflicts; these are the ones a redesign would reschedule
  std::set<std::string> displaced_activities;
  std::vector<std::uint64_t> sample_victims;  // first few, for evidence
};

ReorderAnalysis analyze_reorderability(const BlockchainLog& log);

struct DeltaNearMiss {
  std::string activity;
  std::string key;
  std::int64_t delta = 0;
  auto operator<=>(const DeltaNearMiss&) const = default;
};

// --- the nine detectors -----------------------------------------------------

std::optional<Recommendation> detect_activity_reordering(const BlockchainLog& log,
                                                         const MetricsReport& metrics,
                                                         const Thresholds& thresholds);
std::optional<Recommendation> detect_pruning(const std::vector<AnomalyFinding>& anomalies);
std::optional<Recommendation> detect_rate_control(const MetricsReport& metrics,
                                                  const Thresholds& thresholds);
std::optional<Recommendation> detect_delta_writes(const BlockchainLog& log,
                                                  const MetricsReport& metrics,
                                                  std::vector<DeltaNearMiss>* near_misses);
std::optional<Recommendation> detect_partitioning(const MetricsReport& metrics);
std::optional<Recommendation> detect_data_model_alteration(const MetricsReport& metrics);
std::optional<Recommendation> detect_block_size(const MetricsReport& metrics,
                                                const Thresholds& thresholds);
std::optional<Recommendation> detect_endorser_restructuring(const MetricsReport& metrics,
                                                            const Thresholds& thresholds);
std::optional<Recommendation> detect_client_boost(const MetricsReport& metrics,
                                                  const Thresholds& thresholds);

struct RecommendationSet {
  std::vector<Recommendation> recommendations;
  std::vector<DeltaNearMiss> delta_near_misses;

  std::set<RecKind> kinds() const;
};

// Union of the nine detectors, ordered by (level, kind, first evidence
// commit_order). Pure function of its inputs.
RecommendationSet recommend(const BlockchainLog& log, const MetricsReport& metrics,
                            const Thresholds& thresholds,
                            const std::vector<AnomalyFinding>& anomalies);

// Deterministic human-readable report plus a machine-readable JSON twin.
std::string render_report_markdown(const RecommendationSet& recs, const MetricsReport& metrics);
std::string recommendations_to_json(const RecommendationSet& recs, const Thresholds& thresholds);

}  // namespace ledgerlens
