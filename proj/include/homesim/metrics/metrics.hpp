#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "homesim/core/catalog.hpp"
#include "homesim/core/threat_spec.hpp"
#include "homesim/core/types.hpp"

namespace homesim::metrics {

// ---------------------------------------------------------------------------
// Ranked retrieval

using Ranking = std::vector<std::string>;
using RelevantSet = std::set<std::string>;

/// Relevant ids per query id.
struct RelevanceJudgments {
  std::map<std::string, RelevantSet> queries;
};

/// Relevant hits in the top k, divided by k. Throws ValidationError for k == 0
/// or an empty judgment set.
double precision_at_k(const Ranking& ranking, const RelevantSet& relevant, std::size_t k);
double recall_at_k(const Ranking& ranking, const RelevantSet& relevant, std::size_t k);
/// Binary gains, log2(rank + 1) discount, ideal ranking puts min(|R|, k) hits first.
double ndcg_at_k(const Ranking& ranking, const RelevantSet& relevant, std::size_t k);
double reciprocal_rank(const Ranking& ranking, const RelevantSet& relevant);
/// Sum of precision at each relevant rank, divided by |R|.
double average_precision(const Ranking& ranking, const RelevantSet& relevant);

double mrr(std::span<const Ranking> rankings, std::span<const RelevantSet> relevant);
double mean_average_precision(std::span<const Ranking> rankings,
                              std::span<const RelevantSet> relevant);

// ---------------------------------------------------------------------------
// Threat fidelity

struct AbcResult {
  int matched = 0;
  int total = 0;
  double coverage = 0.0;
  bool pass = false;
  std::vector<std::string> matched_ids;
};

bool indicator_fires(const IndicatorPredicate& predicate, std::span<const SimulationEvent> events);

/// Coverage of expected indicators; passes at >= 60%.
AbcResult abc(std::span<const SimulationEvent> events, std::span<const IndicatorSpec> indicators);

/// Looks the indicators up in the registry; throws ValidationError for an
/// unknown threat type or one without indicators.
AbcResult abc(std::span<const SimulationEvent> events, const std::string& threat_type,
              const ThreatRegistry& registry);

struct AlfResult {
  int phases_covered = 0;
  double coverage = 0.0;
  bool ordering_valid = true;
  bool pass = false;
};

/// Phases in emission order. Ordering is valid when first occurrences follow
/// the canonical order; passes at >= 50% coverage with valid ordering.
AlfResult alf(std::span<const AttackPhase> sequence);
/// Uses the phase stamp of each event, in log order; unstamped events are skipped.
AlfResult alf(std::span<const SimulationEvent> events);

// ---------------------------------------------------------------------------
// Message similarity against a reference schema

struct FieldSchema {
  std::string name;
  ValueType type = ValueType::kReal;
  std::optional<std::pair<double, double>> range;
  std::vector<std::string> tags;
};

struct ReferenceSchema {
  std::map<std::string, std::vector<FieldSchema>> devices;  // device type -> fields

  static ReferenceSchema from_json(const nlohmann::json& j);
};

struct MsimScores {
  double field_coverage = 0.0;
  double type_compat = 0.0;
  double range_overlap = 0.0;
  double semantic_sim = 0.0;
  double combined = 0.0;
};

/// Equal-weight mean of the four sub-scores.
MsimScores msim_combine(double field_coverage, double type_compat, double range_overlap,
                        double semantic_sim);

/// Jaccard overlap of two closed intervals; two identical points overlap fully.
double range_jaccard(std::pair<double, double> a, std::pair<double, double> b);

/// Token Jaccard between a field name and a tag set (underscore/space separated).
double tag_similarity(const std::string& name, const std::vector<std::string>& tags);

/// Per device type, compare emitted payload fields against the schema, then
/// average each sub-score over device types. Throws ValidationError when an
/// evaluated type is missing from the schema, unless `skip_unknown`.
MsimScores msim(std::span<const SimulationEvent> events, const ReferenceSchema& schema,
                bool skip_unknown = false);

// ---------------------------------------------------------------------------
// Dataset quality and diversity

struct QualityReport {
  std::size_t scale = 0;
  std::size_t features = 0;
  double balance = 0.0;
  double attack_diversity = 0.0;
  double temporal_uniformity = 0.0;
  double source_diversity = 0.0;
  double taxonomy_depth = 0.0;
};

/// Shannon entropy of the counts divided by log2 of the number of non-zero
/// counts; 0 when fewer than two are non-zero.
double normalized_entropy(std::span<const double> counts);

/// sum_i (2i - n - 1) x_i / (n sum x) over ascending counts; 0 for all-zero input.
double gini(std::span<const double> counts);

/// 1 - chi^2 / (N (B - 1)) over B equal buckets; 1 for a single bucket.
double temporal_uniformity(std::span<const std::size_t> bucket_counts);

/// Throws ValidationError for an empty log. `feature_count` is the column
/// count of the log's tabular projection.
QualityReport dataset_quality(std::span<const SimulationEvent> events, std::size_t feature_count,
                              SimMillis bucket = kMillisPerHour);

struct DiversityProfile {
  std::size_t unique_types = 0;
  std::size_t unique_categories = 0;
  double type_entropy = 0.0;
  double category_entropy = 0.0;
  double gini = 0.0;
};

/// Event-count distribution over device types and categories.
DiversityProfile diversity_profile(std::span<const SimulationEvent> events);

// ---------------------------------------------------------------------------
// Text and tables

/// LCS-based F-measure over lowercase whitespace tokens; 1 for two empty texts.
double rouge_l(const std::string& candidate, const std::string& reference);

struct NormalizedRow {
  std::vector<double> values;
  bool constant = false;
};

/// Per row: min -> 0, max -> 1; constant rows become zeros and are flagged.
/// Throws ValidationError for a row with fewer than two columns.
std::vector<NormalizedRow> min_max_normalize(const std::vector<std::vector<double>>& rows);

}  // namespace homesim::metrics
