#include "homesim/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"

namespace homesim::metrics {

namespace {

void require_judgments(const RelevantSet& relevant) {
  if (relevant.empty()) throw ValidationError("no relevance judgments for query");
}

void require_k(std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
}

std::size_t hits_in_top(const Ranking& ranking, const RelevantSet& relevant, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) hits += relevant.count(ranking[i]);
  return hits;
}

std::optional<double> numeric(const PayloadValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

bool payload_equal(const PayloadValue& a, const PayloadValue& b) {
  const auto na = numeric(a);
  const auto nb = numeric(b);
  if (na && nb) return *na == *nb;
  return a == b;
}

std::string value_key(const PayloadValue& v) {
  if (auto n = numeric(v)) {
    std::ostringstream ss;
    ss.precision(17);
    ss << *n;
    return "n:" + ss.str();
  }
  return "v:" + nlohmann::json(v).dump();
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '_' || c == ' ' || c == '-' || c == '.') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool types_compatible(ValueType expected, ValueType observed) {
  if (expected == observed) return true;
  // Integers are valid readings of a real-valued field.
  return expected == ValueType::kReal && observed == ValueType::kInteger;
}

template <typename Key>
std::vector<double> counts_of(const std::map<Key, std::size_t>& m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (const auto& [k, v] : m) out.push_back(static_cast<double>(v));
  return out;
}

}  // namespace

double precision_at_k(const Ranking& ranking, const RelevantSet& relevant, std::size_t k) {
  require_k(k);
  require_judgments(relevant);
  return static_cast<double>(hits_in_top(ranking, relevant, k)) / static_cast<double>(k);
}

double recall_at_k(const Ranking& ranking, const RelevantSet& relevant, std::size_t k) {
  require_k(k);
  require_judgments(relevant);
  return static_cast<double>(hits_in_top(ranking, relevant, k)) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const Ranking& ranking, const RelevantSet& relevant, std::size_t k) {
  require_k(k);
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i)
    if (relevant.count(ranking[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(k, relevant.size()); ++i)
    ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

double reciprocal_rank(const Ranking& ranking, const RelevantSet& relevant) {
  for (std::size_t i = 0; i < ranking.size(); ++i)
    if (relevant.count(ranking[i])) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

double average_precision(const Ranking& ranking, const RelevantSet& relevant) {
  if (relevant.empty()) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (!relevant.count(ranking[i])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(relevant.size());
}

double mrr(std::span<const Ranking> rankings, std::span<const RelevantSet> relevant) {
  if (rankings.empty() || rankings.size() != relevant.size())
    throw ValidationError("mrr needs one judgment set per ranking and at least one query");
  double sum = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) sum += reciprocal_rank(rankings[q], relevant[q]);
  return sum / static_cast<double>(rankings.size());
}

double mean_average_precision(std::span<const Ranking> rankings,
                              std::span<const RelevantSet> relevant) {
  if (rankings.empty() || rankings.size() != relevant.size())
    throw ValidationError("map needs one judgment set per ranking and at least one query");
  double sum = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) sum += average_precision(rankings[q], relevant[q]);
  return sum / static_cast<double>(rankings.size());
}

bool indicator_fires(const IndicatorPredicate& p, std::span<const SimulationEvent> events) {
  using K = IndicatorPredicate::Kind;
  switch (p.kind) {
    case K::kFieldPresent:
      return std::any_of(events.begin(), events.end(),
                         [&](const SimulationEvent& e) { return e.payload.count(p.field) > 0; });
    case K::kCountEquals: {
      int n = 0;
      for (const auto& e : events) {
        auto it = e.payload.find(p.field);
        if (it != e.payload.end() && payload_equal(it->second, p.value)) ++n;
      }
      return n >= p.at_least;
    }
    case K::kDistinctValues: {
      std::set<std::string> seen;
      for (const auto& e : events)
        if (auto it = e.payload.find(p.field); it != e.payload.end()) seen.insert(value_key(it->second));
      return static_cast<int>(seen.size()) >= p.at_least;
    }
    case K::kNumericAtLeast:
      return std::any_of(events.begin(), events.end(), [&](const SimulationEvent& e) {
        auto it = e.payload.find(p.field);
        if (it == e.payload.end()) return false;
        auto v = numeric(it->second);
        return v && *v >= p.threshold;
      });
    case K::kSumAtLeast: {
      double sum = 0.0;
      for (const auto& e : events)
        if (auto it = e.payload.find(p.field); it != e.payload.end())
          if (auto v = numeric(it->second)) sum += *v;
      return sum >= p.threshold;
    }
    case K::kRateSpike: {
      std::map<SimMillis, int> per_minute;
      for (const auto& e : events)
        if (++per_minute[e.timestamp / kMillisPerMinute] >= p.at_least) return true;
      return false;
    }
  }
  return false;
}

AbcResult abc(std::span<const SimulationEvent> events, std::span<const IndicatorSpec> indicators) {
  if (indicators.empty()) throw ValidationError("no indicators to evaluate");
  AbcResult r;
  r.total = static_cast<int>(indicators.size());
  for (const auto& ind : indicators) {
    if (indicator_fires(ind.predicate, events)) {
      ++r.matched;
      r.matched_ids.push_back(ind.id);
    }
  }
  r.coverage = static_cast<double>(r.matched) / static_cast<double>(r.total);
  // Integer form of coverage >= 0.60, exact at the 3/5 and 2/3 boundaries.
  r.pass = r.matched * 10 >= r.total * 6;
  return r;
}

AbcResult abc(std::span<const SimulationEvent> events, const std::string& threat_type,
              const ThreatRegistry& registry) {
  const auto& spec = registry.find(threat_type);
  if (spec.indicators.empty())
    throw ValidationError("threat '" + threat_type + "' declares no indicators");
  return abc(events, spec.indicators);
}

AlfResult alf(std::span<const AttackPhase> sequence) {
  AlfResult r;
  std::vector<int> first_seen;  // canonical indices in order of first appearance
  std::set<int> seen;
  for (auto p : sequence) {
    if (seen.insert(phase_index(p)).second) first_seen.push_back(phase_index(p));
  }
  r.phases_covered = static_cast<int>(seen.size());
  r.coverage = static_cast<double>(r.phases_covered) / static_cast<double>(kPhaseCount);
  r.ordering_valid = std::is_sorted(first_seen.begin(), first_seen.end());
  r.pass = r.ordering_valid && r.phases_covered * 2 >= static_cast<int>(kPhaseCount);
  return r;
}

AlfResult alf(std::span<const SimulationEvent> events) {
  std::vector<AttackPhase> seq;
  for (const auto& e : events)
    if (e.phase) seq.push_back(*e.phase);
  return alf(seq);
}

ReferenceSchema ReferenceSchema::from_json(const nlohmann::json& j) {
  ReferenceSchema s;
  for (const auto& [type, spec] : j.at("devices").items()) {
    auto& fields = s.devices[type];
    std::set<std::string> names;
    for (const auto& f : spec.at("fields")) {
      FieldSchema fs;
      f.at("name").get_to(fs.name);
      if (!names.insert(fs.name).second)
        throw ValidationError("reference schema repeats field '" + fs.name + "' for " + type);
      fs.type = parse_value_type(f.at("type").get<std::string>());
      if (f.contains("range") && !f["range"].is_null())
        fs.range = std::make_pair(f["range"].at(0).get<double>(), f["range"].at(1).get<double>());
      if (f.contains("tags")) f["tags"].get_to(fs.tags);
      fields.push_back(std::move(fs));
    }
  }
  return s;
}

MsimScores msim_combine(double field_coverage, double type_compat, double range_overlap,
                        double semantic_sim) {
  return {field_coverage, type_compat, range_overlap, semantic_sim,
          (field_coverage + type_compat + range_overlap + semantic_sim) / 4.0};
}

double range_jaccard(std::pair<double, double> a, std::pair<double, double> b) {
  const double inter = std::min(a.second, b.second) - std::max(a.first, b.first);
  const double uni = std::max(a.second, b.second) - std::min(a.first, b.first);
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return std::max(0.0, inter) / uni;
}

double tag_similarity(const std::string& name, const std::vector<std::string>& tags) {
  const auto a = split_tokens(name);
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb;
  for (const auto& t : tags)
    for (auto& tok : split_tokens(t)) sb.insert(std::move(tok));
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

MsimScores msim(std::span<const SimulationEvent> events, const ReferenceSchema& schema,
                bool skip_unknown) {
  struct Observed {
    std::set<ValueType> types;
    double lo = 0.0;
    double hi = 0.0;
    bool numeric_seen = false;
  };
  std::map<std::string, std::map<std::string, Observed>> by_type;
  for (const auto& e : events) {
    if (e.label.verdict != Verdict::kBenign) continue;
    auto& fields = by_type[e.device_type];
    for (const auto& [name, value] : e.payload) {
      auto& o = fields[name];
      o.types.insert(value_type_of(value));
      if (auto v = numeric(value)) {
        if (!o.numeric_seen) o.lo = o.hi = *v;
        o.lo = std::min(o.lo, *v);
        o.hi = std::max(o.hi, *v);
        o.numeric_seen = true;
      }
    }
  }
  if (by_type.empty()) throw ValidationError("no benign events to compare");

  double fc = 0.0, tc = 0.0, ro = 0.0, ss = 0.0;
  std::size_t evaluated = 0;
  for (const auto& [type, observed] : by_type) {
    auto it = schema.devices.find(type);
    if (it == schema.devices.end()) {
      if (skip_unknown) continue;
      throw ValidationError("device type '" + type + "' is absent from the reference schema");
    }
    const auto& expected = it->second;
    if (expected.empty()) continue;
    std::size_t present = 0, compatible = 0, ranged = 0;
    double overlap = 0.0, semantic = 0.0;
    for (const auto& f : expected) {
      // Semantic match: best tag similarity of any emitted field name.
      std::vector<std::string> tags = f.tags;
      tags.push_back(f.name);
      double best = 0.0;
      for (const auto& [name, o] : observed) best = std::max(best, tag_similarity(name, tags));
      semantic += best;

      auto o = observed.find(f.name);
      if (o == observed.end()) continue;
      ++present;
      if (std::all_of(o->second.types.begin(), o->second.types.end(),
                      [&](ValueType t) { return types_compatible(f.type, t); }))
        ++compatible;
      if (f.range && o->second.numeric_seen) {
        ++ranged;
        overlap += range_jaccard({o->second.lo, o->second.hi}, *f.range);
      }
    }
    ++evaluated;
    fc += static_cast<double>(present) / static_cast<double>(expected.size());
    tc += present ? static_cast<double>(compatible) / static_cast<double>(present) : 0.0;
    ro += ranged ? overlap / static_cast<double>(ranged) : 0.0;
    ss += semantic / static_cast<double>(expected.size());
  }
  if (evaluated == 0) throw ValidationError("no evaluated device type is covered by the schema");
  const auto n = static_cast<double>(evaluated);
  return msim_combine(fc / n, tc / n, ro / n, ss / n);
}

double normalized_entropy(std::span<const double> counts) {
  double total = 0.0;
  std::size_t nonzero = 0;
  for (double c : counts) {
    if (c > 0.0) {
      total += c;
      ++nonzero;
    }
  }
  if (nonzero < 2) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h / std::log2(static_cast<double>(nonzero));
}

double gini(std::span<const double> counts) {
  std::vector<double> x(counts.begin(), counts.end());
  std::sort(x.begin(), x.end());
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  if (x.empty() || total <= 0.0) return 0.0;
  const auto n = static_cast<double>(x.size());
  double num = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) num += (2.0 * static_cast<double>(i + 1) - n - 1.0) * x[i];
  return num / (n * total);
}

double temporal_uniformity(std::span<const std::size_t> bucket_counts) {
  const std::size_t b = bucket_counts.size();
  const double n = std::accumulate(bucket_counts.begin(), bucket_counts.end(), 0.0);
  if (b < 2 || n <= 0.0) return 1.0;
  const double expected = n / static_cast<double>(b);
  double chi2 = 0.0;
  for (auto c : bucket_counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return std::clamp(1.0 - chi2 / (n * static_cast<double>(b - 1)), 0.0, 1.0);
}

QualityReport dataset_quality(std::span<const SimulationEvent> events, std::size_t feature_count,
                              SimMillis bucket) {
  if (events.empty()) throw ValidationError("empty event log");
  if (bucket <= 0) throw ValidationError("bucket width must be positive");
  QualityReport q;
  q.scale = events.size();
  q.features = feature_count;

  std::size_t attacks = 0;
  std::map<std::string, std::size_t> threat_counts, device_counts;
  SimMillis t_max = 0;
  std::size_t depth = 0;
  for (const auto& e : events) {
    if (e.label.verdict == Verdict::kAttack) {
      ++attacks;
      ++threat_counts[e.label.threat_type.value_or("")];
    }
    ++device_counts[e.device_id];
    t_max = std::max(t_max, e.timestamp);
    depth = std::max(depth, e.label.taxonomy_path.size());
  }
  const double pa = static_cast<double>(attacks) / static_cast<double>(events.size());
  q.balance = 1.0 - std::abs((1.0 - pa) - pa);
  q.attack_diversity = normalized_entropy(counts_of(threat_counts));
  q.source_diversity = normalized_entropy(counts_of(device_counts));
  q.taxonomy_depth = static_cast<double>(depth) / static_cast<double>(kMaxTaxonomyLevel);

  std::vector<std::size_t> buckets(static_cast<std::size_t>(t_max / bucket) + 1, 0);
  for (const auto& e : events) ++buckets[static_cast<std::size_t>(std::max<SimMillis>(0, e.timestamp) / bucket)];
  q.temporal_uniformity = temporal_uniformity(buckets);
  return q;
}

DiversityProfile diversity_profile(std::span<const SimulationEvent> events) {
  if (events.empty()) throw ValidationError("empty event log");
  std::map<std::string, std::size_t> types, categories;
  for (const auto& e : events) {
    ++types[e.device_type];
    ++categories[e.category];
  }
  DiversityProfile d;
  d.unique_types = types.size();
  d.unique_categories = categories.size();
  const auto tc = counts_of(types);
  d.type_entropy = normalized_entropy(tc);
  d.category_entropy = normalized_entropy(counts_of(categories));
  d.gini = gini(tc);
  return d;
}

double rouge_l(const std::string& candidate, const std::string& reference) {
  auto tokens = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) {
      std::transform(w.begin(), w.end(), w.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      out.push_back(std::move(w));
    }
    return out;
  };
  const auto c = tokens(candidate);
  const auto r = tokens(reference);
  if (c.empty() && r.empty()) return 1.0;
  if (c.empty() || r.empty()) return 0.0;
  std::vector<std::size_t> prev(r.size() + 1, 0), cur(r.size() + 1, 0);
  for (std::size_t i = 1; i <= c.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j)
      cur[j] = c[i - 1] == r[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[r.size()]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(c.size());
  const double rec = lcs / static_cast<double>(r.size());
  return 2.0 * p * rec / (p + rec);
}

std::vector<NormalizedRow> min_max_normalize(const std::vector<std::vector<double>>& rows) {
  std::vector<NormalizedRow> out;
  for (const auto& row : rows) {
    if (row.size() < 2) throw ValidationError("min-max normalization needs at least two columns");
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    NormalizedRow n;
    n.constant = *hi == *lo;
    for (double v : row) n.values.push_back(n.constant ? 0.0 : (v - *lo) / (*hi - *lo));
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace homesim::metrics
