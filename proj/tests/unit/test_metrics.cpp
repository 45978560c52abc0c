#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "homesim/core/error.hpp"
#include "homesim/metrics/metrics.hpp"
#include "homesim/runtime/rng.hpp"
#include "test_support.hpp"

using namespace homesim;
using namespace homesim::metrics;

namespace {

// Brute-force oracle over a five-document universe. Ideal DCG is the maximum
// over every ranking of length k rather than a sorted-gain shortcut.
const std::vector<std::string> kDocs{"d1", "d2", "d3", "d4", "d5"};

void all_rankings(std::vector<std::string>& cur, std::vector<bool>& used,
                  std::vector<Ranking>& out) {
  out.push_back(cur);
  for (std::size_t i = 0; i < kDocs.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    cur.push_back(kDocs[i]);
    all_rankings(cur, used, out);
    cur.pop_back();
    used[i] = false;
  }
}

const std::vector<Ranking>& rankings() {
  static const std::vector<Ranking> r = [] {
    std::vector<Ranking> out;
    std::vector<std::string> cur;
    std::vector<bool> used(kDocs.size(), false);
    all_rankings(cur, used, out);
    return out;
  }();
  return r;
}

double oracle_dcg(const Ranking& r, const RelevantSet& rel, std::size_t k) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size() && i < k; ++i)
    if (rel.count(r[i])) s += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return s;
}

double oracle_ndcg(const Ranking& r, const RelevantSet& rel, std::size_t k) {
  double ideal = 0.0;
  for (const auto& cand : rankings()) ideal = std::max(ideal, oracle_dcg(cand, rel, k));
  return ideal > 0.0 ? oracle_dcg(r, rel, k) / ideal : 0.0;
}

double oracle_ap(const Ranking& r, const RelevantSet& rel) {
  double s = 0.0;
  for (const auto& d : rel) {
    auto it = std::find(r.begin(), r.end(), d);
    if (it == r.end()) continue;
    const auto rank = static_cast<std::size_t>(it - r.begin()) + 1;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rank; ++i) hits += rel.count(r[i]);
    s += static_cast<double>(hits) / static_cast<double>(rank);
  }
  return s / static_cast<double>(rel.size());
}

double oracle_rr(const Ranking& r, const RelevantSet& rel) {
  for (std::size_t i = 0; i < r.size(); ++i)
    if (rel.count(r[i])) return 1.0 / static_cast<double>(i + 1);
  return 0.0;
}

std::vector<RelevantSet> all_relevant_sets() {
  std::vector<RelevantSet> out;
  for (unsigned mask = 1; mask < (1u << kDocs.size()); ++mask) {
    RelevantSet s;
    for (std::size_t i = 0; i < kDocs.size(); ++i)
      if (mask & (1u << i)) s.insert(kDocs[i]);
    out.push_back(s);
  }
  return out;
}

SimulationEvent ev(SimMillis t, Payload payload = {}) {
  SimulationEvent e;
  e.timestamp = t;
  e.payload = std::move(payload);
  return e;
}

}  // namespace

TEST_CASE("ir: hand-computed examples") {
  const Ranking r{"a", "x", "b"};
  const RelevantSet rel{"a", "b"};
  CHECK(precision_at_k(r, rel, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(recall_at_k(r, rel, 3) == 1.0);
  CHECK(std::abs(ndcg_at_k(r, rel, 3) - 1.5 / (1.0 + 1.0 / std::log2(3.0))) < 1e-9);
  CHECK(std::abs(ndcg_at_k(r, rel, 3) - 0.9197) < 5e-5);
  CHECK(std::abs(average_precision(r, rel) - 0.8333333333333334) < 1e-9);

  const RelevantSet five{"a", "b", "c", "d", "e"};
  CHECK(precision_at_k({"a"}, five, 1) == 1.0);
  CHECK(recall_at_k({"a"}, five, 1) == doctest::Approx(0.2));

  CHECK(ndcg_at_k({"a"}, {"a"}, 1) == 1.0);
  CHECK(ndcg_at_k({"x", "y"}, {"a"}, 2) == 0.0);
  CHECK(average_precision({"x", "y"}, {"a"}) == 0.0);
  CHECK(reciprocal_rank({"x", "a"}, {"a"}) == 0.5);

  const std::vector<Ranking> qs{{"a"}, {"x", "y", "z", "b"}};
  const std::vector<RelevantSet> js{{"a"}, {"b"}};
  CHECK(mrr(qs, js) == doctest::Approx(0.625).epsilon(1e-12));
  const std::vector<Ranking> top{{"a", "b"}};
  const std::vector<RelevantSet> topj{{"a", "b"}};
  CHECK(mean_average_precision(top, topj) == 1.0);
}

TEST_CASE("ir: argument errors") {
  CHECK_THROWS_AS(precision_at_k({"a"}, {"a"}, 0), ValidationError);
  CHECK_THROWS_AS(recall_at_k({"a"}, {}, 1), ValidationError);
  CHECK_THROWS_AS(precision_at_k({"a"}, {}, 1), ValidationError);
}

TEST_CASE("ir: exhaustive agreement with the brute-force oracle") {
  std::size_t checked = 0;
  for (const auto& rel : all_relevant_sets()) {
    for (const auto& r : rankings()) {
      double prev_recall = 0.0;
      for (std::size_t k = 1; k <= kDocs.size(); ++k) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < k && i < r.size(); ++i) hits += rel.count(r[i]);
        const double p = precision_at_k(r, rel, k);
        const double rc = recall_at_k(r, rel, k);
        REQUIRE(std::abs(p - static_cast<double>(hits) / static_cast<double>(k)) < 1e-12);
        REQUIRE(std::abs(rc - static_cast<double>(hits) / static_cast<double>(rel.size())) < 1e-12);
        REQUIRE(rc >= prev_recall);
        prev_recall = rc;
        REQUIRE(std::abs(ndcg_at_k(r, rel, k) - oracle_ndcg(r, rel, k)) < 1e-12);
        ++checked;
      }
      REQUIRE(std::abs(average_precision(r, rel) - oracle_ap(r, rel)) < 1e-12);
      REQUIRE(std::abs(reciprocal_rank(r, rel) - oracle_rr(r, rel)) < 1e-12);
    }
  }
  CHECK(checked == 31 * 326 * 5);

  // Means over a fixed query set.
  std::vector<Ranking> qs(rankings().begin() + 100, rankings().begin() + 131);
  const auto sets = all_relevant_sets();
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    m1 += oracle_rr(qs[i], sets[i]);
    m2 += oracle_ap(qs[i], sets[i]);
  }
  CHECK(std::abs(mrr(qs, sets) - m1 / 31.0) < 1e-12);
  CHECK(std::abs(mean_average_precision(qs, sets) - m2 / 31.0) < 1e-12);
}

TEST_CASE("abc: engineered streams fire 3, 2 and 1 of 3 indicators") {
  std::vector<IndicatorSpec> ind(3);
  ind[0].id = "spike";
  ind[0].predicate.kind = IndicatorPredicate::Kind::kRateSpike;
  ind[0].predicate.at_least = 5;
  ind[1].id = "probe";
  ind[1].predicate.kind = IndicatorPredicate::Kind::kFieldPresent;
  ind[1].predicate.field = "probe";
  ind[2].id = "failures";
  ind[2].predicate.kind = IndicatorPredicate::Kind::kCountEquals;
  ind[2].predicate.field = "auth";
  ind[2].predicate.value = std::string("failure");
  ind[2].predicate.at_least = 2;

  std::vector<SimulationEvent> one;  // spike only
  for (int i = 0; i < 5; ++i) one.push_back(ev(i * 1000));
  auto two = one;
  two.push_back(ev(3 * kMillisPerMinute, {{"probe", std::int64_t{1}}}));
  auto three = two;
  three.push_back(ev(4 * kMillisPerMinute, {{"auth", std::string("failure")}}));
  three.push_back(ev(5 * kMillisPerMinute, {{"auth", std::string("failure")}}));

  const auto r3 = abc(three, ind);
  CHECK(r3.matched == 3);
  CHECK(r3.coverage == 1.0);
  CHECK(r3.pass);
  const auto r2 = abc(two, ind);
  CHECK(r2.matched == 2);
  CHECK(std::round(r2.coverage * 100) == 67);
  CHECK(r2.pass);
  const auto r1 = abc(one, ind);
  CHECK(r1.matched == 1);
  CHECK(std::round(r1.coverage * 100) == 33);
  CHECK_FALSE(r1.pass);
  CHECK(r1.matched_ids == std::vector<std::string>{"spike"});
}

TEST_CASE("abc: remaining predicate kinds and registry lookups") {
  IndicatorPredicate distinct{IndicatorPredicate::Kind::kDistinctValues, "port", {}, 0.0, 3};
  std::vector<SimulationEvent> es{ev(0, {{"port", std::int64_t{1}}}), ev(1, {{"port", std::int64_t{2}}}),
                                  ev(2, {{"port", std::int64_t{2}}})};
  CHECK_FALSE(indicator_fires(distinct, es));
  es.push_back(ev(3, {{"port", std::int64_t{3}}}));
  CHECK(indicator_fires(distinct, es));

  IndicatorPredicate at_least{IndicatorPredicate::Kind::kNumericAtLeast, "port", {}, 3.0, 1};
  CHECK(indicator_fires(at_least, es));
  at_least.threshold = 3.5;
  CHECK_FALSE(indicator_fires(at_least, es));

  IndicatorPredicate sum{IndicatorPredicate::Kind::kSumAtLeast, "port", {}, 8.0, 1};
  CHECK(indicator_fires(sum, es));
  sum.threshold = 8.5;
  CHECK_FALSE(indicator_fires(sum, es));

  const auto& reg = homesim::testing::catalogs().threats;
  CHECK(abc({}, "denial_of_service", reg).matched == 0);
  CHECK_THROWS_AS(abc({}, "jamming", reg), ValidationError);
  CHECK_THROWS(abc({}, "no_such_threat", reg));
}

TEST_CASE("alf: coverage, ordering and thresholds") {
  using P = AttackPhase;
  const std::vector<P> five{P::kReconnaissance, P::kInitialAccess, P::kExecution, P::kPersistence,
                            P::kExfiltration};
  auto r = alf(five);
  CHECK(r.phases_covered == 5);
  CHECK(std::round(r.coverage * 100) == 83);
  CHECK(r.pass);

  const std::vector<P> two{P::kReconnaissance, P::kExecution, P::kExecution};
  r = alf(two);
  CHECK(r.phases_covered == 2);
  CHECK(std::round(r.coverage * 100) == 33);
  CHECK(r.ordering_valid);
  CHECK_FALSE(r.pass);

  const std::vector<P> three{P::kInitialAccess, P::kExecution, P::kCleanup};
  CHECK(alf(three).pass);  // 3/6 is exactly the boundary

  const std::vector<P> swapped{P::kExecution, P::kReconnaissance};
  CHECK_FALSE(alf(swapped).ordering_valid);
  const std::vector<P> full_swapped{P::kInitialAccess, P::kReconnaissance, P::kExecution,
                                    P::kPersistence, P::kExfiltration, P::kCleanup};
  CHECK_FALSE(alf(full_swapped).pass);

  std::vector<SimulationEvent> es{ev(0), ev(1), ev(2)};
  es[0].phase = P::kReconnaissance;
  es[2].phase = P::kExecution;
  CHECK(alf(es).phases_covered == 2);
}

TEST_CASE("msim: equal-weight combination") {
  const auto s = msim_combine(1.0, 0.90, 0.756, 0.943);
  CHECK(std::round(s.combined * 1000) / 1000 == doctest::Approx(0.900));
  CHECK(msim_combine(1, 1, 1, 1).combined == 1.0);
}

TEST_CASE("msim: range and tag similarity") {
  CHECK(range_jaccard({0, 10}, {0, 10}) == 1.0);
  CHECK(range_jaccard({0, 10}, {5, 15}) == doctest::Approx(1.0 / 3.0));
  CHECK(range_jaccard({0, 1}, {2, 3}) == 0.0);
  CHECK(range_jaccard({2, 2}, {2, 2}) == 1.0);
  CHECK(tag_similarity("power_w", {"power w"}) == 1.0);
  CHECK(tag_similarity("power_w", {"power", "energy"}) == doctest::Approx(1.0 / 3.0));
  CHECK(tag_similarity("temp", {"humidity"}) == 0.0);
}

TEST_CASE("msim: scoring against a schema") {
  auto schema = ReferenceSchema::from_json(nlohmann::json::parse(R"({
    "devices": {
      "bulb": {"fields": [
        {"name": "brightness", "type": "integer", "range": [0, 100], "tags": ["brightness"]},
        {"name": "power_w", "type": "real", "range": [0, 10], "tags": ["power", "w"]}
      ]}
    }})"));

  std::vector<SimulationEvent> es(2);
  for (auto& e : es) e.device_type = "bulb";
  es[0].payload = {{"brightness", std::int64_t{0}}, {"power_w", 0.0}};
  es[1].payload = {{"brightness", std::int64_t{100}}, {"power_w", 10.0}};
  auto s = msim(es, schema);
  CHECK(s.field_coverage == 1.0);
  CHECK(s.type_compat == 1.0);
  CHECK(s.range_overlap == 1.0);
  CHECK(s.semantic_sim == 1.0);
  CHECK(s.combined == 1.0);

  for (auto& e : es) e.payload = {{"voltage", 1.0}};
  s = msim(es, schema);
  CHECK(s.field_coverage == 0.0);

  // Attack rows are not device messages.
  es.push_back(es[0]);
  es.back().device_type = "camera";
  es.back().label.verdict = Verdict::kAttack;
  CHECK_NOTHROW(msim(es, schema));
  es.back().label.verdict = Verdict::kBenign;
  CHECK_THROWS_AS(msim(es, schema), ValidationError);
  CHECK_NOTHROW(msim(es, schema, true));

  CHECK_THROWS_AS(ReferenceSchema::from_json(nlohmann::json::parse(
                      R"({"devices": {"x": {"fields": [{"name": "a", "type": "real"},
                                                       {"name": "a", "type": "real"}]}}})")),
                  ValidationError);
}

TEST_CASE("diversity: entropy and gini examples") {
  const std::vector<double> uniform{1, 1, 1, 1};
  CHECK(normalized_entropy(uniform) == doctest::Approx(1.0));
  CHECK(gini(uniform) == 0.0);
  const std::vector<double> skew{0, 0, 0, 4};
  CHECK(gini(skew) == doctest::Approx(0.75));
  const std::vector<double> single{9};
  CHECK(normalized_entropy(single) == 0.0);
}

TEST_CASE("diversity: gini matches the mean absolute difference form") {
  RngStream rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.uniform_index(12);
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(rng.uniform_index(50));
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    if (total == 0.0) continue;
    double diff = 0.0;
    for (double a : x)
      for (double b : x) diff += std::abs(a - b);
    const double oracle = diff / (2.0 * static_cast<double>(n) * total);
    CHECK(std::abs(gini(x) - oracle) < 1e-12);
    CHECK(gini(x) >= 0.0);
    CHECK(gini(x) < 1.0);
    const bool uniform = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    CHECK((gini(x) == 0.0) == uniform);
    const double h = normalized_entropy(x);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-12);
  }
}

TEST_CASE("diversity profile over device types") {
  std::vector<SimulationEvent> es;
  for (int i = 0; i < 4; ++i) {
    auto e = ev(i);
    e.device_type = "t" + std::to_string(i % 2);
    e.category = "c";
    es.push_back(e);
  }
  const auto d = diversity_profile(es);
  CHECK(d.unique_types == 2);
  CHECK(d.unique_categories == 1);
  CHECK(d.type_entropy == doctest::Approx(1.0));
  CHECK(d.category_entropy == 0.0);
  CHECK(d.gini == 0.0);
  CHECK_THROWS_AS(diversity_profile({}), ValidationError);
}

TEST_CASE("dataset quality") {
  std::vector<SimulationEvent> es;
  for (int i = 0; i < 4; ++i) {
    auto e = ev(i * kMillisPerHour);
    e.device_id = "dev_00" + std::to_string(i);
    if (i % 2) {
      e.label.verdict = Verdict::kAttack;
      e.label.threat_type = "denial_of_service";
      e.label.taxonomy_path.assign(7, "x");
    } else {
      e.label.taxonomy_path = {"benign"};
    }
    es.push_back(e);
  }
  const auto q = dataset_quality(es, 12);
  CHECK(q.scale == 4);
  CHECK(q.features == 12);
  CHECK(q.balance == 1.0);
  CHECK(q.attack_diversity == 0.0);
  CHECK(q.temporal_uniformity == doctest::Approx(1.0));
  CHECK(q.source_diversity == doctest::Approx(1.0));
  CHECK(q.taxonomy_depth == 1.0);
  CHECK_THROWS_AS(dataset_quality({}, 1), ValidationError);

  const std::vector<std::size_t> all_in_one{8, 0, 0, 0};
  CHECK(temporal_uniformity(all_in_one) == doctest::Approx(0.0));
}

TEST_CASE("rouge-l examples") {
  CHECK(rouge_l("a b c d", "a c d") == doctest::Approx(6.0 / 7.0));
  CHECK(rouge_l("the cat", "The Cat") == 1.0);
  CHECK(rouge_l("x y", "a b") == 0.0);
}

TEST_CASE("min-max normalization") {
  const auto rows = min_max_normalize({{10, 20, 30}, {5, 5}, {0.00, 0.65, 0.00, 0.95}});
  CHECK(rows[0].values == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(rows[1].constant);
  CHECK(rows[1].values == std::vector<double>{0.0, 0.0});
  const auto& d4 = rows[2].values;
  CHECK(d4[0] == 0.0);
  CHECK(d4[2] == 0.0);
  CHECK(d4[3] == 1.0);
  CHECK(d4[1] == doctest::Approx(0.65 / 0.95));
  CHECK(d4[1] > d4[0]);
  CHECK(d4[3] > d4[1]);
  CHECK_THROWS_AS(min_max_normalize({{1.0}}), ValidationError);
}
