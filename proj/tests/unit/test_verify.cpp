#include <doctest.h>

#include <cmath>
#include <set>

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"
#include "homesim/home/generator.hpp"
#include "homesim/runtime/archive.hpp"
#include "homesim/runtime/digest.hpp"
#include "homesim/runtime/rng.hpp"
#include "homesim/verify/verify.hpp"
#include "test_support.hpp"

using namespace homesim;
using namespace homesim::verify;
using homesim::testing::catalogs;
using homesim::testing::TempDir;

namespace {

Context ctx() { return Context{&catalogs(), nullptr, 5}; }

HomeConfiguration home_of(const std::string& tmpl, std::uint64_t seed = 42) {
  home::GenerationRequest req;
  req.template_name = tmpl;
  req.seed = seed;
  return home::generate_home(req, catalogs());
}

std::vector<ValidatorReport> reports_with(const std::array<double, 6>& scores) {
  std::vector<ValidatorReport> out;
  for (std::size_t i = 0; i < kStages.size(); ++i) out.push_back({kStages[i], scores[i], {}});
  return out;
}

bool has_error(const ValidatorReport& r) {
  return std::any_of(r.findings.begin(), r.findings.end(), [](const Finding& f) { return f.severity == Severity::kError; });
}

const SimulationResult& dos_run() {
  static const SimulationResult r = [] {
    SimulationParameters p;
    p.home.template_name = "studio";
    ScenarioRequest s;
    s.threat = "denial_of_service";
    s.gamma = 0.5;
    s.theta_vuln = 0.0;
    p.threats.push_back(s);
    return run_simulation(p, 42, catalogs());
  }();
  return r;
}

}  // namespace

TEST_CASE("score: penalties per finding, floored at zero") {
  std::vector<Finding> f;
  CHECK(score_findings(f) == 1.0);
  f.push_back({Severity::kInfo, "note", ""});
  CHECK(score_findings(f) == 1.0);
  f.push_back({Severity::kWarning, "w", ""});
  CHECK(score_findings(f) == doctest::Approx(0.95));
  f.push_back({Severity::kError, "e", ""});
  CHECK(score_findings(f) == doctest::Approx(0.75));
  for (int i = 0; i < 10; ++i) f.push_back({Severity::kError, "e", ""});
  CHECK(score_findings(f) == 0.0);
}

TEST_CASE("home: every generated template passes all non-factual stages cleanly") {
  for (const auto& t : {"studio", "one_bedroom_apartment", "townhouse", "family_house", "mansion"}) {
    for (std::uint64_t seed : {42u, 7u, 1234u}) {
      const auto v = verify_artifact(home_artifact(home_of(t, seed)), ctx());
      for (const auto& r : v.reports) {
        INFO(t, " seed ", seed, " stage ", stage_name(r.stage));
        for (const auto& f : r.findings) INFO(f.message, " @ ", f.location);
        CHECK(r.score == 1.0);
      }
      CHECK(v.confidence == 1.0);
      CHECK(v.decision.outcome == Outcome::kApprove);
    }
  }
}

TEST_CASE("home: valid studio scores 1.0 at the physical stage with no findings") {
  const auto r = run_stage(Stage::kPhysical, home_artifact(home_of("studio")), ctx());
  CHECK(r.score == 1.0);
  CHECK(r.findings.empty());
}

TEST_CASE("home: a device in a room that does not exist is a schema error") {
  auto home = home_of("studio");
  home.devices.front().room_id = "attic_9";
  const auto r = run_stage(Stage::kSchema, home_artifact(home), ctx());
  REQUIRE(has_error(r));
  CHECK(r.score < 1.0);
  bool named = false;
  for (const auto& f : r.findings) named |= f.location == home.devices.front().id;
  CHECK(named);
}

TEST_CASE("home: raw JSON with a missing field is caught before typing") {
  auto j = nlohmann::json(home_of("studio"));
  j["devices"][0].erase("room");
  const auto a = artifact_from_json(j, "config.json");
  CHECK(a.kind == ArtifactKind::kHome);
  CHECK_FALSE(a.home.has_value());
  const auto v = verify_artifact(a, ctx());
  CHECK(has_error(v.reports[0]));
  for (std::size_t i = 1; i < v.reports.size(); ++i) {
    if (v.reports[i].stage == Stage::kFactual) continue;
    CHECK(v.reports[i].score < 1.0);  // the "could not check" warning
  }
}

TEST_CASE("home: physical, semantic, security and business defects land in their stages") {
  SUBCASE("oversubscribed capacity is physical") {
    auto home = home_of("studio");
    for (auto& r : home.rooms) r.capacity = 0;
    CHECK(has_error(run_stage(Stage::kPhysical, home_artifact(home), ctx())));
    CHECK_FALSE(has_error(run_stage(Stage::kSchema, home_artifact(home), ctx())));
  }
  SUBCASE("unknown device type is semantic") {
    auto home = home_of("studio");
    home.devices.front().type_name = "flux_capacitor";
    CHECK(has_error(run_stage(Stage::kSemantic, home_artifact(home), ctx())));
  }
  SUBCASE("shared network address is security") {
    auto home = home_of("family_house");
    home.devices[1].network_address = home.devices[0].network_address;
    CHECK(has_error(run_stage(Stage::kSecurity, home_artifact(home), ctx())));
  }
  SUBCASE("wrong room count is business") {
    auto home = home_of("townhouse");
    home.rooms.pop_back();
    CHECK(has_error(run_stage(Stage::kBusiness, home_artifact(home), ctx())));
  }
}

TEST_CASE("params: gamma 1.4 is a security error") {
  SimulationParameters p;
  ScenarioRequest s;
  s.threat = "denial_of_service";
  s.gamma = 1.4;
  p.threats.push_back(s);
  const auto a = parameters_artifact(p);
  CHECK(has_error(run_stage(Stage::kSecurity, a, ctx())));
  CHECK_FALSE(has_error(run_stage(Stage::kSchema, a, ctx())));
  CHECK(run_stage(Stage::kSecurity, a, ctx()).score == doctest::Approx(0.8));
}

TEST_CASE("params: defaults verify cleanly; stubs and disabled protocols are semantic errors") {
  SimulationParameters p;
  CHECK(verify_artifact(parameters_artifact(p), ctx()).confidence == 1.0);
  ScenarioRequest stub;
  stub.threat = "jamming";
  p.threats.push_back(stub);
  CHECK(has_error(run_stage(Stage::kSemantic, parameters_artifact(p), ctx())));
  p.threats.front().threat = "denial_of_service";
  CHECK_FALSE(has_error(run_stage(Stage::kSemantic, parameters_artifact(p), ctx())));
  p.protocols = {Protocol::kZigbee};
  if (catalogs().threats.find("denial_of_service").protocol != Protocol::kZigbee)
    CHECK(has_error(run_stage(Stage::kSemantic, parameters_artifact(p), ctx())));
}

TEST_CASE("scenarios: a generated run verifies cleanly as scenarios and as a bundle") {
  const auto& r = dos_run();
  const auto sv = verify_artifact(scenarios_artifact(r.scenarios, r.record.params.duration), ctx());
  CHECK(sv.confidence == 1.0);
  const auto bv = verify_artifact(bundle_artifact(r), ctx());
  for (const auto& rep : bv.reports) {
    INFO(stage_name(rep.stage));
    for (const auto& f : rep.findings) INFO(f.message, " @ ", f.location);
    CHECK(rep.score == 1.0);
  }
  CHECK(bv.decision.outcome == Outcome::kApprove);
}

TEST_CASE("scenarios: tampered intensity, out-of-horizon window and foreign targets are caught") {
  const auto& r = dos_run();
  auto s = r.scenarios;
  REQUIRE_FALSE(s.empty());
  s.front().intensity.rate += 0.5;
  CHECK(has_error(run_stage(Stage::kSecurity, scenarios_artifact(s, r.record.params.duration), ctx())));
  s = r.scenarios;
  CHECK(has_error(run_stage(Stage::kSecurity, scenarios_artifact(s, s.front().window.end - 1), ctx())));
  auto bundle = bundle_artifact(r);
  bundle.scenarios->front().targets.push_back("ghost_device");
  CHECK(has_error(run_stage(Stage::kSemantic, bundle, ctx())));
}

TEST_CASE("bundle: imported archive verifies; mismatched record counts are a business error") {
  TempDir dir("verify");
  export_archive(make_archive(dos_run()), dir.path() / "run");
  const auto a = load_artifact(dir.path() / "run");
  CHECK(a.kind == ArtifactKind::kBundle);
  CHECK(a.schema_findings.empty());
  CHECK(verify_artifact(a, ctx()).confidence == 1.0);
  auto bad = a;
  bad.events->pop_back();
  CHECK(has_error(run_stage(Stage::kBusiness, bad, ctx())));
}

TEST_CASE("load: directories without a manifest and non-JSON files are rejected") {
  TempDir dir("verify-load");
  CHECK_THROWS_AS(load_artifact(dir.path()), ValidationError);
  write_file_atomic(dir.path() / "x.json", "{not json");
  CHECK_THROWS_AS(load_artifact(dir.path() / "x.json"), ValidationError);
  CHECK_THROWS_AS(load_artifact(dir.path() / "missing.json"), ValidationError);
}

TEST_CASE("aggregate: worked values") {
  CHECK(aggregate_confidence(reports_with({1, 1, 1, 1, 1, 1})) == 1.0);
  CHECK(aggregate_confidence(reports_with({1, 1, 0, 1, 1, 1})) == 0.0);
  CHECK(aggregate_confidence(reports_with({0.9, 1, 1, 1, 1, 1})) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(aggregate_confidence(reports_with({0.9, 0.9, 1, 1, 1, 1})) == doctest::Approx(0.81).epsilon(1e-12));
  const std::map<Stage, double> w{{Stage::kSchema, 2.0}};
  CHECK(aggregate_confidence(reports_with({0.9, 1, 1, 1, 1, 1}), w) == doctest::Approx(0.81).epsilon(1e-12));
  const std::map<Stage, double> drop{{Stage::kSemantic, 0.0}};
  CHECK(aggregate_confidence(reports_with({1, 1, 0, 1, 1, 1}), drop) == 1.0);
}

TEST_CASE("aggregate: malformed input throws") {
  auto r = reports_with({1, 1, 1, 1, 1, 1});
  r.pop_back();
  CHECK_THROWS_AS(aggregate_confidence(r), ValidationError);
  r = reports_with({1, 1, 1, 1, 1, 1});
  r.push_back(r.front());
  CHECK_THROWS_AS(aggregate_confidence(r), ValidationError);
  CHECK_THROWS_AS(aggregate_confidence(reports_with({1.2, 1, 1, 1, 1, 1})), ValidationError);
  CHECK_THROWS_AS(aggregate_confidence(reports_with({1, 1, 1, 1, 1, 1}), {{Stage::kSchema, -1.0}}), ValidationError);
}

TEST_CASE("aggregate: matches direct evaluation on random vectors") {
  RngStream rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 6> s{};
    std::map<Stage, double> w;
    double direct = 1.0;
    for (std::size_t i = 0; i < 6; ++i) {
      s[i] = rng.uniform01();
      w[kStages[i]] = 3.0 * rng.uniform01();
      direct *= std::pow(s[i], w[kStages[i]]);
    }
    CHECK(std::abs(aggregate_confidence(reports_with(s), w) - direct) < 1e-12);
  }
}

TEST_CASE("aggregate: monotone in each stage score") {
  RngStream rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 6> s{};
    for (auto& x : s) x = rng.uniform01();
    const auto base = aggregate_confidence(reports_with(s));
    const auto i = rng.uniform_index(6);
    auto up = s;
    up[i] = s[i] + (1.0 - s[i]) * rng.uniform01();
    CHECK(aggregate_confidence(reports_with(up)) >= base);
  }
}

TEST_CASE("gate: thresholds are inclusive at the lower bound") {
  CHECK(gate(0.90).outcome == Outcome::kApprove);
  CHECK(gate(0.85).outcome == Outcome::kApprove);
  CHECK(gate(0.75).outcome == Outcome::kReview);
  CHECK(gate(0.70).outcome == Outcome::kReview);
  CHECK(gate(0.6999).outcome == Outcome::kReject);
  CHECK(gate(0.50).outcome == Outcome::kReject);
  CHECK_FALSE(gate(0.50).explanation.empty());
  CHECK_THROWS_AS(gate(1.01), ValidationError);
  CHECK_THROWS_AS(gate(-0.01), ValidationError);
  CHECK_THROWS_AS(gate(std::nan("")), ValidationError);
}

TEST_CASE("gate: rejection explanation names the failing findings") {
  auto home = home_of("studio");
  home.devices.front().room_id = "attic_9";
  for (auto& d : home.devices) d.network_address = "10.0.0.1";
  const auto v = verify_artifact(home_artifact(home), ctx());
  CHECK(v.decision.outcome == Outcome::kReject);
  CHECK(v.decision.explanation.find("[schema]") != std::string::npos);
  CHECK(v.decision.explanation.find("attic_9") != std::string::npos);
}

TEST_CASE("verify: idempotent and pure") {
  const auto a = bundle_artifact(dos_run());
  const auto v1 = verify_artifact(a, ctx());
  const auto v2 = verify_artifact(a, ctx());
  CHECK(v1.reports == v2.reports);
  CHECK(to_json(v1).dump() == to_json(v2).dump());
}

TEST_CASE("verify: catalog-dependent stages require catalogs") {
  const auto a = home_artifact(home_of("studio"));
  CHECK_NOTHROW(run_stage(Stage::kSchema, a, Context{}));
  CHECK_NOTHROW(run_stage(Stage::kPhysical, a, Context{}));
  CHECK_THROWS_AS(run_stage(Stage::kSemantic, a, Context{}), ValidationError);
}

TEST_CASE("factual: skipped without a knowledge index") {
  const auto r = run_stage(Stage::kFactual, home_artifact(home_of("studio")), ctx());
  CHECK(r.score == 1.0);
  REQUIRE(r.findings.size() == 1);
  CHECK(r.findings[0].severity == Severity::kInfo);
  CHECK(r.findings[0].message.find("skipped") != std::string::npos);
}

TEST_CASE("factual: claims supported by the index pass, unsupported ones warn") {
  const auto home = home_of("studio");
  const auto provider = std::make_shared<knowledge::HashingProvider>();
  knowledge::KnowledgeIndex kb(provider);
  std::set<std::string> types;
  for (const auto& d : home.devices) types.insert(d.type_name);
  for (const auto& t : types) {
    std::string text = t + " is a device that talks";
    for (auto p : catalogs().device(t).protocols) text += " " + std::string(to_string(p));
    kb.ingest({t, text, knowledge::DocumentFormat::kText}, knowledge::Adapter::kDevice);
  }
  Context c = ctx();
  c.kb = &kb;
  const auto good = run_stage(Stage::kFactual, home_artifact(home), c);
  for (const auto& f : good.findings) INFO(f.message, " @ ", f.location);
  CHECK(good.score == 1.0);

  knowledge::KnowledgeIndex unrelated(provider);
  unrelated.ingest({"misc", "weather report for tuesday with light rain", knowledge::DocumentFormat::kText},
                   knowledge::Adapter::kAcademic);
  c.kb = &unrelated;
  const auto bad = run_stage(Stage::kFactual, home_artifact(home), c);
  CHECK(bad.score < 1.0);
  CHECK(bad.findings.size() == types.size());
}
