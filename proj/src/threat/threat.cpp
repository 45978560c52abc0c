#include "homesim/threat/threat.hpp"

#include <algorithm>
#include <cmath>

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"

namespace homesim::threat {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw ValidationError("intensity gamma must lie in [0, 1], got " + std::to_string(gamma));
}

PayloadValue draw_field(const PayloadFieldSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case PayloadFieldSpec::Kind::kConstant:
      return spec.constant;
    case PayloadFieldSpec::Kind::kChoice:
      return spec.choices[rng.uniform_index(spec.choices.size())];
    case PayloadFieldSpec::Kind::kRange:
      if (spec.integer)
        return rng.uniform_int(static_cast<std::int64_t>(std::ceil(spec.min)),
                               static_cast<std::int64_t>(std::floor(spec.max)));
      return std::round(rng.uniform(spec.min, spec.max) * 1000.0) / 1000.0;
  }
  return spec.constant;
}

}  // namespace

Intensity modulate_intensity(const ThreatSpec& threat, double gamma, double k_rate,
                             double k_stealth) {
  check_gamma(gamma);
  return {threat.base_rate * (1.0 + gamma * k_rate),
          std::max(0.0, threat.base_stealth * (1.0 - gamma * k_stealth))};
}

std::vector<std::string> select_targets(std::span<const DeviceInstance> devices,
                                        const Catalogs& catalogs, const ThreatSpec& threat,
                                        double theta_vuln) {
  if (!(theta_vuln >= 0.0 && theta_vuln <= 1.0))
    throw ValidationError("theta_vuln must lie in [0, 1]");
  std::vector<std::string> out;
  for (const auto& d : devices) {
    const auto& category = catalogs.device(d.type_name).category;
    if (catalogs.threats.vulnerability_of(threat.category, category) > theta_vuln) out.push_back(d.id);
  }
  return out;
}

const PhaseWindow* AttackScenario::phase_window(AttackPhase p) const {
  for (const auto& w : phases)
    if (w.phase == p) return &w;
  return nullptr;
}

AttackScenario generate_scenario(const ThreatSpec& threat, std::span<const std::string> targets,
                                 const TimeWindow& window, double gamma, RngStream& rng,
                                 const ScenarioOptions& options) {
  check_gamma(gamma);
  if (threat.stub || threat.phases.empty())
    throw ValidationError("threat '" + threat.threat_type + "' is a registry stub with no phase templates");
  if (window.start < 0 || window.length() < static_cast<SimMillis>(threat.phases.size()))
    throw ValidationError("attack window is empty or too short for its phases");

  AttackScenario s;
  s.id = options.id;
  s.threat_type = threat.threat_type;
  s.threat_category = threat.category;
  s.protocol = threat.protocol;
  s.targets.assign(targets.begin(), targets.end());
  s.window = window;
  s.gamma = gamma;
  s.theta_vuln = options.theta_vuln;
  s.intensity = modulate_intensity(threat, gamma, options.k_rate, options.k_stealth);
  s.noop = targets.empty();

  double total = 0.0;
  for (const auto& p : threat.phases) total += p.relative_duration;
  double before = 0.0;
  const auto span = static_cast<double>(window.length());
  for (std::size_t i = 0; i < threat.phases.size(); ++i) {
    const auto& tpl = threat.phases[i];
    const double after = before + tpl.relative_duration;
    PhaseWindow pw;
    pw.phase = tpl.phase;
    pw.window.start = window.start + static_cast<SimMillis>(std::floor(span * before / total));
    pw.window.end = i + 1 == threat.phases.size()
                        ? window.end
                        : window.start + static_cast<SimMillis>(std::floor(span * after / total));
    if (pw.window.length() <= 0)
      throw ValidationError("attack window too short: phase '" + std::string(to_string(tpl.phase)) +
                            "' gets no time");
    pw.technique = tpl.technique;
    if (auto it = options.phase_tactics.find(tpl.phase); it != options.phase_tactics.end())
      pw.tactic = it->second;
    s.phases.push_back(pw);
    before = after;
  }
  if (s.noop) return s;

  std::size_t emitted = 0;
  for (std::size_t i = 0; i < threat.phases.size(); ++i) {
    const auto& tpl = threat.phases[i];
    const auto& pw = s.phases[i];
    const double minutes = static_cast<double>(pw.window.length()) / static_cast<double>(kMillisPerMinute);
    const auto count = static_cast<std::size_t>(std::ceil(s.intensity.rate * tpl.rate_scale * minutes));
    for (std::size_t k = 0; k < count; ++k) {
      PlannedEvent ev;
      ev.timestamp = pw.window.start +
                     static_cast<SimMillis>(rng.uniform_index(static_cast<std::uint64_t>(pw.window.length())));
      ev.target = s.targets[emitted++ % s.targets.size()];
      ev.phase = tpl.phase;
      for (const auto& [field, spec] : tpl.payload) ev.payload[field] = draw_field(spec, rng);
      if (auto it = options.target_addresses.find(ev.target); it != options.target_addresses.end())
        ev.payload.emplace("dst_addr", it->second);
      s.events.push_back(std::move(ev));
    }
  }
  std::stable_sort(s.events.begin(), s.events.end(), [](const PlannedEvent& a, const PlannedEvent& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.target < b.target;
  });
  return s;
}

std::vector<std::string> attack_taxonomy(const AttackScenario& scenario, const PhaseWindow& phase,
                                         const std::string& device_category) {
  return {"malicious",
          scenario.threat_category,
          scenario.threat_type,
          std::string(to_string(phase.phase)),
          phase.tactic.empty() ? std::string("unmapped") : phase.tactic,
          device_category,
          phase.technique};
}

Label label_event(const SimulationEvent& event, std::span<const AttackScenario> scenarios,
                  int taxonomy_level, double confidence_floor) {
  if (taxonomy_level < 1 || taxonomy_level > kMaxTaxonomyLevel)
    throw ValidationError("taxonomy level must lie in [1, 7]");
  if (event.scenario_id) {
    for (const auto& s : scenarios) {
      if (s.id != *event.scenario_id) continue;
      const PhaseWindow* pw = event.phase ? s.phase_window(*event.phase) : nullptr;
      if (!pw) break;
      Label l;
      l.verdict = Verdict::kAttack;
      l.threat_type = s.threat_type;
      l.attack_technique = pw->technique;
      l.confidence = std::max(confidence_floor, 1.0 - s.intensity.stealth);
      l.taxonomy_path = attack_taxonomy(s, *pw, event.category);
      l.taxonomy_path.resize(static_cast<std::size_t>(taxonomy_level));
      return l;
    }
  }
  return Label{Verdict::kBenign, std::nullopt, std::nullopt, 1.0, {"benign"}};
}

void to_json(nlohmann::json& j, const TimeWindow& w) {
  j = {{"start", millis_to_seconds(w.start)}, {"end", millis_to_seconds(w.end)}};
}

void from_json(const nlohmann::json& j, TimeWindow& w) {
  w.start = seconds_to_millis(j.at("start").get<double>());
  w.end = seconds_to_millis(j.at("end").get<double>());
}

void to_json(nlohmann::json& j, const PhaseWindow& p) {
  j = {{"phase", p.phase}, {"window", p.window}, {"technique", p.technique}, {"tactic", p.tactic}};
}

void from_json(const nlohmann::json& j, PhaseWindow& p) {
  j.at("phase").get_to(p.phase);
  j.at("window").get_to(p.window);
  j.at("technique").get_to(p.technique);
  j.at("tactic").get_to(p.tactic);
}

void to_json(nlohmann::json& j, const AttackScenario& s) {
  j = {{"id", s.id},
       {"threat_type", s.threat_type},
       {"threat_category", s.threat_category},
       {"protocol", s.protocol},
       {"targets", s.targets},
       {"window", s.window},
       {"gamma", s.gamma},
       {"theta_vuln", s.theta_vuln},
       {"effective_rate", s.intensity.rate},
       {"effective_stealth", s.intensity.stealth},
       {"phases", s.phases},
       {"planned_events", s.events.size()},
       {"noop", s.noop}};
}

void from_json(const nlohmann::json& j, AttackScenario& s) {
  j.at("id").get_to(s.id);
  j.at("threat_type").get_to(s.threat_type);
  j.at("threat_category").get_to(s.threat_category);
  j.at("protocol").get_to(s.protocol);
  j.at("targets").get_to(s.targets);
  j.at("window").get_to(s.window);
  j.at("gamma").get_to(s.gamma);
  s.theta_vuln = j.value("theta_vuln", 0.5);
  j.at("effective_rate").get_to(s.intensity.rate);
  j.at("effective_stealth").get_to(s.intensity.stealth);
  j.at("phases").get_to(s.phases);
  s.noop = j.value("noop", false);
  s.events.clear();
}

}  // namespace homesim::threat
