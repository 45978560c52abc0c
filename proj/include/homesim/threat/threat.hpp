#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "homesim/core/catalog.hpp"
#include "homesim/core/threat_spec.hpp"
#include "homesim/core/types.hpp"
#include "homesim/runtime/rng.hpp"

namespace homesim::threat {

struct TimeWindow {
  SimMillis start = 0;
  SimMillis end = 0;  // exclusive

  SimMillis length() const { return end - start; }
  bool contains(SimMillis t) const { return t >= start && t < end; }
  bool operator==(const TimeWindow&) const = default;
};

struct Intensity {
  double rate = 0.0;     // events per minute
  double stealth = 0.0;  // [0,1]

  bool operator==(const Intensity&) const = default;
};

/// rate = base_rate * (1 + gamma * k_rate); stealth = max(0, base_stealth * (1 - gamma * k_stealth)).
/// Throws ValidationError when gamma is outside [0, 1].
Intensity modulate_intensity(const ThreatSpec& threat, double gamma, double k_rate = 2.0,
                             double k_stealth = 1.0);

/// Devices whose vulnerability to the threat's category exceeds theta_vuln, in input order.
std::vector<std::string> select_targets(std::span<const DeviceInstance> devices,
                                        const Catalogs& catalogs, const ThreatSpec& threat,
                                        double theta_vuln);

struct PhaseWindow {
  AttackPhase phase = AttackPhase::kReconnaissance;
  TimeWindow window;
  std::string technique;
  std::string tactic;

  bool operator==(const PhaseWindow&) const = default;
};

struct PlannedEvent {
  SimMillis timestamp = 0;
  std::string target;
  AttackPhase phase = AttackPhase::kReconnaissance;
  Payload payload;

  bool operator==(const PlannedEvent&) const = default;
};

struct AttackScenario {
  std::string id;
  std::string threat_type;
  std::string threat_category;
  Protocol protocol = Protocol::kWiFi;
  std::vector<std::string> targets;
  TimeWindow window;
  double gamma = 0.0;
  double theta_vuln = 0.5;
  Intensity intensity;
  std::vector<PhaseWindow> phases;  // canonical order, contiguous, non-overlapping
  std::vector<PlannedEvent> events;  // sorted by (timestamp, target)
  bool noop = false;                 // no targets: nothing is emitted

  const PhaseWindow* phase_window(AttackPhase p) const;
  bool operator==(const AttackScenario&) const = default;
};

struct ScenarioOptions {
  std::string id = "scenario_01";
  double k_rate = 2.0;
  double k_stealth = 1.0;
  double theta_vuln = 0.5;
  std::map<AttackPhase, std::string> phase_tactics;
  std::map<std::string, std::string> target_addresses;  // device id -> network address
};

/// Split the window into contiguous sub-windows proportional to each phase's
/// relative duration, then plan ceil(rate * rate_scale * minutes) events per
/// phase at uniform times inside its sub-window, cycling over targets.
/// Throws ValidationError for stub threats, gamma outside [0,1], or a window
/// too short to give every phase a non-empty sub-window.
AttackScenario generate_scenario(const ThreatSpec& threat, std::span<const std::string> targets,
                                 const TimeWindow& window, double gamma, RngStream& rng,
                                 const ScenarioOptions& options = {});

/// Full seven-level path for an attack emission:
/// malicious / threat category / threat type / phase / tactic / target device category / technique.
std::vector<std::string> attack_taxonomy(const AttackScenario& scenario, const PhaseWindow& phase,
                                         const std::string& device_category);

/// Ground-truth label. Events stamped with the id of one of `scenarios` get
/// the attack path cut to `taxonomy_level`; everything else is benign with
/// confidence 1. Throws ValidationError when the level is outside [1, 7].
Label label_event(const SimulationEvent& event, std::span<const AttackScenario> scenarios,
                  int taxonomy_level, double confidence_floor = 0.5);

void to_json(nlohmann::json& j, const TimeWindow& w);
void from_json(const nlohmann::json& j, TimeWindow& w);
void to_json(nlohmann::json& j, const PhaseWindow& p);
void from_json(const nlohmann::json& j, PhaseWindow& p);
/// Planned events are summarized by count; the event log carries them in full.
void to_json(nlohmann::json& j, const AttackScenario& s);
void from_json(const nlohmann::json& j, AttackScenario& s);

}  // namespace homesim::threat
