#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homesim/behavior/behavior.hpp"
#include "homesim/core/catalog.hpp"
#include "homesim/core/types.hpp"
#include "homesim/runtime/params.hpp"
#include "homesim/threat/threat.hpp"

namespace homesim {

/// Wall-clock stamp written into every record. Runs are pure functions of
/// their inputs, so the record carries the simulated epoch, not the host time.
inline constexpr std::string_view kSimulationEpoch = "2025-01-01T00:00:00Z";

struct ExperimentRecord {
  std::string exp_id;
  std::uint64_t seed = 0;
  SimulationParameters params;  // resolved
  std::string engine_version{kEngineVersion};
  std::string catalog_version;
  std::string timestamp{kSimulationEpoch};
  std::size_t event_count = 0;
  std::size_t attack_event_count = 0;
  std::map<std::string, std::string> digests;  // artifact file -> sha256

  bool operator==(const ExperimentRecord&) const = default;
};

struct SimulationResult {
  HomeConfiguration home;
  std::vector<behavior::PresenceTrace> traces;  // inhabitant id order
  std::vector<threat::AttackScenario> scenarios;
  std::vector<SimulationEvent> events;  // log order, labeled
  ExperimentRecord record;              // digests are filled when archived
};

/// Periodic telemetry (network-packet for network devices) at a random phase
/// per device, plus state changes drawn each behavior tick with probability
/// activation * interaction_probability. Each device draws from its own
/// "traffic/<id>" stream. Devices with no enabled protocol stay silent.
/// `profiles` must be in the same order as `traces`.
std::vector<SimulationEvent> emit_benign_events(const HomeConfiguration& home,
                                                std::span<const behavior::PresenceTrace> traces,
                                                std::span<const InhabitantProfile> profiles,
                                                const Catalogs& catalogs, SimMillis duration,
                                                std::span<const Protocol> enabled, std::uint64_t seed);

/// Planned scenario events as unlabeled network packets on their targets.
std::vector<SimulationEvent> emit_attack_events(const HomeConfiguration& home,
                                                const threat::AttackScenario& scenario,
                                                const Catalogs& catalogs);

/// generate home -> behavior -> scenarios -> merge -> label. Validates the
/// parameters first; a failing stage is rethrown with the stage name.
SimulationResult run_simulation(const SimulationParameters& params, std::uint64_t seed,
                                const Catalogs& catalogs);

}  // namespace homesim
