#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "homesim/core/catalog.hpp"
#include "homesim/home/generator.hpp"
#include "homesim/threat/threat.hpp"

namespace homesim {

/// Engine version recorded with every experiment. Major bumps break archive
/// compatibility; minor bumps are readable with a warning.
inline constexpr std::string_view kEngineVersion = "1.0.0";

struct ScenarioRequest {
  std::string threat;
  double gamma = 0.5;
  std::optional<threat::TimeWindow> window;        // default: first two hours of the run
  std::optional<std::vector<std::string>> targets;  // default: vulnerability selection
  std::optional<double> theta_vuln;                 // default: registry value

  bool operator==(const ScenarioRequest&) const = default;
};

/// Everything besides the seed that determines a run.
struct SimulationParameters {
  home::GenerationRequest home{.seed = 0, .room_count_multiplier = {}, .density_multiplier = {}};  // seed unused; runs carry their own
  std::optional<std::vector<InhabitantProfile>> residents;  // replaces generated inhabitants
  std::vector<ScenarioRequest> threats;
  SimMillis duration = kMillisPerDay;
  double compression = 1440.0;  // simulated / real time; metadata only
  std::vector<Protocol> protocols{kAllProtocols.begin(), kAllProtocols.end()};
  int taxonomy_level = kMaxTaxonomyLevel;

  bool operator==(const SimulationParameters&) const = default;
};

/// Default attack window for a run of the given length.
threat::TimeWindow default_attack_window(SimMillis duration);

/// Fill every optional with its effective value: multipliers become 1,
/// scenario windows and thresholds get their defaults. Explicit targets are
/// kept; absent targets stay absent (they depend on the generated home).
SimulationParameters resolve(const SimulationParameters& params, const Catalogs& catalogs);

/// Throws ValidationError naming the first offending field.
void validate(const SimulationParameters& params, const Catalogs& catalogs);

/// "HH:MM-HH:MM" or "<seconds>-<seconds>", relative to the start of the run.
threat::TimeWindow parse_window(std::string_view text);

void to_json(nlohmann::json& j, const ScenarioRequest& r);
void from_json(const nlohmann::json& j, ScenarioRequest& r);
/// Durations are stored in seconds. Missing keys take their defaults when read.
void to_json(nlohmann::json& j, const SimulationParameters& p);
void from_json(const nlohmann::json& j, SimulationParameters& p);

/// Content hash over the canonical form of {seed, parameters, version}.
std::string experiment_id(std::uint64_t seed, const SimulationParameters& params,
                          std::string_view version = kEngineVersion);

}  // namespace homesim
