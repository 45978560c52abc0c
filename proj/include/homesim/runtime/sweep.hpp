#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "homesim/runtime/params.hpp"

namespace homesim {

/// Parameter name -> values to try. Keys: template, room_count_multiplier,
/// density_multiplier, hours, duration_s, compression, taxonomy_level, and,
/// applied to every threat request, threat, gamma, theta_vuln.
using SweepGrid = std::map<std::string, std::vector<nlohmann::json>>;

struct SweepPoint {
  std::size_t index = 0;
  std::uint64_t seed = 0;  // seed_base + index
  std::map<std::string, nlohmann::json> assignment;
  SimulationParameters params;
};

/// Set one named parameter. Throws ValidationError for an unknown key or a
/// value of the wrong shape.
void apply_override(SimulationParameters& params, const std::string& key, const nlohmann::json& value);

/// Cartesian product in key order with the last key varying fastest.
/// Throws ValidationError for an empty grid or an empty value list.
std::vector<SweepPoint> expand_sweep(const SimulationParameters& base, const SweepGrid& grid,
                                     std::uint64_t seed_base);

SweepGrid sweep_grid_from_json(const nlohmann::json& j);

}  // namespace homesim
