#include "homesim/runtime/sweep.hpp"

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"

namespace homesim {

void apply_override(SimulationParameters& p, const std::string& key, const nlohmann::json& value) {
  try {
    if (key == "template") {
      p.home.template_name = value.get<std::string>();
    } else if (key == "room_count_multiplier") {
      p.home.room_count_multiplier = value.get<double>();
    } else if (key == "density_multiplier") {
      p.home.density_multiplier = value.get<double>();
    } else if (key == "hours") {
      p.duration = seconds_to_millis(value.get<double>() * 3600.0);
    } else if (key == "duration_s") {
      p.duration = seconds_to_millis(value.get<double>());
    } else if (key == "compression") {
      p.compression = value.get<double>();
    } else if (key == "taxonomy_level") {
      p.taxonomy_level = value.get<int>();
    } else if (key == "threat" || key == "gamma" || key == "theta_vuln") {
      if (p.threats.empty()) {
        if (key != "threat") throw ValidationError("'" + key + "' needs a threat request to apply to");
        p.threats.emplace_back();
      }
      for (auto& s : p.threats) {
        if (key == "threat") s.threat = value.get<std::string>();
        if (key == "gamma") s.gamma = value.get<double>();
        if (key == "theta_vuln") s.theta_vuln = value.get<double>();
      }
    } else {
      throw ValidationError("unknown sweep parameter '" + key + "'");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError("bad value for '" + key + "': " + ex.what());
  }
}

std::vector<SweepPoint> expand_sweep(const SimulationParameters& base, const SweepGrid& grid,
                                     std::uint64_t seed_base) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  std::size_t total = 1;
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw ValidationError("sweep parameter '" + key + "' has no values");
    total *= values.size();
  }
  std::vector<SweepPoint> out;
  out.reserve(total);
  for (std::size_t j = 0; j < total; ++j) {
    SweepPoint pt;
    pt.index = j;
    pt.seed = seed_base + j;
    pt.params = base;
    // Mixed-radix digits of j, last key least significant.
    std::size_t rest = j;
    std::vector<std::pair<std::string, const nlohmann::json*>> picks;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
      picks.emplace_back(it->first, &it->second[rest % it->second.size()]);
      rest /= it->second.size();
    }
    for (auto it = picks.rbegin(); it != picks.rend(); ++it) {
      apply_override(pt.params, it->first, *it->second);
      pt.assignment[it->first] = *it->second;
    }
    out.push_back(std::move(pt));
  }
  return out;
}

SweepGrid sweep_grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("sweep grid must be an object of value lists");
  SweepGrid g;
  for (const auto& [key, values] : j.items()) {
    if (!values.is_array()) throw ValidationError("sweep parameter '" + key + "' must list its values");
    g[key] = values.get<std::vector<nlohmann::json>>();
  }
  return g;
}

}  // namespace homesim
