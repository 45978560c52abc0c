#include "homesim/core/validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace homesim {

std::vector<Violation> validate_home(const HomeConfiguration& config, const Catalogs* catalogs) {
  std::vector<Violation> out;
  auto add = [&out](std::string code, std::string message, std::string location) {
    out.push_back({std::move(code), std::move(message), std::move(location)});
  };

  std::map<std::string, const Room*> rooms;
  double total_area = 0.0;
  for (const auto& r : config.rooms) {
    if (!rooms.emplace(r.id, &r).second) add("duplicate-room", "room id repeated", r.id);
    if (!(r.area > 0.0)) add("room-area", "room area must be positive", r.id);
    if (r.capacity < 1) add("room-capacity", "room capacity must be >= 1", r.id);
    if (catalogs && !catalogs->has_room_type(r.room_type))
      add("unknown-room-type", "room type '" + r.room_type + "' not in catalog", r.id);
    total_area += r.area;
  }
  for (const auto& r : config.rooms) {
    for (const auto& other : r.adjacency) {
      auto it = rooms.find(other);
      if (it == rooms.end()) {
        add("adjacency-dangling", "adjacent room '" + other + "' does not exist", r.id);
      } else {
        const auto& back = it->second->adjacency;
        if (std::find(back.begin(), back.end(), r.id) == back.end())
          add("adjacency-asymmetric", "adjacency to '" + other + "' is not mirrored", r.id);
      }
    }
  }

  std::set<std::string> device_ids;
  for (const auto& d : config.devices) {
    if (!device_ids.insert(d.id).second) add("duplicate-device", "device id repeated", d.id);
    if (!rooms.count(d.room_id))
      add("missing-room", "device placed in nonexistent room '" + d.room_id + "'", d.id);
    if (catalogs && !catalogs->has_device(d.type_name))
      add("unknown-device-type", "device type '" + d.type_name + "' not in catalog", d.id);
  }

  if (!config.devices.empty() && total_area > 0.0) {
    const double density = static_cast<double>(config.devices.size()) / total_area;
    const auto [lo, hi] = config.residence.device_density_bounds;
    // small slack for floating-point area sums
    if (density < lo - 1e-9 || density > hi + 1e-9)
      add("density-bounds", "device density " + std::to_string(density) + " outside template bounds",
          config.residence.name);
  }

  for (const auto& [id, peers] : config.network) {
    if (!device_ids.count(id)) add("network-dangling", "network node is not a device", id);
    for (const auto& p : peers)
      if (!device_ids.count(p)) add("network-dangling", "network peer '" + p + "' is not a device", id);
  }
  for (const auto& [family, hub] : config.hubs)
    if (!device_ids.count(hub)) add("network-hub", "hub for " + family + " is not a device", hub);

  std::set<std::string> inhabitant_ids;
  for (const auto& p : config.inhabitants) {
    if (!inhabitant_ids.insert(p.id).second) add("duplicate-inhabitant", "inhabitant id repeated", p.id);
    if (p.tech_savviness < 0.0 || p.tech_savviness > 1.0)
      add("tech-savviness", "tech savviness outside [0,1]", p.id);
    if (p.schedule.wake_minute == p.schedule.sleep_minute)
      add("schedule", "wake time equals sleep time", p.id);
    if (p.kind == InhabitantKind::kPet && p.schedule.work_minutes)
      add("schedule", "pets have no work hours", p.id);
    if (p.variation_sigma < 0.0) add("variation-sigma", "variation sigma must be >= 0", p.id);
  }

  for (const auto& [kind, matrices] : config.behavior.matrices) {
    for (const auto& m : matrices) {
      for (std::size_t r = 0; r < m.size; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < m.size; ++c) {
          if (m.at(r, c) < 0.0) add("matrix-negative", "negative transition probability",
                                    std::string(to_string(kind)));
          sum += m.at(r, c);
        }
        if (std::abs(sum - 1.0) > 1e-9)
          add("matrix-row-sum", "transition row does not sum to 1", std::string(to_string(kind)));
      }
    }
  }
  return out;
}

}  // namespace homesim
