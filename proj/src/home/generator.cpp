#include "homesim/home/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "homesim/behavior/behavior.hpp"
#include "homesim/core/error.hpp"

namespace homesim::home {

namespace {

std::string numbered(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

void link(std::vector<Room>& rooms, std::size_t a, std::size_t b) {
  rooms[a].adjacency.push_back(rooms[b].id);
  rooms[b].adjacency.push_back(rooms[a].id);
}

struct Cell {
  std::size_t room = 0;
  std::size_t category = 0;
  double weight = 0.0;  // expected count lambda * area * compat
  std::vector<std::string> types;
};

std::string draw_type(const std::vector<const DeviceCatalogEntry*>& entries, RngStream& rng) {
  std::vector<double> w;
  w.reserve(entries.size());
  for (const auto* e : entries) w.push_back(e->prevalence);
  return entries[rng.categorical(w)]->type_name;
}

std::string address_for(const std::string& family, std::size_t n) {
  char buf[48];
  if (family == "ip") {
    std::snprintf(buf, sizeof buf, "192.168.%zu.%zu", 1 + n / 240, 10 + n % 240);
  } else if (family == "ieee802154") {
    std::snprintf(buf, sizeof buf, "0x%04zx", n + 1);
  } else if (family == "zwave") {
    std::snprintf(buf, sizeof buf, "zw-node-%zu", n + 2);
  } else if (family == "bluetooth") {
    std::snprintf(buf, sizeof buf, "02:00:00:00:%02zx:%02zx", (n >> 8) & 0xff, n & 0xff);
  } else if (family == "fieldbus") {
    std::snprintf(buf, sizeof buf, "modbus-unit-%zu", n + 1);
  } else {
    std::snprintf(buf, sizeof buf, "%s-%zu", family.c_str(), n + 1);
  }
  return buf;
}

int jitter_minutes(int minute, RngStream& rng) {
  return ((minute + 5 * static_cast<int>(rng.uniform_int(-6, 6))) % 1440 + 1440) % 1440;
}

}  // namespace

ResidenceTemplate select_template(const GenerationRequest& request, const Catalogs& catalogs) {
  const ResidenceTemplate* found = catalogs.find_template(request.template_name);
  if (!found) throw ValidationError("unknown template '" + request.template_name + "'");
  ResidenceTemplate t = *found;
  const double rm = request.room_count_multiplier.value_or(1.0);
  const double dm = request.density_multiplier.value_or(1.0);
  if (!(rm > 0.0) || !(dm > 0.0)) throw ValidationError("template multipliers must be > 0");
  if (rm != 1.0) {
    t.room_count = std::max(1, static_cast<int>(std::lround(t.room_count * rm)));
    t.floor_area *= rm;
  }
  if (t.pinned_device_count && (rm != 1.0 || dm != 1.0)) {
    t.pinned_device_count = std::max(1, static_cast<int>(std::lround(*t.pinned_device_count * rm * dm)));
  }
  if (dm != 1.0) {
    t.device_density_bounds.first *= dm;
    t.device_density_bounds.second *= dm;
  }
  return t;
}

std::vector<Room> instantiate_rooms(const ResidenceTemplate& tmpl, const Catalogs& catalogs,
                                    RngStream& rng) {
  const auto n = static_cast<std::size_t>(tmpl.room_count);
  if (n == 0) throw ValidationError("template must have at least one room");

  // Systematic sampling: one uniform offset, n evenly spaced points through
  // the cumulative distribution, then a shuffle to decouple type from index.
  std::vector<std::string> types;
  const double offset = rng.uniform01() / static_cast<double>(n);
  double cumulative = 0.0;
  auto it = tmpl.room_type_distribution.begin();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = offset + static_cast<double>(i) / static_cast<double>(n);
    while (it != tmpl.room_type_distribution.end() && cumulative + it->second <= u) {
      cumulative += it->second;
      ++it;
    }
    if (it == tmpl.room_type_distribution.end()) {
      // u fell past the last bucket through rounding; take the last positive type.
      auto last = std::find_if(tmpl.room_type_distribution.rbegin(), tmpl.room_type_distribution.rend(),
                               [](const auto& kv) { return kv.second > 0.0; });
      types.push_back(last->first);
    } else {
      types.push_back(it->first);
    }
  }
  for (std::size_t i = n; i > 1; --i) std::swap(types[i - 1], types[rng.uniform_index(i)]);

  const auto shares = rng.dirichlet(n, kAreaConcentration);
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double side = std::sqrt(tmpl.floor_area / static_cast<double>(n));

  std::vector<Room> rooms(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rooms[i];
    r.id = numbered("room_", i + 1, 2);
    r.room_type = types[i];
    r.area = shares[i] * tmpl.floor_area;
    r.coordinates = {(static_cast<double>(i % cols) + 0.5) * side,
                     (static_cast<double>(i / cols) + 0.5) * side};
    r.capacity = catalogs.room_type(types[i]).capacity;
  }

  std::vector<std::size_t> hallways;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < n; ++i) (types[i] == "hallway" ? hallways : others).push_back(i);
  if (!hallways.empty()) {
    for (std::size_t h = 1; h < hallways.size(); ++h) link(rooms, hallways[h - 1], hallways[h]);
    for (std::size_t j = 0; j < others.size(); ++j)
      link(rooms, others[j], hallways[j % hallways.size()]);
  } else {
    // Random recursive tree: room i attaches to a uniformly chosen earlier room.
    for (std::size_t i = 1; i < n; ++i) link(rooms, i, rng.uniform_index(i));
  }
  for (auto& r : rooms) std::sort(r.adjacency.begin(), r.adjacency.end());
  return rooms;
}

std::vector<DeviceInstance> place_devices(const std::vector<Room>& rooms,
                                          const ResidenceTemplate& tmpl,
                                          const Catalogs& catalogs,
                                          const CompatibilityMatrix& compat, RngStream& rng,
                                          double density_multiplier) {
  if (rooms.empty()) throw ValidationError("cannot place devices without rooms");

  std::vector<std::vector<const DeviceCatalogEntry*>> by_category(catalogs.categories.size());
  for (const auto& e : catalogs.devices) {
    for (std::size_t c = 0; c < catalogs.categories.size(); ++c)
      if (catalogs.categories[c].id == e.category) by_category[c].push_back(&e);
  }

  std::vector<Cell> cells;
  double expected = 0.0;
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    for (std::size_t c = 0; c < catalogs.categories.size(); ++c) {
      const double k = compat.at(catalogs.categories[c].id, rooms[r].room_type);
      const double mean = catalogs.categories[c].base_density * rooms[r].area * k * density_multiplier;
      if (mean <= 0.0 || by_category[c].empty()) continue;
      cells.push_back({r, c, mean, {}});
      expected += mean;
    }
  }

  std::size_t target = 0;
  if (tmpl.pinned_device_count) {
    target = static_cast<std::size_t>(*tmpl.pinned_device_count);
  } else {
    // Sum of the independent per-cell Poisson counts.
    target = expected > 0.0 ? static_cast<std::size_t>(rng.poisson(expected)) : 0;
    double area = 0.0;
    for (const auto& r : rooms) area += r.area;
    const auto lo = static_cast<std::size_t>(std::ceil(tmpl.device_density_bounds.first * area - 1e-9));
    const auto hi = static_cast<std::size_t>(std::floor(tmpl.device_density_bounds.second * area + 1e-9));
    if (lo <= hi) target = std::clamp(target, lo, hi);
  }
  if (target > 0 && cells.empty())
    throw ValidationError("no compatible (room, category) cell can host devices");

  // Systematic allocation of the total over cells: each cell gets its
  // expected share target * weight / expected, rounded up or down.
  if (target > 0) {
    const double step = expected / static_cast<double>(target);
    double point = rng.uniform01() * step;
    double cumulative = 0.0;
    std::size_t placed = 0;
    for (auto& cell : cells) {
      cumulative += cell.weight;
      while (placed < target && point < cumulative) {
        cell.types.push_back(draw_type(by_category[cell.category], rng));
        point += step;
        ++placed;
      }
    }
    // Rounding can leave the last point just past the final cell.
    while (placed < target) {
      cells.back().types.push_back(draw_type(by_category[cells.back().category], rng));
      ++placed;
    }
  }

  std::vector<DeviceInstance> devices;
  for (const auto& c : cells) {
    for (const auto& type : c.types) {
      devices.push_back({numbered("dev_", devices.size() + 1, 3), type, rooms[c.room].id, ""});
    }
  }
  return devices;
}

NetworkTopology build_network(std::vector<DeviceInstance>& devices, const Catalogs& catalogs) {
  NetworkTopology net;
  if (devices.empty()) return net;

  std::map<std::string, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto& entry = catalogs.device(devices[i].type_name);
    families[catalogs.family_of(entry.protocols.front())].push_back(i);
  }
  std::set<std::pair<std::string, std::string>> edges;
  auto connect = [&edges](const std::string& a, const std::string& b) {
    if (a != b) edges.insert(std::minmax(a, b));
  };
  for (auto& [family, members] : families) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return devices[a].id < devices[b].id; });
    std::size_t hub = members.front();
    for (std::size_t m : members) {
      if (catalogs.device(devices[m].type_name).hub_capable) {
        hub = m;
        break;
      }
    }
    net.hubs[family] = devices[hub].id;
    for (std::size_t n = 0; n < members.size(); ++n) {
      devices[members[n]].network_address = address_for(family, n);
      connect(devices[members[n]].id, devices[hub].id);
    }
  }
  const std::string root = net.hubs.count("ip") ? net.hubs.at("ip") : net.hubs.begin()->second;
  for (const auto& [family, hub] : net.hubs) connect(hub, root);

  for (const auto& d : devices) net.adjacency[d.id];
  for (const auto& [a, b] : edges) {
    net.adjacency[a].push_back(b);
    net.adjacency[b].push_back(a);
  }
  for (auto& [id, peers] : net.adjacency) std::sort(peers.begin(), peers.end());
  return net;
}

std::vector<InhabitantProfile> generate_inhabitants(const ResidenceTemplate& tmpl,
                                                    const Catalogs& catalogs, RngStream& rng) {
  std::vector<InhabitantKind> kinds = tmpl.inhabitant_kinds;
  while (kinds.size() < static_cast<std::size_t>(tmpl.default_inhabitants))
    kinds.push_back(InhabitantKind::kAdult);
  kinds.resize(static_cast<std::size_t>(tmpl.default_inhabitants));

  std::vector<InhabitantProfile> out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto& defaults = catalogs.activities.kinds.at(kinds[i]);
    InhabitantProfile p;
    p.id = numbered("resident_", i + 1, 1);
    p.kind = kinds[i];
    p.schedule.wake_minute = jitter_minutes(defaults.wake_minute, rng);
    p.schedule.sleep_minute = jitter_minutes(defaults.sleep_minute, rng);
    if (p.schedule.sleep_minute == p.schedule.wake_minute)
      p.schedule.sleep_minute = (p.schedule.sleep_minute + 5) % 1440;
    if (defaults.work_minutes && kinds[i] != InhabitantKind::kPet) {
      const int shift = 5 * static_cast<int>(rng.uniform_int(-6, 6));
      p.schedule.work_minutes = std::make_pair((defaults.work_minutes->first + shift + 1440) % 1440,
                                               (defaults.work_minutes->second + shift + 1440) % 1440);
      p.schedule.work_from_home = rng.bernoulli(defaults.work_from_home_probability);
    }
    p.tech_savviness = rng.uniform(defaults.tech_savviness.first, defaults.tech_savviness.second);
    p.variation_sigma = 0.1;
    out.push_back(std::move(p));
  }
  return out;
}

HomeConfiguration generate_home(const GenerationRequest& request, const Catalogs& catalogs) {
  HomeConfiguration config;
  config.residence = select_template(request, catalogs);
  config.seed = request.seed;
  config.catalog_version = catalogs.version;

  auto room_rng = derive_stream(request.seed, "rooms");
  auto placement_rng = derive_stream(request.seed, "placement");
  auto resident_rng = derive_stream(request.seed, "residents");

  config.rooms = instantiate_rooms(config.residence, catalogs, room_rng);
  config.devices = place_devices(config.rooms, config.residence, catalogs, catalogs.compat,
                                 placement_rng, request.density_multiplier.value_or(1.0));
  auto net = build_network(config.devices, catalogs);
  config.network = std::move(net.adjacency);
  config.hubs = std::move(net.hubs);
  config.inhabitants = generate_inhabitants(config.residence, catalogs, resident_rng);

  std::vector<InhabitantKind> kinds;
  for (const auto& p : config.inhabitants) kinds.push_back(p.kind);
  config.behavior = behavior::build_behavior_params(catalogs.activities, kinds);
  return config;
}

}  // namespace homesim::home
