#include <cmath>
#include <queue>
#include <set>

#include "doctest.h"
#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"
#include "homesim/core/validate.hpp"
#include "homesim/home/generator.hpp"
#include "test_support.hpp"

using namespace homesim;
using namespace homesim::home;
using homesim::testing::catalogs;

namespace {

bool rooms_connected(const std::vector<Room>& rooms) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& r : rooms) adj[r.id] = r.adjacency;
  std::set<std::string> seen{rooms.front().id};
  std::queue<std::string> q;
  q.push(rooms.front().id);
  while (!q.empty()) {
    auto cur = q.front();
    q.pop();
    for (const auto& n : adj[cur])
      if (seen.insert(n).second) q.push(n);
  }
  return seen.size() == rooms.size();
}

bool graph_connected(const std::map<std::string, std::vector<std::string>>& adj) {
  if (adj.empty()) return true;
  std::set<std::string> seen{adj.begin()->first};
  std::queue<std::string> q;
  q.push(adj.begin()->first);
  while (!q.empty()) {
    auto cur = q.front();
    q.pop();
    for (const auto& n : adj.at(cur))
      if (seen.insert(n).second) q.push(n);
  }
  return seen.size() == adj.size();
}

}  // namespace

TEST_CASE("select_template resolves names and applies overrides") {
  CHECK(select_template({"studio", 42, {}, {}}, catalogs()).room_count == 3);
  CHECK(select_template({"mansion", 42, {}, {}}, catalogs()).room_count == 21);
  CHECK_THROWS_AS(select_template({"castle", 42, {}, {}}, catalogs()), ValidationError);

  const auto doubled = select_template({"family_house", 42, 2.0, {}}, catalogs());
  CHECK(doubled.room_count == 26);
  CHECK(*doubled.pinned_device_count == 82);
  CHECK_THROWS_AS(select_template({"studio", 42, 0.0, {}}, catalogs()), ValidationError);
  CHECK_THROWS_AS(select_template({"studio", 42, {}, -1.0}, catalogs()), ValidationError);
}

TEST_CASE("instantiate_rooms: counts, area partition, connectivity, determinism") {
  for (const char* name : {"studio", "one_bedroom_apartment", "townhouse", "family_house", "mansion"}) {
    const auto t = select_template({name, 42, {}, {}}, catalogs());
    auto rng = derive_stream(42, "rooms");
    const auto rooms = instantiate_rooms(t, catalogs(), rng);
    CHECK(rooms.size() == static_cast<std::size_t>(t.room_count));
    double area = 0.0;
    for (const auto& r : rooms) {
      CHECK(r.area > 0.0);
      CHECK(r.capacity >= 1);
      CHECK(t.room_type_distribution.at(r.room_type) > 0.0);
      area += r.area;
    }
    CHECK(std::abs(area - t.floor_area) < 1e-9 * t.floor_area);
    CHECK(rooms_connected(rooms));

    auto rng2 = derive_stream(42, "rooms");
    CHECK(instantiate_rooms(t, catalogs(), rng2) == rooms);
  }
}

TEST_CASE("instantiate_rooms: degenerate distribution") {
  auto t = select_template({"townhouse", 42, {}, {}}, catalogs());
  t.room_type_distribution = {{"bedroom", 1.0}};
  auto rng = derive_stream(7, "rooms");
  for (const auto& r : instantiate_rooms(t, catalogs(), rng)) CHECK(r.room_type == "bedroom");
}

TEST_CASE("instantiate_rooms: stratified type counts track the distribution") {
  // Systematic sampling puts each type within one room of n * p.
  const auto t = select_template({"mansion", 42, {}, {}}, catalogs());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto rng = derive_stream(seed, "rooms");
    std::map<std::string, int> counts;
    for (const auto& r : instantiate_rooms(t, catalogs(), rng)) ++counts[r.room_type];
    for (const auto& [type, p] : t.room_type_distribution)
      CHECK(std::abs(counts[type] - p * t.room_count) < 1.0 + 1e-9);
  }
}

TEST_CASE("place_devices: zero compatibility places nothing") {
  const auto& c = catalogs();
  for (const char* name : {"studio", "family_house", "mansion"}) {
    const auto home = generate_home({name, 42, {}, {}}, c);
    std::map<std::string, std::string> room_type;
    for (const auto& r : home.rooms) room_type[r.id] = r.room_type;
    for (const auto& d : home.devices)
      CHECK(c.compat.at(c.device(d.type_name).category, room_type[d.room_id]) > 0.0);
  }
  CHECK(c.compat.at("kitchen", "bathroom") == 0.0);
}

TEST_CASE("place_devices: pinned totals") {
  CHECK(generate_home({"studio", 42, {}, {}}, catalogs()).devices.size() == 7);
  CHECK(generate_home({"family_house", 42, {}, {}}, catalogs()).devices.size() == 41);
  CHECK(generate_home({"mansion", 42, {}, {}}, catalogs()).devices.size() == 97);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    CHECK(generate_home({"mansion", seed, {}, {}}, catalogs()).devices.size() == 97);
}

TEST_CASE("place_devices: expected count is linear in room area") {
  const auto& c = catalogs();
  ResidenceTemplate t;
  t.name = "probe";
  t.room_count = 1;
  t.device_density_bounds = {0.0, 1000.0};
  t.room_type_distribution = {{"kitchen", 1.0}};

  // Independent expectation: sum over categories of lambda_c * area * compat.
  auto expected = [&](double area) {
    double m = 0.0;
    for (const auto& cat : c.categories) m += cat.base_density * area * c.compat.at(cat.id, "kitchen");
    return m;
  };
  auto empirical = [&](double area) {
    Room room{"room_01", "kitchen", area, {}, {}, 4};
    t.floor_area = area;
    auto rng = derive_stream(1234, "placement");
    double total = 0.0;
    for (int i = 0; i < 1000; ++i) total += static_cast<double>(place_devices({room}, t, c, c.compat, rng).size());
    return total / 1000.0;
  };
  const double m1 = empirical(20.0);
  const double m2 = empirical(40.0);
  CHECK(m1 == doctest::Approx(expected(20.0)).epsilon(0.05));
  CHECK(m2 == doctest::Approx(expected(40.0)).epsilon(0.05));
  CHECK(m2 / m1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("build_network: single device is its own hub") {
  std::vector<DeviceInstance> devices{{"dev_001", "motion_sensor", "room_01", ""}};
  const auto net = build_network(devices, catalogs());
  REQUIRE(net.hubs.size() == 1);
  CHECK(net.hubs.begin()->second == "dev_001");
  CHECK(net.adjacency.at("dev_001").empty());
  CHECK_FALSE(devices[0].network_address.empty());
}

TEST_CASE("build_network: two families get two hubs and stay connected") {
  const auto& c = catalogs();
  std::vector<DeviceInstance> devices{{"dev_001", "motion_sensor", "room_01", ""},
                                      {"dev_002", "smart_speaker", "room_01", ""},
                                      {"dev_003", "motion_sensor", "room_01", ""}};
  REQUIRE(c.family_of(c.device("motion_sensor").protocols.front()) !=
          c.family_of(c.device("smart_speaker").protocols.front()));
  const auto net = build_network(devices, c);
  CHECK(net.hubs.size() >= 2);
  CHECK(graph_connected(net.adjacency));
}

TEST_CASE("build_network: generated homes are connected with one hub per family") {
  const auto& c = catalogs();
  for (const char* name : {"studio", "family_house", "mansion"}) {
    const auto home = generate_home({name, 42, {}, {}}, c);
    CHECK(home.network.size() == home.devices.size());
    CHECK(graph_connected(home.network));
    std::set<std::string> families;
    std::set<std::string> addresses;
    for (const auto& d : home.devices) {
      const auto& fam = c.family_of(c.device(d.type_name).protocols.front());
      families.insert(fam);
      CHECK(addresses.insert(d.network_address).second);
      // Each device is its family's hub or links to it directly.
      const auto& hub = home.hubs.at(fam);
      const auto& peers = home.network.at(d.id);
      CHECK((d.id == hub || std::find(peers.begin(), peers.end(), hub) != peers.end()));
    }
    CHECK(families.size() == home.hubs.size());
  }
}

TEST_CASE("generate_home: determinism and seed sensitivity") {
  const auto a = generate_home({"studio", 42, {}, {}}, catalogs());
  const auto b = generate_home({"studio", 42, {}, {}}, catalogs());
  const auto c = generate_home({"studio", 43, {}, {}}, catalogs());
  CHECK(canonical_dump(nlohmann::json(a)) == canonical_dump(nlohmann::json(b)));
  CHECK(canonical_dump(nlohmann::json(a)) != canonical_dump(nlohmann::json(c)));
}

TEST_CASE("generate_home: evaluated templates") {
  const auto m = generate_home({"mansion", 42, {}, {}}, catalogs());
  CHECK(m.rooms.size() == 21);
  CHECK(m.devices.size() == 97);
  CHECK(m.inhabitants.size() == 6);
  const auto f = generate_home({"family_house", 42, {}, {}}, catalogs());
  CHECK(f.rooms.size() == 13);
  CHECK(f.devices.size() == 41);
  CHECK(f.inhabitants.size() == 4);
}

TEST_CASE("generate_home: output always validates") {
  for (const auto& t : catalogs().templates) {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xFFFFFFFFFFFFFFFFULL}) {
      const auto home = generate_home({t.name, seed, {}, {}}, catalogs());
      const auto v = validate_home(home, &catalogs());
      CHECK_MESSAGE(v.empty(), t.name << " seed " << seed << ": " << (v.empty() ? "" : v[0].message));
    }
  }
}

TEST_CASE("room layout is independent of the placement stream") {
  // Rooms come from their own salted stream, so consuming placement draws never moves them.
  const auto t = select_template({"family_house", 42, {}, {}}, catalogs());
  auto r1 = derive_stream(42, "rooms");
  const auto rooms = instantiate_rooms(t, catalogs(), r1);
  const auto home = generate_home({"family_house", 42, {}, 1.5}, catalogs());
  CHECK(home.rooms == rooms);
}
