#include "homesim/core/json_io.hpp"

#include <cmath>

#include "homesim/core/catalog.hpp"
#include "homesim/core/error.hpp"

namespace homesim {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void to_json(json& j, Protocol p) { j = std::string(to_string(p)); }
void from_json(const json& j, Protocol& p) { p = parse_protocol(j.get<std::string>()); }
void to_json(json& j, InhabitantKind k) { j = std::string(to_string(k)); }
void from_json(const json& j, InhabitantKind& k) { k = parse_inhabitant_kind(j.get<std::string>()); }
void to_json(json& j, AttackPhase p) { j = std::string(to_string(p)); }
void from_json(const json& j, AttackPhase& p) { p = parse_attack_phase(j.get<std::string>()); }

void to_json(json& j, const ResidenceTemplate& t) {
  j = json{{"name", t.name},
           {"display_name", t.display_name},
           {"room_count", t.room_count},
           {"floor_area", t.floor_area},
           {"device_density_bounds", {t.device_density_bounds.first, t.device_density_bounds.second}},
           {"room_type_distribution", t.room_type_distribution},
           {"default_inhabitants", t.default_inhabitants},
           {"inhabitant_kinds", t.inhabitant_kinds}};
  put_optional(j, "device_count", t.pinned_device_count);
}

void from_json(const json& j, ResidenceTemplate& t) {
  j.at("name").get_to(t.name);
  j.at("display_name").get_to(t.display_name);
  j.at("room_count").get_to(t.room_count);
  j.at("floor_area").get_to(t.floor_area);
  t.device_density_bounds = {j.at("device_density_bounds").at(0).get<double>(),
                             j.at("device_density_bounds").at(1).get<double>()};
  j.at("room_type_distribution").get_to(t.room_type_distribution);
  j.at("default_inhabitants").get_to(t.default_inhabitants);
  j.at("inhabitant_kinds").get_to(t.inhabitant_kinds);
  t.pinned_device_count = get_optional<int>(j, "device_count");
}

void to_json(json& j, const Room& r) {
  j = json{{"id", r.id},
           {"room_type", r.room_type},
           {"area", r.area},
           {"coordinates", {r.coordinates.x, r.coordinates.y}},
           {"adjacency", r.adjacency},
           {"capacity", r.capacity}};
}

void from_json(const json& j, Room& r) {
  j.at("id").get_to(r.id);
  j.at("room_type").get_to(r.room_type);
  j.at("area").get_to(r.area);
  r.coordinates = {j.at("coordinates").at(0).get<double>(), j.at("coordinates").at(1).get<double>()};
  j.at("adjacency").get_to(r.adjacency);
  j.at("capacity").get_to(r.capacity);
}

void to_json(json& j, const DeviceInstance& d) {
  j = json{{"id", d.id},
           {"type", d.type_name},
           {"room", d.room_id},
           {"network_address", d.network_address}};
}

void from_json(const json& j, DeviceInstance& d) {
  j.at("id").get_to(d.id);
  j.at("type").get_to(d.type_name);
  j.at("room").get_to(d.room_id);
  j.at("network_address").get_to(d.network_address);
}

void to_json(json& j, const Schedule& s) {
  j = json{{"wake", format_clock(s.wake_minute)},
           {"sleep", format_clock(s.sleep_minute)},
           {"work_from_home", s.work_from_home}};
  if (s.work_minutes)
    j["work"] = {format_clock(s.work_minutes->first), format_clock(s.work_minutes->second)};
  else
    j["work"] = nullptr;
}

void from_json(const json& j, Schedule& s) {
  s.wake_minute = parse_clock(j.at("wake").get<std::string>());
  s.sleep_minute = parse_clock(j.at("sleep").get<std::string>());
  s.work_from_home = j.value("work_from_home", false);
  const auto& work = j.at("work");
  if (work.is_null()) {
    s.work_minutes.reset();
  } else {
    s.work_minutes = std::pair{parse_clock(work.at(0).get<std::string>()),
                               parse_clock(work.at(1).get<std::string>())};
  }
}

void to_json(json& j, const InhabitantProfile& p) {
  j = json{{"id", p.id},
           {"kind", p.kind},
           {"schedule", p.schedule},
           {"tech_savviness", p.tech_savviness},
           {"variation_sigma", p.variation_sigma}};
}

void from_json(const json& j, InhabitantProfile& p) {
  j.at("id").get_to(p.id);
  j.at("kind").get_to(p.kind);
  j.at("schedule").get_to(p.schedule);
  j.at("tech_savviness").get_to(p.tech_savviness);
  p.variation_sigma = j.value("variation_sigma", 0.1);
}

void to_json(json& j, const TransitionMatrix& m) {
  j = json::array();
  for (std::size_t r = 0; r < m.size; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.size; ++c) row.push_back(m.at(r, c));
    j.push_back(std::move(row));
  }
}

void from_json(const json& j, TransitionMatrix& m) {
  m.size = j.size();
  m.values.assign(m.size * m.size, 0.0);
  for (std::size_t r = 0; r < m.size; ++r) {
    if (j[r].size() != m.size) throw ValidationError("transition matrix must be square");
    for (std::size_t c = 0; c < m.size; ++c) m.at(r, c) = j[r][c].get<double>();
  }
}

void to_json(json& j, const BehaviorParams& b) {
  json matrices = json::object();
  for (const auto& [kind, per_period] : b.matrices) {
    json by_period = json::object();
    for (std::size_t p = 0; p < kPeriodCount; ++p)
      by_period[std::string(to_string(static_cast<DiurnalPeriod>(p)))] = per_period[p];
    matrices[std::string(to_string(kind))] = std::move(by_period);
  }
  json temporal = json::object();
  for (std::size_t p = 0; p < kPeriodCount; ++p)
    temporal[std::string(to_string(static_cast<DiurnalPeriod>(p)))] = b.temporal_factor[p];
  j = json{{"activities", b.activities},
           {"matrices", std::move(matrices)},
           {"temporal_factor", std::move(temporal)},
           {"tech_floor", b.tech_floor},
           {"tech_slope", b.tech_slope},
           {"tick_seconds", b.tick_seconds},
           {"presence_slot_minutes", b.presence_slot_minutes}};
}

void from_json(const json& j, BehaviorParams& b) {
  j.at("activities").get_to(b.activities);
  b.matrices.clear();
  for (const auto& [kind, by_period] : j.at("matrices").items()) {
    auto& slot = b.matrices[parse_inhabitant_kind(kind)];
    for (const auto& [period, m] : by_period.items())
      slot[static_cast<std::size_t>(parse_diurnal_period(period))] = m.get<TransitionMatrix>();
  }
  for (const auto& [period, f] : j.at("temporal_factor").items())
    b.temporal_factor[static_cast<std::size_t>(parse_diurnal_period(period))] = f.get<double>();
  j.at("tech_floor").get_to(b.tech_floor);
  j.at("tech_slope").get_to(b.tech_slope);
  j.at("tick_seconds").get_to(b.tick_seconds);
  j.at("presence_slot_minutes").get_to(b.presence_slot_minutes);
}

void to_json(json& j, const HomeConfiguration& c) {
  j = json{{"template", c.residence},
           {"rooms", c.rooms},
           {"devices", c.devices},
           {"network", {{"adjacency", c.network}, {"hubs", c.hubs}}},
           {"inhabitants", c.inhabitants},
           {"behavior", c.behavior},
           {"seed", c.seed},
           {"catalog_version", c.catalog_version}};
}

void from_json(const json& j, HomeConfiguration& c) {
  j.at("template").get_to(c.residence);
  j.at("rooms").get_to(c.rooms);
  j.at("devices").get_to(c.devices);
  j.at("network").at("adjacency").get_to(c.network);
  j.at("network").at("hubs").get_to(c.hubs);
  j.at("inhabitants").get_to(c.inhabitants);
  j.at("behavior").get_to(c.behavior);
  j.at("seed").get_to(c.seed);
  j.at("catalog_version").get_to(c.catalog_version);
}

void to_json(json& j, const Label& l) {
  j = json{{"verdict", std::string(to_string(l.verdict))},
           {"confidence", l.confidence},
           {"taxonomy_path", l.taxonomy_path}};
  put_optional(j, "threat_type", l.threat_type);
  put_optional(j, "technique", l.attack_technique);
}

void from_json(const json& j, Label& l) {
  l.verdict = parse_verdict(j.at("verdict").get<std::string>());
  j.at("confidence").get_to(l.confidence);
  j.at("taxonomy_path").get_to(l.taxonomy_path);
  l.threat_type = get_optional<std::string>(j, "threat_type");
  l.attack_technique = get_optional<std::string>(j, "technique");
}

void to_json(json& j, const PayloadValue& v) {
  std::visit([&j](const auto& x) { j = x; }, v);
}

void from_json(const json& j, PayloadValue& v) {
  if (j.is_boolean()) v = j.get<bool>();
  else if (j.is_number_integer()) v = j.get<std::int64_t>();
  else if (j.is_number()) v = j.get<double>();
  else if (j.is_string()) v = j.get<std::string>();
  else throw ValidationError("payload values must be scalars");
}

void to_json(json& j, const SimulationEvent& e) {
  j = json{{"timestamp", millis_to_seconds(e.timestamp)},
           {"device_id", e.device_id},
           {"device_type", e.device_type},
           {"category", e.category},
           {"room", e.room},
           {"protocol", e.protocol},
           {"event_kind", std::string(to_string(e.kind))},
           {"payload", e.payload},
           {"label", e.label}};
  put_optional(j, "inhabitant", e.inhabitant);
  put_optional(j, "scenario_id", e.scenario_id);
  if (e.phase) j["phase"] = *e.phase;
}

void from_json(const json& j, SimulationEvent& e) {
  e.timestamp = seconds_to_millis(j.at("timestamp").get<double>());
  j.at("device_id").get_to(e.device_id);
  j.at("device_type").get_to(e.device_type);
  j.at("category").get_to(e.category);
  j.at("room").get_to(e.room);
  j.at("protocol").get_to(e.protocol);
  e.kind = parse_event_kind(j.at("event_kind").get<std::string>());
  j.at("payload").get_to(e.payload);
  j.at("label").get_to(e.label);
  e.inhabitant = get_optional<std::string>(j, "inhabitant");
  e.scenario_id = get_optional<std::string>(j, "scenario_id");
  e.phase = get_optional<AttackPhase>(j, "phase");
}

double millis_to_seconds(SimMillis t) { return static_cast<double>(t) / 1000.0; }

SimMillis seconds_to_millis(double seconds) {
  return static_cast<SimMillis>(std::llround(seconds * 1000.0));
}

std::string canonical_dump(const json& j) { return j.dump(); }

}  // namespace homesim
