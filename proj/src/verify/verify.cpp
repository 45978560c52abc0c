#include "homesim/verify/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "homesim/core/error.hpp"
#include "homesim/core/event_table.hpp"
#include "homesim/core/json_io.hpp"
#include "homesim/core/validate.hpp"
#include "homesim/runtime/digest.hpp"

namespace homesim::verify {

namespace {

using nlohmann::json;

// Business limits for a single run.
constexpr SimMillis kMaxDuration = 7 * kMillisPerDay;
constexpr std::size_t kMaxScenarios = 32;

class Findings {
 public:
  void error(std::string message, std::string location = {}) {
    out_.push_back({Severity::kError, std::move(message), std::move(location)});
  }
  void warning(std::string message, std::string location = {}) {
    out_.push_back({Severity::kWarning, std::move(message), std::move(location)});
  }
  void info(std::string message, std::string location = {}) {
    out_.push_back({Severity::kInfo, std::move(message), std::move(location)});
  }
  void append(const std::vector<Finding>& f) { out_.insert(out_.end(), f.begin(), f.end()); }
  std::vector<Finding> take() { return std::move(out_); }

 private:
  std::vector<Finding> out_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string clock_of(SimMillis t) { return fmt(millis_to_seconds(t)) + " s"; }

const std::set<std::string>& physical_codes() {
  static const std::set<std::string> codes{"room-area", "room-capacity", "density-bounds"};
  return codes;
}

const std::set<std::string>& catalog_codes() {
  static const std::set<std::string> codes{"unknown-room-type", "unknown-device-type"};
  return codes;
}

const Catalogs& need_catalogs(const Context& ctx, Stage stage) {
  if (!ctx.catalogs)
    throw ValidationError("the " + std::string(stage_name(stage)) + " stage needs the device catalogs");
  return *ctx.catalogs;
}

bool is_stub_or_unknown(const Catalogs& c, const std::string& threat_type, Findings& f, const std::string& where) {
  const auto& list = c.threats.threats;
  auto it = std::find_if(list.begin(), list.end(), [&](const ThreatSpec& s) { return s.threat_type == threat_type; });
  if (it == list.end()) {
    f.error("threat type '" + threat_type + "' is not in the registry", where);
    return true;
  }
  if (it->stub) {
    f.error("threat type '" + threat_type + "' is a catalog stub with no attack model", where);
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Raw JSON shape checks

void expect(const json& j, const char* key, json::value_t type, Findings& f, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) {
    f.error(std::string("missing field '") + key + "'", where);
    return;
  }
  const bool ok = type == json::value_t::number_float ? it->is_number()
                  : type == json::value_t::number_integer ? it->is_number_integer()
                                                          : it->type() == type;
  if (!ok) f.error(std::string("field '") + key + "' has the wrong type", where);
}

std::string item_where(const json& item, const std::string& fallback) {
  auto it = item.find("id");
  return it != item.end() && it->is_string() ? it->get<std::string>() : fallback;
}

std::vector<Finding> home_shape(const json& j) {
  Findings f;
  using T = json::value_t;
  expect(j, "template", T::object, f, "home");
  expect(j, "rooms", T::array, f, "home");
  expect(j, "devices", T::array, f, "home");
  expect(j, "network", T::object, f, "home");
  expect(j, "inhabitants", T::array, f, "home");
  expect(j, "behavior", T::object, f, "home");
  expect(j, "seed", T::number_integer, f, "home");
  expect(j, "catalog_version", T::string, f, "home");
  if (j.contains("network") && j["network"].is_object()) {
    expect(j["network"], "adjacency", T::object, f, "network");
    expect(j["network"], "hubs", T::object, f, "network");
  }
  if (j.contains("rooms") && j["rooms"].is_array())
    for (std::size_t i = 0; i < j["rooms"].size(); ++i) {
      const auto& r = j["rooms"][i];
      const auto where = item_where(r, "rooms[" + std::to_string(i) + "]");
      if (!r.is_object()) {
        f.error("room entry is not an object", where);
        continue;
      }
      expect(r, "id", T::string, f, where);
      expect(r, "room_type", T::string, f, where);
      expect(r, "area", T::number_float, f, where);
      expect(r, "capacity", T::number_integer, f, where);
      expect(r, "adjacency", T::array, f, where);
      expect(r, "coordinates", T::array, f, where);
    }
  if (j.contains("devices") && j["devices"].is_array())
    for (std::size_t i = 0; i < j["devices"].size(); ++i) {
      const auto& d = j["devices"][i];
      const auto where = item_where(d, "devices[" + std::to_string(i) + "]");
      if (!d.is_object()) {
        f.error("device entry is not an object", where);
        continue;
      }
      expect(d, "id", T::string, f, where);
      expect(d, "type", T::string, f, where);
      expect(d, "room", T::string, f, where);
      expect(d, "network_address", T::string, f, where);
    }
  return f.take();
}

std::vector<Finding> scenario_shape(const json& j) {
  Findings f;
  using T = json::value_t;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& s = j[i];
    const auto where = item_where(s, "scenarios[" + std::to_string(i) + "]");
    if (!s.is_object()) {
      f.error("scenario entry is not an object", where);
      continue;
    }
    expect(s, "id", T::string, f, where);
    expect(s, "threat_type", T::string, f, where);
    expect(s, "threat_category", T::string, f, where);
    expect(s, "protocol", T::string, f, where);
    expect(s, "targets", T::array, f, where);
    expect(s, "window", T::object, f, where);
    expect(s, "gamma", T::number_float, f, where);
    expect(s, "effective_rate", T::number_float, f, where);
    expect(s, "effective_stealth", T::number_float, f, where);
    expect(s, "phases", T::array, f, where);
  }
  return f.take();
}

template <class T>
std::optional<T> typed(const json& j, Findings& f, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const std::exception& e) {
    f.error(what + " does not match its schema: " + e.what(), what);
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Home checks

void home_violations(const HomeConfiguration& home, const Catalogs* catalogs, const std::set<std::string>& codes,
                     bool include, Findings& f) {
  for (const auto& v : validate_home(home, catalogs)) {
    const bool in = codes.count(v.code) > 0;
    if (in == include) f.error(v.message + " [" + v.code + "]", v.location);
  }
}

void home_schema(const HomeConfiguration& home, Findings& f) {
  std::set<std::string> not_schema = physical_codes();
  not_schema.insert(catalog_codes().begin(), catalog_codes().end());
  home_violations(home, nullptr, not_schema, false, f);
  if (home.rooms.empty()) f.error("home has no rooms", "home");
}

void home_physical(const HomeConfiguration& home, Findings& f) {
  home_violations(home, nullptr, physical_codes(), true, f);
  double area = 0.0;
  int capacity = 0;
  for (const auto& r : home.rooms) {
    area += r.area;
    capacity += r.capacity;
  }
  const double target = home.residence.floor_area;
  if (target > 0.0 && std::abs(area - target) > 0.01 * target)
    f.warning("room areas sum to " + fmt(area) + " m2, template floor area is " + fmt(target) + " m2", "home");
  if (static_cast<int>(home.inhabitants.size()) > capacity)
    f.error(std::to_string(home.inhabitants.size()) + " inhabitants exceed the total room capacity of " +
                std::to_string(capacity),
            "home");
}

void home_semantic(const HomeConfiguration& home, const Catalogs& c, Findings& f) {
  for (const auto& v : validate_home(home, &c))
    if (catalog_codes().count(v.code)) f.error(v.message + " [" + v.code + "]", v.location);
  std::map<std::string, const Room*> rooms;
  for (const auto& r : home.rooms) rooms[r.id] = &r;
  for (const auto& d : home.devices) {
    if (!c.has_device(d.type_name)) continue;
    auto r = rooms.find(d.room_id);
    if (r == rooms.end() || !c.has_room_type(r->second->room_type)) continue;
    const auto& cat = c.device(d.type_name).category;
    if (!(c.compat.at(cat, r->second->room_type) > 0.0))
      f.error("category '" + cat + "' is incompatible with room type '" + r->second->room_type + "'", d.id);
  }
  std::map<std::string, const DeviceInstance*> devices;
  for (const auto& d : home.devices) devices[d.id] = &d;
  for (const auto& [family, hub] : home.hubs) {
    auto d = devices.find(hub);
    if (d == devices.end() || !c.has_device(d->second->type_name)) continue;
    const auto& protos = c.device(d->second->type_name).protocols;
    const bool speaks = std::any_of(protos.begin(), protos.end(), [&](Protocol p) { return c.family_of(p) == family; });
    if (!speaks) f.error("hub for the " + family + " family speaks none of its protocols", hub);
  }
}

void home_security(const HomeConfiguration& home, const Catalogs& c, Findings& f) {
  std::map<std::string, std::vector<std::string>> by_address;
  for (const auto& d : home.devices) {
    if (d.network_address.empty()) f.error("device has no network address", d.id);
    else by_address[d.network_address].push_back(d.id);
  }
  for (const auto& [addr, ids] : by_address)
    if (ids.size() > 1) f.error("network address " + addr + " is shared by " + std::to_string(ids.size()) + " devices", ids[1]);
  for (const auto& d : home.devices) {
    if (!c.has_device(d.type_name)) continue;
    const auto& family = c.family_of(c.device(d.type_name).protocols.front());
    auto hub = home.hubs.find(family);
    if (hub == home.hubs.end()) {
      f.error("no hub serves the " + family + " family", d.id);
      continue;
    }
    if (hub->second == d.id) continue;
    auto peers = home.network.find(d.id);
    if (peers == home.network.end() ||
        std::find(peers->second.begin(), peers->second.end(), hub->second) == peers->second.end())
      f.error("device is not attached to its " + family + " hub " + hub->second, d.id);
  }
}

void home_business(const HomeConfiguration& home, const Catalogs& c, Findings& f) {
  const auto& t = home.residence;
  if (!c.find_template(t.name)) f.error("template '" + t.name + "' is not in the catalog", "home");
  if (static_cast<int>(home.rooms.size()) != t.room_count)
    f.error("home has " + std::to_string(home.rooms.size()) + " rooms, template pins " + std::to_string(t.room_count),
            "home");
  if (t.pinned_device_count && static_cast<int>(home.devices.size()) != *t.pinned_device_count)
    f.error("home has " + std::to_string(home.devices.size()) + " devices, template pins " +
                std::to_string(*t.pinned_device_count),
            "home");
  if (static_cast<int>(home.inhabitants.size()) != t.default_inhabitants)
    f.warning("home has " + std::to_string(home.inhabitants.size()) + " inhabitants, template default is " +
                  std::to_string(t.default_inhabitants),
              "home");
  if (!home.catalog_version.empty() && home.catalog_version != c.version)
    f.warning("home was generated with catalog " + home.catalog_version + ", checking against " + c.version, "home");
}

// ---------------------------------------------------------------------------
// Parameter checks

void params_schema(const SimulationParameters& p, Findings& f) {
  if (p.protocols.empty()) f.error("no protocol is enabled", "protocols");
  if (std::set<Protocol>(p.protocols.begin(), p.protocols.end()).size() != p.protocols.size())
    f.error("protocol list repeats an entry", "protocols");
  for (std::size_t i = 0; i < p.threats.size(); ++i) {
    const auto& t = p.threats[i];
    const auto where = "threats[" + std::to_string(i) + "]";
    if (t.threat.empty()) f.error("threat request has no threat type", where);
    if (t.window && t.window->start >= t.window->end) f.error("attack window is empty or reversed", where);
    if (t.targets && t.targets->empty()) f.error("explicit target list is empty", where);
  }
  if (p.residents) {
    std::set<std::string> ids;
    for (const auto& r : *p.residents) {
      if (r.id.empty()) f.error("resident has no id", "residents");
      else if (!ids.insert(r.id).second) f.error("resident id repeated", r.id);
    }
  }
}

void params_physical(const SimulationParameters& p, Findings& f) {
  if (p.duration <= 0) f.error("duration must be positive", "duration");
  if (!(p.compression >= 1.0)) f.error("time compression must be >= 1", "compression");
  if (p.home.room_count_multiplier && !(*p.home.room_count_multiplier > 0.0))
    f.error("room count multiplier must be positive", "home");
  if (p.home.density_multiplier && !(*p.home.density_multiplier > 0.0))
    f.error("density multiplier must be positive", "home");
  if (!p.residents) return;
  for (const auto& r : *p.residents) {
    if (r.tech_savviness < 0.0 || r.tech_savviness > 1.0) f.error("tech savviness outside [0, 1]", r.id);
    if (r.variation_sigma < 0.0) f.error("variation sigma must be >= 0", r.id);
    const auto in_day = [](int m) { return m >= 0 && m < 24 * 60; };
    if (!in_day(r.schedule.wake_minute) || !in_day(r.schedule.sleep_minute))
      f.error("schedule minute outside the day", r.id);
    if (r.schedule.wake_minute == r.schedule.sleep_minute) f.error("wake time equals sleep time", r.id);
  }
}

void params_semantic(const SimulationParameters& p, const Catalogs& c, Findings& f) {
  if (!c.find_template(p.home.template_name))
    f.error("template '" + p.home.template_name + "' is not in the catalog", "home");
  if (p.taxonomy_level < 1 || p.taxonomy_level > kMaxTaxonomyLevel)
    f.error("taxonomy level " + std::to_string(p.taxonomy_level) + " outside [1, 7]", "taxonomy_level");
  for (std::size_t i = 0; i < p.threats.size(); ++i) {
    const auto where = "threats[" + std::to_string(i) + "]";
    if (is_stub_or_unknown(c, p.threats[i].threat, f, where)) continue;
    const auto proto = c.threats.find(p.threats[i].threat).protocol;
    if (std::find(p.protocols.begin(), p.protocols.end(), proto) == p.protocols.end())
      f.error("threat runs over " + std::string(to_string(proto)) + ", which is not enabled", where);
  }
}

void params_security(const SimulationParameters& p, const Catalogs& c, Findings& f) {
  for (std::size_t i = 0; i < p.threats.size(); ++i) {
    const auto& t = p.threats[i];
    const auto where = "threats[" + std::to_string(i) + "]";
    if (!(t.gamma >= 0.0 && t.gamma <= 1.0)) f.error("intensity gamma " + fmt(t.gamma) + " outside [0, 1]", where);
    const double theta = t.theta_vuln.value_or(c.threats.theta_vuln);
    if (!(theta >= 0.0 && theta <= 1.0)) f.error("vulnerability threshold " + fmt(theta) + " outside [0, 1]", where);
    else if (theta >= 1.0 && !t.targets) f.warning("vulnerability threshold 1 selects no target", where);
    const auto w = t.window.value_or(default_attack_window(p.duration));
    if (w.start < 0 || w.end > p.duration)
      f.error("attack window [" + clock_of(w.start) + ", " + clock_of(w.end) + ") leaves the run horizon", where);
    const auto& list = c.threats.threats;
    auto spec = std::find_if(list.begin(), list.end(), [&](const ThreatSpec& s) { return s.threat_type == t.threat; });
    if (spec != list.end() && !spec->stub && w.length() < static_cast<SimMillis>(spec->phases.size()))
      f.error("attack window too short for " + std::to_string(spec->phases.size()) + " phases", where);
  }
}

void params_business(const SimulationParameters& p, Findings& f) {
  if (p.duration > kMaxDuration)
    f.error("duration " + clock_of(p.duration) + " exceeds the 7-day limit", "duration");
  if (p.threats.size() > kMaxScenarios)
    f.error(std::to_string(p.threats.size()) + " threat requests exceed the limit of " + std::to_string(kMaxScenarios),
            "threats");
}

// ---------------------------------------------------------------------------
// Scenario checks

void scenarios_schema(const std::vector<threat::AttackScenario>& list, Findings& f) {
  std::set<std::string> ids;
  for (const auto& s : list) {
    if (!ids.insert(s.id).second) f.error("scenario id repeated", s.id);
    if (s.window.start >= s.window.end) f.error("scenario window is empty or reversed", s.id);
    if (s.phases.empty()) f.error("scenario has no phases", s.id);
    for (std::size_t i = 0; i < s.phases.size(); ++i) {
      const auto& ph = s.phases[i].window;
      if (ph.start >= ph.end) f.error("phase " + std::string(to_string(s.phases[i].phase)) + " window is empty", s.id);
      if (i > 0 && ph.start != s.phases[i - 1].window.end)
        f.error("phase windows are not contiguous", s.id);
      if (i > 0 && phase_index(s.phases[i].phase) <= phase_index(s.phases[i - 1].phase))
        f.error("phases are not in kill-chain order", s.id);
    }
    if (!s.phases.empty() &&
        (s.phases.front().window.start != s.window.start || s.phases.back().window.end != s.window.end))
      f.error("phase windows do not cover the scenario window", s.id);
  }
}

void scenarios_physical(const std::vector<threat::AttackScenario>& list, Findings& f) {
  for (const auto& s : list) {
    if (s.window.start < 0) f.error("scenario window starts before time zero", s.id);
    if (s.intensity.rate < 0.0) f.error("effective rate is negative", s.id);
    if (s.intensity.stealth < 0.0 || s.intensity.stealth > 1.0) f.error("effective stealth outside [0, 1]", s.id);
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      const auto& e = s.events[i];
      if (!s.window.contains(e.timestamp)) f.error("planned event at " + clock_of(e.timestamp) + " is outside the window", s.id);
      const auto* pw = s.phase_window(e.phase);
      if (!pw) f.error("planned event belongs to a phase the scenario lacks", s.id);
      else if (!pw->window.contains(e.timestamp)) f.error("planned event is outside its phase window", s.id);
      if (i > 0 && e.timestamp < s.events[i - 1].timestamp) f.error("planned events are out of order", s.id);
    }
  }
}

void scenarios_semantic(const std::vector<threat::AttackScenario>& list, const Catalogs& c,
                        const HomeConfiguration* home, Findings& f) {
  std::set<std::string> devices;
  if (home)
    for (const auto& d : home->devices) devices.insert(d.id);
  for (const auto& s : list) {
    if (is_stub_or_unknown(c, s.threat_type, f, s.id)) continue;
    const auto& spec = c.threats.find(s.threat_type);
    if (s.threat_category != spec.category)
      f.error("threat category '" + s.threat_category + "' disagrees with the registry ('" + spec.category + "')", s.id);
    if (s.protocol != spec.protocol)
      f.error("protocol " + std::string(to_string(s.protocol)) + " disagrees with the registry", s.id);
    if (s.phases.size() != spec.phases.size()) {
      f.error("scenario has " + std::to_string(s.phases.size()) + " phases, registry declares " +
                  std::to_string(spec.phases.size()),
              s.id);
    } else {
      for (std::size_t i = 0; i < s.phases.size(); ++i) {
        if (s.phases[i].phase != spec.phases[i].phase) f.error("phase sequence differs from the registry", s.id);
        else if (s.phases[i].technique != spec.phases[i].technique)
          f.error("phase " + std::string(to_string(s.phases[i].phase)) + " technique " + s.phases[i].technique +
                      " differs from the registry",
                  s.id);
      }
    }
    if (home)
      for (const auto& t : s.targets)
        if (!devices.count(t)) f.error("target '" + t + "' is not a device of the home", s.id);
  }
}

void scenarios_security(const std::vector<threat::AttackScenario>& list, const Catalogs& c,
                        std::optional<SimMillis> horizon, Findings& f) {
  for (const auto& s : list) {
    if (!(s.gamma >= 0.0 && s.gamma <= 1.0)) f.error("intensity gamma " + fmt(s.gamma) + " outside [0, 1]", s.id);
    if (!(s.theta_vuln >= 0.0 && s.theta_vuln <= 1.0))
      f.error("vulnerability threshold " + fmt(s.theta_vuln) + " outside [0, 1]", s.id);
    if (horizon && (s.window.start < 0 || s.window.end > *horizon))
      f.error("attack window [" + clock_of(s.window.start) + ", " + clock_of(s.window.end) +
                  ") leaves the run horizon of " + clock_of(*horizon),
              s.id);
    if (s.noop != s.targets.empty()) f.error("no-op flag disagrees with the target list", s.id);
    const auto& list_specs = c.threats.threats;
    auto spec = std::find_if(list_specs.begin(), list_specs.end(),
                             [&](const ThreatSpec& t) { return t.threat_type == s.threat_type; });
    if (spec == list_specs.end() || spec->stub || !(s.gamma >= 0.0 && s.gamma <= 1.0)) continue;
    const auto expected = threat::modulate_intensity(*spec, s.gamma, c.threats.k_rate, c.threats.k_stealth);
    if (std::abs(expected.rate - s.intensity.rate) > 1e-9 || std::abs(expected.stealth - s.intensity.stealth) > 1e-9)
      f.error("effective rate/stealth do not follow from gamma " + fmt(s.gamma), s.id);
  }
}

void scenarios_business(const std::vector<threat::AttackScenario>& list, Findings& f) {
  if (list.size() > kMaxScenarios)
    f.error(std::to_string(list.size()) + " scenarios exceed the limit of " + std::to_string(kMaxScenarios), "scenarios");
  for (const auto& s : list)
    if (!s.noop && s.window.length() < kMillisPerMinute)
      f.warning("attack window shorter than one minute", s.id);
}

// ---------------------------------------------------------------------------
// Bundle-only checks

void events_checks(Stage stage, const Artifact& a, Findings& f) {
  if (!a.events) return;
  const auto& events = *a.events;
  std::set<std::string> scenario_ids;
  if (a.scenarios)
    for (const auto& s : *a.scenarios) scenario_ids.insert(s.id);
  switch (stage) {
    case Stage::kPhysical: {
      const SimMillis horizon = a.horizon.value_or(std::numeric_limits<SimMillis>::max());
      std::size_t outside = 0;
      for (const auto& e : events) outside += e.timestamp < 0 || e.timestamp >= horizon;
      if (outside) f.error(std::to_string(outside) + " events fall outside the run horizon", "events.jsonl");
      for (std::size_t i = 1; i < events.size(); ++i)
        if (event_order_less(events[i], events[i - 1])) {
          f.error("event log is not in time order", "events.jsonl");
          break;
        }
      break;
    }
    case Stage::kSemantic: {
      std::size_t unlabeled = 0, mismatched = 0, orphan = 0;
      for (const auto& e : events) {
        if (e.label.taxonomy_path.empty()) ++unlabeled;
        const bool attack = e.scenario_id && scenario_ids.count(*e.scenario_id);
        if (e.scenario_id && !scenario_ids.count(*e.scenario_id)) ++orphan;
        if (attack != (e.label.verdict == Verdict::kAttack)) ++mismatched;
      }
      if (unlabeled) f.error(std::to_string(unlabeled) + " events carry no label", "events.jsonl");
      if (mismatched) f.error(std::to_string(mismatched) + " labels disagree with their scenario stamp", "events.jsonl");
      if (orphan) f.warning(std::to_string(orphan) + " events name an unknown scenario", "events.jsonl");
      break;
    }
    case Stage::kBusiness: {
      if (!a.record) break;
      const auto attacks = static_cast<std::size_t>(std::count_if(
          events.begin(), events.end(), [](const SimulationEvent& e) { return e.label.verdict == Verdict::kAttack; }));
      if (a.record->event_count != events.size())
        f.error("record counts " + std::to_string(a.record->event_count) + " events, log holds " +
                    std::to_string(events.size()),
                "manifest.json");
      if (a.record->attack_event_count != attacks)
        f.error("record counts " + std::to_string(a.record->attack_event_count) + " attack events, log holds " +
                    std::to_string(attacks),
                "manifest.json");
      break;
    }
    default:
      break;
  }
}

// ---------------------------------------------------------------------------
// Factual stage

struct Claim {
  std::string subject;              // token that must appear in the evidence
  std::vector<std::string> support;  // any one of these must appear too; empty: subject alone
  std::string query;
  std::string location;
};

std::vector<Claim> claims_for(const Artifact& a, const Catalogs* c) {
  std::vector<Claim> out;
  if (a.home && c) {
    std::set<std::string> types;
    for (const auto& d : a.home->devices) types.insert(d.type_name);
    for (const auto& t : types) {
      if (!c->has_device(t)) continue;
      Claim claim{knowledge::tokenize(t).empty() ? t : knowledge::tokenize(t).front(), {}, t, t};
      for (Protocol p : c->device(t).protocols) {
        for (const auto& tok : knowledge::tokenize(to_string(p))) claim.support.push_back(tok);
        claim.query += " " + std::string(to_string(p));
      }
      out.push_back(std::move(claim));
    }
  }
  auto threat_claims = [&](const std::string& threat_type, const std::vector<std::string>& techniques,
                           const std::string& where) {
    Claim claim{threat_type, {}, threat_type, where};
    for (const auto& t : techniques) {
      for (const auto& tok : knowledge::tokenize(t)) claim.support.push_back(tok);
      claim.query += " " + t;
    }
    out.push_back(std::move(claim));
  };
  if (a.scenarios) {
    for (const auto& s : *a.scenarios) {
      std::vector<std::string> techniques;
      for (const auto& p : s.phases) techniques.push_back(p.technique);
      threat_claims(s.threat_type, techniques, s.id);
    }
  } else if (a.params && c) {
    for (std::size_t i = 0; i < a.params->threats.size(); ++i) {
      const auto& name = a.params->threats[i].threat;
      std::vector<std::string> techniques;
      for (const auto& spec : c->threats.threats)
        if (spec.threat_type == name)
          for (const auto& p : spec.phases) techniques.push_back(p.technique);
      threat_claims(name, techniques, "threats[" + std::to_string(i) + "]");
    }
  }
  return out;
}

void factual(const Artifact& a, const Context& ctx, Findings& f) {
  if (!ctx.kb) {
    f.info("skipped: no knowledge index attached", "factual");
    return;
  }
  if (ctx.kb->empty()) {
    f.warning("knowledge index is empty; no claim can be checked", "factual");
    return;
  }
  for (const auto& claim : claims_for(a, ctx.catalogs)) {
    const auto hits = ctx.kb->retrieve(claim.query, std::max<std::size_t>(1, ctx.factual_k));
    bool subject_seen = false, supported = false;
    for (const auto& h : hits) {
      const auto& toks = h.chunk->tokens;
      const bool has_subject = std::find(toks.begin(), toks.end(), claim.subject) != toks.end();
      subject_seen |= has_subject;
      if (has_subject && (claim.support.empty() ||
                          std::any_of(claim.support.begin(), claim.support.end(), [&](const std::string& s) {
                            return std::find(toks.begin(), toks.end(), s) != toks.end();
                          }))) {
        supported = true;
        break;
      }
    }
    if (supported) continue;
    if (subject_seen)
      f.warning("retrieved evidence mentions '" + claim.subject + "' but none of its claimed attributes", claim.location);
    else
      f.warning("no retrieved evidence for '" + claim.subject + "'", claim.location);
  }
}

void not_interpretable(const Artifact& a, Findings& f) {
  f.warning("skipped: " + std::string(artifact_kind_name(a.kind)) + " failed schema parsing", a.name);
}

bool interpretable(const Artifact& a) {
  switch (a.kind) {
    case ArtifactKind::kHome:
      return a.home.has_value();
    case ArtifactKind::kParameters:
      return a.params.has_value();
    case ArtifactKind::kScenarios:
      return a.scenarios.has_value();
    case ArtifactKind::kBundle:
      break;
  }
  return a.home && a.params && a.scenarios && a.events;
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kSchema:
      return "schema";
    case Stage::kPhysical:
      return "physical";
    case Stage::kSemantic:
      return "semantic";
    case Stage::kFactual:
      return "factual";
    case Stage::kSecurity:
      return "security";
    case Stage::kBusiness:
      break;
  }
  return "business";
}

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::kInfo:
      return "info";
    case Severity::kWarning:
      return "warning";
    case Severity::kError:
      break;
  }
  return "error";
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kApprove:
      return "approve";
    case Outcome::kReview:
      return "review";
    case Outcome::kReject:
      break;
  }
  return "reject";
}

std::string_view artifact_kind_name(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::kHome:
      return "home";
    case ArtifactKind::kParameters:
      return "parameters";
    case ArtifactKind::kScenarios:
      return "scenarios";
    case ArtifactKind::kBundle:
      break;
  }
  return "bundle";
}

double score_findings(std::span<const Finding> findings) {
  double errors = 0.0, warnings = 0.0;
  for (const auto& f : findings) {
    errors += f.severity == Severity::kError;
    warnings += f.severity == Severity::kWarning;
  }
  return std::max(0.0, 1.0 - kErrorPenalty * errors - kWarningPenalty * warnings);
}

double aggregate_confidence(std::span<const ValidatorReport> reports, const std::map<Stage, double>& weights) {
  std::map<Stage, double> scores;
  for (const auto& r : reports) {
    if (!(r.score >= 0.0 && r.score <= 1.0))
      throw ValidationError("stage " + std::string(stage_name(r.stage)) + " score outside [0, 1]");
    if (!scores.emplace(r.stage, r.score).second)
      throw ValidationError("stage " + std::string(stage_name(r.stage)) + " reported twice");
  }
  double conf = 1.0;
  for (Stage s : kStages) {
    auto it = scores.find(s);
    if (it == scores.end()) throw ValidationError("missing report for stage " + std::string(stage_name(s)));
    auto w = weights.find(s);
    const double weight = w == weights.end() ? 1.0 : w->second;
    if (!(weight >= 0.0)) throw ValidationError("stage weights must be non-negative");
    if (weight == 0.0) continue;
    if (it->second == 0.0) return 0.0;
    conf *= std::pow(it->second, weight);
  }
  return conf;
}

GateDecision gate(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) throw ValidationError("confidence outside [0, 1]");
  GateDecision d;
  d.confidence = confidence;
  if (confidence >= kApproveThreshold) {
    d.outcome = Outcome::kApprove;
    d.explanation = "confidence " + fmt(confidence) + " >= 0.85: approved";
  } else if (confidence >= kReviewThreshold) {
    d.outcome = Outcome::kReview;
    d.explanation = "confidence " + fmt(confidence) + " in [0.70, 0.85): needs human review";
  } else {
    d.outcome = Outcome::kReject;
    d.explanation = "confidence " + fmt(confidence) + " < 0.70: rejected";
  }
  return d;
}

GateDecision gate(double confidence, std::span<const ValidatorReport> reports) {
  auto d = gate(confidence);
  std::size_t listed = 0, total = 0;
  std::string detail;
  for (const auto& r : reports)
    for (const auto& f : r.findings) {
      if (f.severity == Severity::kInfo) continue;
      ++total;
      if (listed++ < 10)
        detail += "\n  [" + std::string(stage_name(r.stage)) + "] " + std::string(severity_name(f.severity)) + ": " +
                  f.message + (f.location.empty() ? "" : " (" + f.location + ")");
    }
  if (total > 10) detail += "\n  ... " + std::to_string(total - 10) + " more";
  d.explanation += detail;
  return d;
}

Artifact home_artifact(const HomeConfiguration& home) {
  Artifact a;
  a.kind = ArtifactKind::kHome;
  a.name = "home";
  a.home = home;
  return a;
}

Artifact parameters_artifact(const SimulationParameters& params) {
  Artifact a;
  a.kind = ArtifactKind::kParameters;
  a.name = "parameters";
  a.params = params;
  a.horizon = params.duration;
  return a;
}

Artifact scenarios_artifact(std::vector<threat::AttackScenario> scenarios, std::optional<SimMillis> horizon) {
  Artifact a;
  a.kind = ArtifactKind::kScenarios;
  a.name = "scenarios";
  a.scenarios = std::move(scenarios);
  a.horizon = horizon;
  return a;
}

Artifact bundle_artifact(const SimulationResult& r) {
  Artifact a;
  a.kind = ArtifactKind::kBundle;
  a.name = r.record.exp_id.empty() ? "bundle" : r.record.exp_id;
  a.home = r.home;
  a.params = r.record.params;
  a.scenarios = r.scenarios;
  a.events = r.events;
  a.record = r.record;
  a.horizon = r.record.params.duration;
  return a;
}

Artifact bundle_artifact(const Archive& archive) {
  Artifact a;
  a.kind = ArtifactKind::kBundle;
  a.name = archive.record.exp_id;
  a.record = archive.record;
  a.params = archive.record.params;
  a.horizon = archive.record.params.duration;
  Findings f;
  auto artifact = [&](const char* name) -> std::optional<json> {
    auto it = archive.artifacts.find(name);
    if (it == archive.artifacts.end()) {
      f.error(std::string("archive lacks ") + name, name);
      return std::nullopt;
    }
    try {
      return json::parse(it->second);
    } catch (const json::exception& e) {
      f.error(std::string(name) + " is not valid JSON: " + e.what(), name);
      return std::nullopt;
    }
  };
  if (auto j = artifact("config.json")) {
    auto shape = home_shape(*j);
    f.append(shape);
    if (shape.empty()) a.home = typed<HomeConfiguration>(*j, f, "config.json");
  }
  if (auto j = artifact("scenarios.json")) {
    if (!j->is_array()) {
      f.error("scenarios.json is not an array", "scenarios.json");
    } else {
      auto shape = scenario_shape(*j);
      f.append(shape);
      if (shape.empty()) a.scenarios = typed<std::vector<threat::AttackScenario>>(*j, f, "scenarios.json");
    }
  }
  if (auto it = archive.artifacts.find("events.jsonl"); it != archive.artifacts.end()) {
    try {
      a.events = events_from_jsonl(it->second);
    } catch (const std::exception& e) {
      f.error(std::string("events.jsonl: ") + e.what(), "events.jsonl");
    }
  } else {
    f.error("archive lacks events.jsonl", "events.jsonl");
  }
  a.schema_findings = f.take();
  return a;
}

Artifact artifact_from_json(const json& j, std::string name) {
  Artifact a;
  a.name = std::move(name);
  Findings f;
  if (j.is_array()) {
    a.kind = ArtifactKind::kScenarios;
    auto shape = scenario_shape(j);
    f.append(shape);
    if (shape.empty()) a.scenarios = typed<std::vector<threat::AttackScenario>>(j, f, a.name);
  } else if (j.is_object() && j.contains("rooms") && j.contains("devices")) {
    a.kind = ArtifactKind::kHome;
    auto shape = home_shape(j);
    f.append(shape);
    if (shape.empty()) a.home = typed<HomeConfiguration>(j, f, a.name);
  } else if (j.is_object()) {
    a.kind = ArtifactKind::kParameters;
    a.params = typed<SimulationParameters>(j, f, a.name);
    if (a.params) a.horizon = a.params->duration;
  } else {
    throw ValidationError(a.name + " is neither a home, a parameter set, nor a scenario list");
  }
  a.schema_findings = f.take();
  return a;
}

Artifact load_artifact(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    if (!fs::is_regular_file(path / kManifestFile))
      throw ValidationError(path.string() + " is a directory without an archive manifest");
    return bundle_artifact(import_archive(path).archive);
  }
  if (!fs::is_regular_file(path)) throw ValidationError("no such artifact: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + " is not valid JSON: " + e.what());
  }
  return artifact_from_json(j, path.filename().string());
}

ValidatorReport run_stage(Stage stage, const Artifact& a, const Context& ctx) {
  Findings f;
  const bool usable = interpretable(a);
  switch (stage) {
    case Stage::kSchema:
      f.append(a.schema_findings);
      if (a.home) home_schema(*a.home, f);
      if (a.params) params_schema(*a.params, f);
      if (a.scenarios) scenarios_schema(*a.scenarios, f);
      break;
    case Stage::kPhysical:
      if (!usable) not_interpretable(a, f);
      if (a.home) home_physical(*a.home, f);
      if (a.params) params_physical(*a.params, f);
      if (a.scenarios) scenarios_physical(*a.scenarios, f);
      events_checks(stage, a, f);
      break;
    case Stage::kSemantic: {
      const auto& c = need_catalogs(ctx, stage);
      if (!usable) not_interpretable(a, f);
      if (a.home) home_semantic(*a.home, c, f);
      if (a.params) params_semantic(*a.params, c, f);
      if (a.scenarios) scenarios_semantic(*a.scenarios, c, a.home ? &*a.home : nullptr, f);
      events_checks(stage, a, f);
      break;
    }
    case Stage::kFactual:
      if (!usable && ctx.kb) not_interpretable(a, f);
      factual(a, ctx, f);
      break;
    case Stage::kSecurity: {
      const auto& c = need_catalogs(ctx, stage);
      if (!usable) not_interpretable(a, f);
      if (a.home) home_security(*a.home, c, f);
      if (a.params) params_security(*a.params, c, f);
      if (a.scenarios) scenarios_security(*a.scenarios, c, a.horizon, f);
      break;
    }
    case Stage::kBusiness: {
      const auto& c = need_catalogs(ctx, stage);
      if (!usable) not_interpretable(a, f);
      if (a.home) home_business(*a.home, c, f);
      if (a.params) params_business(*a.params, f);
      if (a.scenarios) scenarios_business(*a.scenarios, f);
      events_checks(stage, a, f);
      break;
    }
  }
  ValidatorReport r;
  r.stage = stage;
  r.findings = f.take();
  r.score = score_findings(r.findings);
  return r;
}

Verification verify_artifact(const Artifact& artifact, const Context& context, const std::map<Stage, double>& weights) {
  Verification v;
  for (Stage s : kStages) v.reports.push_back(run_stage(s, artifact, context));
  v.confidence = aggregate_confidence(v.reports, weights);
  v.decision = gate(v.confidence, v.reports);
  return v;
}

json to_json(const Verification& v) {
  json stages = json::array();
  for (const auto& r : v.reports) {
    json findings = json::array();
    for (const auto& f : r.findings)
      findings.push_back({{"severity", severity_name(f.severity)}, {"message", f.message}, {"location", f.location}});
    stages.push_back({{"stage", stage_name(r.stage)}, {"score", r.score}, {"findings", findings}});
  }
  return {{"stages", stages},
          {"confidence", v.confidence},
          {"decision", outcome_name(v.decision.outcome)},
          {"explanation", v.decision.explanation}};
}

}  // namespace homesim::verify
