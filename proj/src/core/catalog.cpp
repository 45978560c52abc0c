#include "homesim/core/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"

#ifndef HOMESIM_DEFAULT_CATALOG_DIR
#define HOMESIM_DEFAULT_CATALOG_DIR "data/catalog"
#endif

namespace homesim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Small lookups

void CompatibilityMatrix::set(const std::string& category, const std::string& room_type,
                              double value) {
  entries_[{category, room_type}] = value;
}

double CompatibilityMatrix::at(std::string_view category, std::string_view room_type) const {
  auto it = entries_.find({std::string(category), std::string(room_type)});
  return it == entries_.end() ? 0.0 : it->second;
}

std::size_t ActivityCatalog::index_of(std::string_view activity) const {
  for (std::size_t i = 0; i < activities.size(); ++i) {
    if (activities[i].id == activity) return i;
  }
  throw ValidationError("unknown activity '" + std::string(activity) + "'");
}

const ThreatSpec& ThreatRegistry::find(std::string_view threat_type) const {
  for (const auto& t : threats) {
    if (t.threat_type == threat_type) return t;
  }
  throw ValidationError("unknown threat type '" + std::string(threat_type) + "'");
}

double ThreatRegistry::vulnerability_of(std::string_view threat_category,
                                        std::string_view device_category) const {
  auto row = vulnerability.find(std::string(threat_category));
  if (row == vulnerability.end()) return 0.0;
  auto cell = row->second.find(std::string(device_category));
  return cell == row->second.end() ? 0.0 : cell->second;
}

const DeviceCatalogEntry& Catalogs::device(std::string_view type_name) const {
  auto it = device_index_.find(type_name);
  if (it == device_index_.end())
    throw ValidationError("unknown device type '" + std::string(type_name) + "'");
  return devices[it->second];
}

bool Catalogs::has_device(std::string_view type_name) const {
  return device_index_.find(type_name) != device_index_.end();
}

const RoomTypeDef& Catalogs::room_type(std::string_view id) const {
  auto it = room_index_.find(id);
  if (it == room_index_.end())
    throw ValidationError("unknown room type '" + std::string(id) + "'");
  return room_types[it->second];
}

bool Catalogs::has_room_type(std::string_view id) const {
  return room_index_.find(id) != room_index_.end();
}

const CategoryDef& Catalogs::category(std::string_view id) const {
  auto it = category_index_.find(id);
  if (it == category_index_.end())
    throw ValidationError("unknown device category '" + std::string(id) + "'");
  return categories[it->second];
}

bool Catalogs::has_category(std::string_view id) const {
  return category_index_.find(id) != category_index_.end();
}

const ResidenceTemplate* Catalogs::find_template(std::string_view name) const {
  for (const auto& t : templates) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const std::string& Catalogs::family_of(Protocol p) const {
  for (const auto& [family, members] : protocol_families) {
    if (std::find(members.begin(), members.end(), p) != members.end()) return family;
  }
  throw ValidationError("protocol " + std::string(to_string(p)) + " has no family");
}

void Catalogs::reindex() {
  device_index_.clear();
  room_index_.clear();
  category_index_.clear();
  for (std::size_t i = 0; i < devices.size(); ++i) device_index_[devices[i].type_name] = i;
  for (std::size_t i = 0; i < room_types.size(); ++i) room_index_[room_types[i].id] = i;
  for (std::size_t i = 0; i < categories.size(); ++i) category_index_[categories[i].id] = i;
}

// ---------------------------------------------------------------------------
// Clock helpers

int parse_clock(std::string_view hhmm) {
  auto colon = hhmm.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 3 != hhmm.size())
    throw ValidationError("bad clock value '" + std::string(hhmm) + "' (want HH:MM)");
  int h = 0;
  int m = 0;
  for (char c : hhmm.substr(0, colon)) {
    if (c < '0' || c > '9') throw ValidationError("bad clock value '" + std::string(hhmm) + "'");
    h = h * 10 + (c - '0');
  }
  for (char c : hhmm.substr(colon + 1)) {
    if (c < '0' || c > '9') throw ValidationError("bad clock value '" + std::string(hhmm) + "'");
    m = m * 10 + (c - '0');
  }
  if (h > 24 || m > 59 || (h == 24 && m != 0))
    throw ValidationError("bad clock value '" + std::string(hhmm) + "'");
  return h * 60 + m;
}

std::string format_clock(int minute_of_day) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minute_of_day / 60, minute_of_day % 60);
  return buf;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Ctx {
 public:
  explicit Ctx(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw CatalogError("schema violation in " + file_ + ": " + msg);
  }

  const json& req(const json& obj, const char* key) const {
    if (!obj.is_object()) fail(std::string("expected object around '") + key + "'");
    auto it = obj.find(key);
    if (it == obj.end()) fail(std::string("missing field '") + key + "'");
    return *it;
  }

  std::string str(const json& obj, const char* key) const {
    const auto& v = req(obj, key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  double num(const json& obj, const char* key) const {
    const auto& v = req(obj, key);
    if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
    return v.get<double>();
  }

  int integer(const json& obj, const char* key) const {
    const auto& v = req(obj, key);
    if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
  }

  const json& arr(const json& obj, const char* key) const {
    const auto& v = req(obj, key);
    if (!v.is_array()) fail(std::string("field '") + key + "' must be an array");
    return v;
  }

  const json& obj(const json& parent, const char* key) const {
    const auto& v = req(parent, key);
    if (!v.is_object()) fail(std::string("field '") + key + "' must be an object");
    return v;
  }

  void check_schema_version(const json& doc) const {
    if (!doc.is_object() || !doc.contains("schema_version"))
      fail("missing mandatory 'schema_version'");
    if (integer(doc, "schema_version") != kCatalogSchemaVersion)
      fail("unsupported schema_version " + doc["schema_version"].dump());
  }

  template <typename Parse>
  auto guarded(const std::string& what, Parse&& parse) const -> decltype(parse()) {
    try {
      return parse();
    } catch (const CatalogError&) {
      throw;
    } catch (const ValidationError& e) {
      fail(what + ": " + e.what());
    }
  }

 private:
  std::string file_;
};

PayloadValue payload_scalar(const Ctx& ctx, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  ctx.fail("payload values must be scalars, got " + v.dump());
}

PayloadFieldSpec parse_field_spec(const Ctx& ctx, const json& v) {
  PayloadFieldSpec spec;
  if (v.is_object() && v.contains("choice")) {
    spec.kind = PayloadFieldSpec::Kind::kChoice;
    for (const auto& c : ctx.arr(v, "choice")) spec.choices.push_back(payload_scalar(ctx, c));
    if (spec.choices.empty()) ctx.fail("empty choice list");
  } else if (v.is_object()) {
    spec.kind = PayloadFieldSpec::Kind::kRange;
    spec.min = ctx.num(v, "min");
    spec.max = ctx.num(v, "max");
    spec.integer = v.value("integer", true);
    if (spec.min > spec.max) ctx.fail("payload range min > max");
  } else {
    spec.kind = PayloadFieldSpec::Kind::kConstant;
    spec.constant = payload_scalar(ctx, v);
  }
  return spec;
}

void parse_protocols(const Ctx& ctx, const json& doc, Catalogs& out) {
  ctx.check_schema_version(doc);
  std::set<Protocol> seen;
  for (const auto& p : ctx.arr(doc, "protocols")) {
    Protocol proto = ctx.guarded("protocols", [&] { return parse_protocol(p.get<std::string>()); });
    if (!seen.insert(proto).second) ctx.fail("duplicate identifier '" + p.get<std::string>() + "'");
    out.protocols.push_back(proto);
  }
  if (out.protocols.size() != kAllProtocols.size())
    ctx.fail("expected exactly 12 protocols, found " + std::to_string(out.protocols.size()));
  std::set<Protocol> in_family;
  for (const auto& [family, members] : ctx.obj(doc, "families").items()) {
    auto& list = out.protocol_families[family];
    for (const auto& m : members) {
      Protocol proto = ctx.guarded("families", [&] { return parse_protocol(m.get<std::string>()); });
      if (!in_family.insert(proto).second)
        ctx.fail("protocol '" + m.get<std::string>() + "' in more than one family");
      list.push_back(proto);
    }
  }
  if (in_family.size() != kAllProtocols.size()) ctx.fail("every protocol needs exactly one family");
}

void parse_rooms(const Ctx& ctx, const json& doc, Catalogs& out) {
  ctx.check_schema_version(doc);
  std::set<std::string> seen;
  for (const auto& r : ctx.arr(doc, "room_types")) {
    RoomTypeDef def{ctx.str(r, "id"), ctx.integer(r, "capacity")};
    if (def.capacity < 1) ctx.fail("room type '" + def.id + "' capacity must be >= 1");
    if (!seen.insert(def.id).second) ctx.fail("duplicate identifier '" + def.id + "'");
    out.room_types.push_back(std::move(def));
  }
  if (out.room_types.size() != kRoomTypeCount)
    ctx.fail("expected 15 room types, found " + std::to_string(out.room_types.size()));
}

void parse_devices(const Ctx& ctx, const json& doc, Catalogs& out) {
  ctx.check_schema_version(doc);
  std::set<std::string> seen_cat;
  for (const auto& c : ctx.arr(doc, "categories")) {
    CategoryDef def{ctx.str(c, "id"), ctx.num(c, "base_density"), c.value("room_bound", true)};
    if (def.base_density < 0) ctx.fail("category '" + def.id + "' has negative base density");
    if (!seen_cat.insert(def.id).second) ctx.fail("duplicate identifier '" + def.id + "'");
    out.categories.push_back(std::move(def));
  }
  if (out.categories.size() != kCategoryCount)
    ctx.fail("expected 16 device categories, found " + std::to_string(out.categories.size()));

  const auto& entries = ctx.arr(doc, "devices");
  if (entries.empty()) throw CatalogError("empty catalog: device registry has no entries");

  std::map<std::string, double> density;
  for (const auto& c : out.categories) density[c.id] = c.base_density;

  std::set<std::string> seen;
  for (const auto& d : entries) {
    DeviceCatalogEntry e;
    e.type_name = ctx.str(d, "type_name");
    if (!seen.insert(e.type_name).second) ctx.fail("duplicate identifier '" + e.type_name + "'");
    e.category = ctx.str(d, "category");
    if (!seen_cat.count(e.category))
      ctx.fail("device '" + e.type_name + "' references unknown category '" + e.category + "'");
    e.base_density = density[e.category];
    e.prevalence = d.value("prevalence", 1.0);
    if (!(e.prevalence > 0)) ctx.fail("device '" + e.type_name + "' prevalence must be > 0");
    for (const auto& p : ctx.arr(d, "protocols"))
      e.protocols.push_back(ctx.guarded(e.type_name, [&] { return parse_protocol(p.get<std::string>()); }));
    if (e.protocols.empty()) ctx.fail("device '" + e.type_name + "' declares no protocols");
    for (const auto& s : ctx.arr(d, "states")) e.states.push_back(s.get<std::string>());
    if (e.states.empty()) ctx.fail("device '" + e.type_name + "' declares no states");
    std::set<std::string> states(e.states.begin(), e.states.end());
    if (states.size() != e.states.size()) ctx.fail("device '" + e.type_name + "' repeats a state");
    for (const auto& t : ctx.arr(d, "transitions")) {
      if (!t.is_array() || t.size() != 2) ctx.fail("transition must be a [from, to] pair");
      auto from = t[0].get<std::string>();
      auto to = t[1].get<std::string>();
      if (!states.count(from) || !states.count(to))
        ctx.fail("device '" + e.type_name + "' transition " + from + "->" + to +
                 " names an undeclared state");
      e.transitions.emplace_back(from, to);
    }
    for (const auto& [state, watts] : ctx.obj(d, "power_profile").items()) {
      if (!states.count(state))
        ctx.fail("device '" + e.type_name + "' power profile names undeclared state '" + state + "'");
      e.power_profile[state] = watts.get<double>();
    }
    for (const auto& f : ctx.arr(d, "telemetry")) {
      TelemetryField field;
      field.name = ctx.str(f, "name");
      field.type = ctx.guarded(field.name, [&] { return parse_value_type(ctx.str(f, "type")); });
      field.min = ctx.num(f, "min");
      field.max = ctx.num(f, "max");
      if (field.min > field.max) ctx.fail("telemetry field '" + field.name + "' has min > max");
      e.value_ranges.push_back(std::move(field));
    }
    e.telemetry_interval_s = ctx.num(d, "telemetry_interval_s");
    if (!(e.telemetry_interval_s > 0)) ctx.fail("telemetry interval must be > 0");
    e.interaction_probability = ctx.num(d, "interaction_probability");
    if (e.interaction_probability < 0 || e.interaction_probability > 1)
      ctx.fail("interaction probability out of [0,1] for '" + e.type_name + "'");
    e.hub_capable = d.value("hub_capable", false);
    out.devices.push_back(std::move(e));
  }
  out.declared_device_count = static_cast<std::size_t>(ctx.integer(doc, "device_count"));
  if (out.declared_device_count != out.devices.size())
    ctx.fail("declared device_count " + std::to_string(out.declared_device_count) +
             " but registry holds " + std::to_string(out.devices.size()));

  for (const auto& [cat, row] : ctx.obj(doc, "compatibility").items()) {
    if (!seen_cat.count(cat)) ctx.fail("compatibility names unknown category '" + cat + "'");
    for (const auto& [room, value] : row.items()) {
      double v = value.get<double>();
      if (v < 0 || v > 1) ctx.fail("compatibility " + cat + "/" + room + " outside [0,1]");
      out.compat.set(cat, room, v);
    }
  }
}

void parse_templates(const Ctx& ctx, const json& doc, Catalogs& out) {
  ctx.check_schema_version(doc);
  std::set<std::string> seen;
  for (const auto& t : ctx.arr(doc, "templates")) {
    ResidenceTemplate tpl;
    tpl.name = ctx.str(t, "name");
    if (!seen.insert(tpl.name).second) ctx.fail("duplicate identifier '" + tpl.name + "'");
    tpl.display_name = t.value("display_name", tpl.name);
    tpl.room_count = ctx.integer(t, "room_count");
    tpl.floor_area = ctx.num(t, "floor_area");
    const auto& bounds = ctx.arr(t, "device_density_bounds");
    if (bounds.size() != 2) ctx.fail("density bounds must be [lo, hi]");
    tpl.device_density_bounds = {bounds[0].get<double>(), bounds[1].get<double>()};
    if (tpl.room_count < 1 || !(tpl.floor_area > 0))
      ctx.fail("template '" + tpl.name + "' needs positive room count and area");
    if (tpl.device_density_bounds.first < 0 ||
        tpl.device_density_bounds.first > tpl.device_density_bounds.second)
      ctx.fail("template '" + tpl.name + "' density bounds must satisfy 0 <= lo <= hi");
    double sum = 0.0;
    for (const auto& [room, p] : ctx.obj(t, "room_type_distribution").items()) {
      if (!out.has_room_type(room))
        ctx.fail("template '" + tpl.name + "' names unknown room type '" + room + "'");
      double prob = p.get<double>();
      if (prob < 0) ctx.fail("negative room probability in '" + tpl.name + "'");
      tpl.room_type_distribution[room] = prob;
      sum += prob;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      ctx.fail("template '" + tpl.name + "' room distribution sums to " + std::to_string(sum));
    tpl.default_inhabitants = ctx.integer(t, "default_inhabitants");
    for (const auto& k : ctx.arr(t, "inhabitant_kinds"))
      tpl.inhabitant_kinds.push_back(
          ctx.guarded(tpl.name, [&] { return parse_inhabitant_kind(k.get<std::string>()); }));
    if (tpl.default_inhabitants < 1 ||
        static_cast<int>(tpl.inhabitant_kinds.size()) != tpl.default_inhabitants)
      ctx.fail("template '" + tpl.name + "' inhabitant kinds must match default_inhabitants");
    if (t.contains("device_count")) tpl.pinned_device_count = ctx.integer(t, "device_count");
    out.templates.push_back(std::move(tpl));
  }
  if (out.templates.empty()) ctx.fail("no residence templates");
}

void parse_activities(const Ctx& ctx, const json& doc, Catalogs& out) {
  ctx.check_schema_version(doc);
  ActivityCatalog& cat = out.activities;
  std::set<std::string> seen;
  for (const auto& a : ctx.arr(doc, "activities")) {
    ActivityDef def;
    def.id = ctx.str(a, "id");
    if (!seen.insert(def.id).second) ctx.fail("duplicate identifier '" + def.id + "'");
    for (const auto& r : ctx.arr(a, "preferred_rooms")) {
      auto room = r.get<std::string>();
      if (!out.has_room_type(room))
        ctx.fail("activity '" + def.id + "' prefers unknown room type '" + room + "'");
      def.preferred_rooms.push_back(room);
    }
    for (const auto& [c, v] : ctx.obj(a, "category_affinity").items()) {
      if (!out.has_category(c)) ctx.fail("activity '" + def.id + "' names unknown category '" + c + "'");
      double val = v.get<double>();
      if (val < 0 || val > 1) ctx.fail("affinity outside [0,1] for '" + def.id + "'");
      def.category_affinity[c] = val;
    }
    def.default_affinity = a.value("default_affinity", 0.2);
    def.persistence = ctx.num(a, "persistence");
    if (def.persistence < 0 || def.persistence > 1)
      ctx.fail("persistence outside [0,1] for '" + def.id + "'");
    cat.activities.push_back(std::move(def));
  }
  if (cat.activities.size() != kActivityCount)
    ctx.fail("expected 16 activity states, found " + std::to_string(cat.activities.size()));

  const auto& periods = ctx.arr(doc, "periods");
  if (periods.size() != kPeriodCount) ctx.fail("expected four diurnal periods");
  std::vector<int> covered(24 * 60, 0);
  for (const auto& p : periods) {
    PeriodDef def;
    def.period = ctx.guarded("periods", [&] { return parse_diurnal_period(ctx.str(p, "id")); });
    def.start_minute = ctx.guarded("periods", [&] { return parse_clock(ctx.str(p, "start")); });
    def.end_minute = ctx.guarded("periods", [&] { return parse_clock(ctx.str(p, "end")); });
    def.temporal_factor = ctx.num(p, "temporal_factor");
    if (def.temporal_factor < 0 || def.temporal_factor > 1)
      ctx.fail("temporal factor outside [0,1]");
    for (int m = def.start_minute; m != def.end_minute; m = (m + 1) % (24 * 60)) {
      covered[static_cast<std::size_t>(m)]++;
      // the fixed period boundaries are part of the model; the file must agree
      if (period_of(static_cast<SimMillis>(m) * kMillisPerMinute) != def.period)
        ctx.fail("period '" + std::string(to_string(def.period)) + "' disagrees with boundaries");
    }
    cat.periods[static_cast<std::size_t>(def.period)] = def;
  }
  for (int c : covered)
    if (c != 1) ctx.fail("diurnal periods must cover 24 h without gap or overlap");

  for (const auto& [period, weights] : ctx.obj(doc, "period_weights").items()) {
    auto p = ctx.guarded("period_weights", [&] { return parse_diurnal_period(period); });
    std::vector<double> w = weights.get<std::vector<double>>();
    if (w.size() != kActivityCount) ctx.fail("period weights need 16 entries");
    for (double x : w)
      if (x < 0) ctx.fail("negative activity weight");
    cat.period_weights[p] = std::move(w);
  }
  if (cat.period_weights.size() != kPeriodCount) ctx.fail("period weights missing a period");

  for (const auto& [kind, mult] : ctx.obj(doc, "kind_multipliers").items()) {
    auto k = ctx.guarded("kind_multipliers", [&] { return parse_inhabitant_kind(kind); });
    for (const auto& [act, v] : mult.items()) {
      if (!seen.count(act)) ctx.fail("kind multiplier names unknown activity '" + act + "'");
      if (v.get<double>() < 0) ctx.fail("negative kind multiplier");
      cat.kind_multipliers[k][act] = v.get<double>();
    }
  }
  for (const auto& b : ctx.arr(doc, "successor_bias")) {
    SuccessorBias bias{ctx.str(b, "from"), ctx.str(b, "to"), ctx.num(b, "factor"), {}};
    if (!seen.count(bias.from) || !seen.count(bias.to)) ctx.fail("successor bias names unknown activity");
    if (bias.factor < 0) ctx.fail("negative successor bias");
    if (b.contains("periods"))
      for (const auto& p : b["periods"])
        bias.periods.push_back(ctx.guarded("successor_bias", [&] { return parse_diurnal_period(p.get<std::string>()); }));
    cat.successor_bias.push_back(std::move(bias));
  }
  for (const auto& [kind, k] : ctx.obj(doc, "kinds").items()) {
    auto parsed = ctx.guarded("kinds", [&] { return parse_inhabitant_kind(kind); });
    KindDefaults def;
    def.wake_minute = ctx.guarded(kind, [&] { return parse_clock(ctx.str(k, "wake")); });
    def.sleep_minute = ctx.guarded(kind, [&] { return parse_clock(ctx.str(k, "sleep")); });
    if (def.wake_minute == def.sleep_minute) ctx.fail("kind '" + kind + "' wake equals sleep");
    const auto& work = ctx.req(k, "work");
    if (!work.is_null()) {
      if (parsed == InhabitantKind::kPet) ctx.fail("pets have no work hours");
      def.work_minutes = std::pair{parse_clock(work.at(0).get<std::string>()),
                                   parse_clock(work.at(1).get<std::string>())};
    }
    def.work_from_home_probability = ctx.num(k, "work_from_home_probability");
    const auto& tech = ctx.arr(k, "tech_savviness");
    def.tech_savviness = {tech.at(0).get<double>(), tech.at(1).get<double>()};
    if (def.tech_savviness.first < 0 || def.tech_savviness.second > 1 ||
        def.tech_savviness.first > def.tech_savviness.second)
      ctx.fail("kind '" + kind + "' tech savviness range must lie in [0,1]");
    const auto& ops = ctx.req(k, "operable_categories");
    if (ops.is_array()) {
      for (const auto& c : ops) {
        if (!out.has_category(c.get<std::string>())) ctx.fail("unknown operable category");
        def.operable_categories.push_back(c.get<std::string>());
      }
    }
    cat.kinds[parsed] = std::move(def);
  }
  if (cat.kinds.size() != kAllInhabitantKinds.size()) ctx.fail("every inhabitant kind needs defaults");
}

IndicatorPredicate parse_predicate(const Ctx& ctx, const json& p) {
  IndicatorPredicate pred;
  pred.kind = ctx.guarded("predicate", [&] { return parse_predicate_kind(ctx.str(p, "kind")); });
  using K = IndicatorPredicate::Kind;
  switch (pred.kind) {
    case K::kFieldPresent:
      pred.field = ctx.str(p, "field");
      break;
    case K::kCountEquals:
      pred.field = ctx.str(p, "field");
      pred.value = payload_scalar(ctx, ctx.req(p, "value"));
      pred.at_least = ctx.integer(p, "at_least");
      break;
    case K::kDistinctValues:
      pred.field = ctx.str(p, "field");
      pred.at_least = ctx.integer(p, "at_least");
      break;
    case K::kNumericAtLeast:
    case K::kSumAtLeast:
      pred.field = ctx.str(p, "field");
      pred.threshold = ctx.num(p, "value");
      break;
    case K::kRateSpike:
      pred.at_least = ctx.integer(p, "per_minute");
      break;
  }
  return pred;
}

void parse_threats(const Ctx& ctx, const json& doc, Catalogs& out) {
  ctx.check_schema_version(doc);
  ThreatRegistry& reg = out.threats;
  std::set<std::string> cats;
  for (const auto& c : ctx.arr(doc, "threat_categories")) {
    if (!cats.insert(c.get<std::string>()).second) ctx.fail("duplicate threat category");
    reg.categories.push_back(c.get<std::string>());
  }
  if (reg.categories.size() != kThreatCategoryCount) ctx.fail("expected seven threat categories");
  for (const auto& [phase, tactic] : ctx.obj(doc, "phase_tactics").items())
    reg.phase_tactics[ctx.guarded("phase_tactics", [&] { return parse_attack_phase(phase); })] =
        tactic.get<std::string>();
  if (reg.phase_tactics.size() != kPhaseCount) ctx.fail("every phase needs a tactic");

  const auto& intensity = ctx.obj(doc, "intensity");
  reg.k_rate = ctx.num(intensity, "k_rate");
  reg.k_stealth = ctx.num(intensity, "k_stealth");
  reg.theta_vuln = ctx.num(intensity, "theta_vuln");
  reg.confidence_floor = ctx.num(intensity, "confidence_floor");
  if (!(reg.k_rate > 0) || !(reg.k_stealth > 0)) ctx.fail("k_rate and k_stealth must be > 0");
  if (reg.theta_vuln < 0 || reg.theta_vuln > 1) ctx.fail("theta_vuln outside [0,1]");

  for (const auto& [tcat, row] : ctx.obj(doc, "vulnerability").items()) {
    if (!cats.count(tcat)) ctx.fail("vulnerability names unknown threat category '" + tcat + "'");
    for (const auto& [dcat, v] : row.items()) {
      if (!out.has_category(dcat)) ctx.fail("vulnerability names unknown device category '" + dcat + "'");
      double val = v.get<double>();
      if (val < 0 || val > 1) ctx.fail("vulnerability outside [0,1]");
      reg.vulnerability[tcat][dcat] = val;
    }
  }

  std::set<std::string> seen;
  for (const auto& t : ctx.arr(doc, "threats")) {
    ThreatSpec spec;
    spec.threat_type = ctx.str(t, "id");
    if (!seen.insert(spec.threat_type).second) ctx.fail("duplicate identifier '" + spec.threat_type + "'");
    spec.category = ctx.str(t, "category");
    if (!cats.count(spec.category)) ctx.fail("threat '" + spec.threat_type + "' has unknown category");
    spec.protocol = ctx.guarded(spec.threat_type, [&] { return parse_protocol(ctx.str(t, "protocol")); });
    spec.base_rate = ctx.num(t, "base_rate");
    spec.base_stealth = ctx.num(t, "base_stealth");
    if (!(spec.base_rate > 0)) ctx.fail("threat '" + spec.threat_type + "' base rate must be > 0");
    if (spec.base_stealth < 0 || spec.base_stealth > 1)
      ctx.fail("threat '" + spec.threat_type + "' base stealth outside [0,1]");
    for (const auto& [k, v] : ctx.obj(t, "signature").items()) spec.signature[k] = v.get<std::string>();
    for (const auto& tech : ctx.arr(t, "techniques")) spec.techniques.push_back(tech.get<std::string>());
    if (spec.techniques.empty()) ctx.fail("threat '" + spec.threat_type + "' needs >= 1 technique id");
    spec.stub = t.value("status", std::string("characterized")) == "stub";
    int last = -1;
    for (const auto& p : ctx.arr(t, "phases")) {
      PhaseTemplate ph;
      ph.phase = ctx.guarded(spec.threat_type, [&] { return parse_attack_phase(ctx.str(p, "phase")); });
      if (phase_index(ph.phase) <= last)
        ctx.fail("threat '" + spec.threat_type + "' phases out of canonical order");
      last = phase_index(ph.phase);
      ph.relative_duration = ctx.num(p, "relative_duration");
      if (!(ph.relative_duration > 0)) ctx.fail("phase duration must be > 0");
      ph.technique = ctx.str(p, "technique");
      ph.rate_scale = ctx.num(p, "rate_scale");
      if (!(ph.rate_scale > 0)) ctx.fail("phase rate scale must be > 0");
      for (const auto& [field, fspec] : ctx.obj(p, "payload").items())
        ph.payload[field] = parse_field_spec(ctx, fspec);
      spec.phases.push_back(std::move(ph));
    }
    for (const auto& ind : ctx.arr(t, "indicators")) {
      IndicatorSpec is{ctx.str(ind, "id"), ctx.str(ind, "technique"),
                       parse_predicate(ctx, ctx.req(ind, "predicate"))};
      spec.indicators.push_back(std::move(is));
    }
    if (!spec.stub && (spec.phases.empty() || spec.indicators.empty()))
      ctx.fail("characterized threat '" + spec.threat_type + "' needs phases and indicators");
    reg.threats.push_back(std::move(spec));
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("missing catalog file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CatalogError("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace

IndicatorPredicate::Kind parse_predicate_kind(std::string_view s) {
  using K = IndicatorPredicate::Kind;
  if (s == "field_present") return K::kFieldPresent;
  if (s == "count_equals") return K::kCountEquals;
  if (s == "distinct_values") return K::kDistinctValues;
  if (s == "numeric_at_least") return K::kNumericAtLeast;
  if (s == "sum_at_least") return K::kSumAtLeast;
  if (s == "rate_spike") return K::kRateSpike;
  throw ValidationError("unknown predicate kind '" + std::string(s) + "'");
}

std::string_view to_string(IndicatorPredicate::Kind k) {
  using K = IndicatorPredicate::Kind;
  switch (k) {
    case K::kFieldPresent: return "field_present";
    case K::kCountEquals: return "count_equals";
    case K::kDistinctValues: return "distinct_values";
    case K::kNumericAtLeast: return "numeric_at_least";
    case K::kSumAtLeast: return "sum_at_least";
    case K::kRateSpike: return "rate_spike";
  }
  return "?";
}

CatalogDocuments read_catalog_documents(const std::filesystem::path& dir) {
  CatalogDocuments docs;
  docs.manifest = read_json_file(dir / "manifest.json");
  Ctx ctx("manifest.json");
  ctx.check_schema_version(docs.manifest);
  const auto& files = ctx.obj(docs.manifest, "files");
  auto load = [&](const char* key) { return read_json_file(dir / ctx.str(files, key)); };
  docs.protocols = load("protocols");
  docs.rooms = load("rooms");
  docs.devices = load("devices");
  docs.templates = load("templates");
  docs.activities = load("activities");
  docs.threats = load("threats");
  return docs;
}

Catalogs parse_catalogs(const CatalogDocuments& docs) {
  Catalogs out;
  Ctx manifest("manifest.json");
  manifest.check_schema_version(docs.manifest);
  out.version = manifest.str(docs.manifest, "catalog_version");
  try {
    parse_protocols(Ctx("protocols.json"), docs.protocols, out);
    parse_rooms(Ctx("rooms.json"), docs.rooms, out);
    out.reindex();
    parse_devices(Ctx("devices.json"), docs.devices, out);
    out.reindex();
    parse_templates(Ctx("templates.json"), docs.templates, out);
    parse_activities(Ctx("activities.json"), docs.activities, out);
    parse_threats(Ctx("threats.json"), docs.threats, out);
  } catch (const json::exception& e) {
    throw CatalogError(std::string("schema violation: ") + e.what());
  }
  for (const auto& [key, value] : out.compat.entries()) {
    if (!out.has_room_type(key.second))
      throw CatalogError("schema violation in devices.json: compatibility names unknown room type '" +
                         key.second + "'");
    (void)value;
  }
  return out;
}

Catalogs load_catalogs(const std::filesystem::path& dir) {
  return parse_catalogs(read_catalog_documents(dir));
}

std::filesystem::path default_catalog_dir() {
  if (const char* env = std::getenv("HOMESIM_CATALOG_DIR")) return env;
  return HOMESIM_DEFAULT_CATALOG_DIR;
}

}  // namespace homesim
