#include "homesim/runtime/params.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"
#include "homesim/runtime/digest.hpp"

namespace homesim {

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

SimMillis parse_offset(std::string_view s) {
  if (s.find(':') != std::string_view::npos) return parse_clock(s) * kMillisPerMinute;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw ValidationError("bad time '" + std::string(s) + "'");
    return seconds_to_millis(v);
  } catch (const std::logic_error&) {
    throw ValidationError("bad time '" + std::string(s) + "'");
  }
}

}  // namespace

threat::TimeWindow default_attack_window(SimMillis duration) {
  return {0, std::min(duration, 2 * kMillisPerHour)};
}

SimulationParameters resolve(const SimulationParameters& params, const Catalogs& catalogs) {
  SimulationParameters p = params;
  p.home.seed = 0;
  if (!p.home.room_count_multiplier) p.home.room_count_multiplier = 1.0;
  if (!p.home.density_multiplier) p.home.density_multiplier = 1.0;
  for (auto& s : p.threats) {
    if (!s.window) s.window = default_attack_window(p.duration);
    if (!s.theta_vuln) s.theta_vuln = catalogs.threats.theta_vuln;
  }
  std::sort(p.protocols.begin(), p.protocols.end());
  p.protocols.erase(std::unique(p.protocols.begin(), p.protocols.end()), p.protocols.end());
  return p;
}

void validate(const SimulationParameters& params, const Catalogs& catalogs) {
  home::select_template(params.home, catalogs);
  if (params.duration <= 0) throw ValidationError("duration must be > 0");
  if (!(params.compression >= 1.0)) throw ValidationError("compression must be >= 1");
  if (params.protocols.empty()) throw ValidationError("protocol subset must not be empty");
  if (params.taxonomy_level < 1 || params.taxonomy_level > kMaxTaxonomyLevel)
    throw ValidationError("taxonomy level must lie in [1, 7]");
  const std::set<Protocol> enabled(params.protocols.begin(), params.protocols.end());

  for (const auto& s : params.threats) {
    const ThreatSpec* spec = nullptr;
    try {
      spec = &catalogs.threats.find(s.threat);
    } catch (const std::exception&) {
      throw ValidationError("unknown threat '" + s.threat + "'");
    }
    if (spec->stub)
      throw ValidationError("threat '" + s.threat + "' is a registry stub with no phase templates");
    if (!(s.gamma >= 0.0 && s.gamma <= 1.0))
      throw ValidationError("gamma must lie in [0, 1] for threat '" + s.threat + "'");
    if (s.theta_vuln && !(*s.theta_vuln >= 0.0 && *s.theta_vuln <= 1.0))
      throw ValidationError("theta_vuln must lie in [0, 1]");
    const auto w = s.window.value_or(default_attack_window(params.duration));
    if (w.start < 0 || w.end > params.duration || w.length() <= 0)
      throw ValidationError("attack window for '" + s.threat + "' must be non-empty and inside the run");
    if (!enabled.count(spec->protocol))
      throw ValidationError("threat '" + s.threat + "' needs protocol " +
                            std::string(to_string(spec->protocol)) + ", which is disabled");
  }

  if (params.residents) {
    if (params.residents->empty()) throw ValidationError("resident override must not be empty");
    std::set<std::string> ids;
    for (const auto& r : *params.residents) {
      if (!ids.insert(r.id).second) throw ValidationError("duplicate resident id '" + r.id + "'");
      if (!(r.tech_savviness >= 0.0 && r.tech_savviness <= 1.0))
        throw ValidationError("tech savviness of '" + r.id + "' must lie in [0, 1]");
      if (!(r.variation_sigma >= 0.0)) throw ValidationError("variation sigma must be >= 0");
      const auto& sc = r.schedule;
      auto in_day = [](int m) { return m >= 0 && m < 24 * 60; };
      if (!in_day(sc.wake_minute) || !in_day(sc.sleep_minute) ||
          (sc.work_minutes && (!in_day(sc.work_minutes->first) || !in_day(sc.work_minutes->second))))
        throw ValidationError("schedule of '" + r.id + "' has a time outside the day");
    }
  }
}

threat::TimeWindow parse_window(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) throw ValidationError("window must look like START-END");
  return {parse_offset(text.substr(0, dash)), parse_offset(text.substr(dash + 1))};
}

void to_json(nlohmann::json& j, const ScenarioRequest& r) {
  j = {{"threat", r.threat}, {"gamma", r.gamma}};
  if (r.window) j["window"] = *r.window;
  if (r.targets) j["targets"] = *r.targets;
  if (r.theta_vuln) j["theta_vuln"] = *r.theta_vuln;
}

void from_json(const nlohmann::json& j, ScenarioRequest& r) {
  reject_unknown_keys(j, {"threat", "gamma", "window", "targets", "theta_vuln"}, "threat request");
  r = {};
  j.at("threat").get_to(r.threat);
  r.gamma = j.value("gamma", 0.5);
  if (j.contains("window")) {
    const auto& w = j["window"];
    r.window = w.is_string() ? parse_window(w.get<std::string>()) : w.get<threat::TimeWindow>();
  }
  if (j.contains("targets")) r.targets = j["targets"].get<std::vector<std::string>>();
  if (j.contains("theta_vuln")) r.theta_vuln = j["theta_vuln"].get<double>();
}

void to_json(nlohmann::json& j, const SimulationParameters& p) {
  nlohmann::json home = {{"template", p.home.template_name}};
  if (p.home.room_count_multiplier) home["room_count_multiplier"] = *p.home.room_count_multiplier;
  if (p.home.density_multiplier) home["density_multiplier"] = *p.home.density_multiplier;
  j = {{"home", home},
       {"threats", p.threats},
       {"duration_s", millis_to_seconds(p.duration)},
       {"compression", p.compression},
       {"protocols", p.protocols},
       {"taxonomy_level", p.taxonomy_level}};
  if (p.residents) j["residents"] = *p.residents;
}

void from_json(const nlohmann::json& j, SimulationParameters& p) {
  reject_unknown_keys(j,
                      {"home", "residents", "threats", "duration_s", "hours", "compression",
                       "protocols", "taxonomy_level"},
                      "simulation parameters");
  p = {};
  try {
    if (j.contains("home")) {
      const auto& h = j["home"];
      reject_unknown_keys(h, {"template", "room_count_multiplier", "density_multiplier"}, "home");
      p.home.template_name = h.value("template", p.home.template_name);
      if (h.contains("room_count_multiplier"))
        p.home.room_count_multiplier = h["room_count_multiplier"].get<double>();
      if (h.contains("density_multiplier")) p.home.density_multiplier = h["density_multiplier"].get<double>();
    }
    if (j.contains("residents")) p.residents = j["residents"].get<std::vector<InhabitantProfile>>();
    if (j.contains("threats")) p.threats = j["threats"].get<std::vector<ScenarioRequest>>();
    if (j.contains("duration_s") && j.contains("hours"))
      throw ValidationError("give either duration_s or hours, not both");
    if (j.contains("duration_s")) p.duration = seconds_to_millis(j["duration_s"].get<double>());
    if (j.contains("hours")) p.duration = seconds_to_millis(j["hours"].get<double>() * 3600.0);
    p.compression = j.value("compression", p.compression);
    if (j.contains("protocols")) p.protocols = j["protocols"].get<std::vector<Protocol>>();
    p.taxonomy_level = j.value("taxonomy_level", p.taxonomy_level);
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("simulation parameters: ") + ex.what());
  }
}

std::string experiment_id(std::uint64_t seed, const SimulationParameters& params,
                          std::string_view version) {
  const nlohmann::json doc = {{"seed", seed}, {"parameters", params}, {"version", version}};
  return sha256_hex(canonical_dump(doc));
}

}  // namespace homesim
