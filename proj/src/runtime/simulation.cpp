#include "homesim/runtime/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"
#include "homesim/home/generator.hpp"

namespace homesim {

namespace {

template <class F>
auto in_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const VersionError&) {
    throw;
  } catch (const IntegrityError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(stage) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

PayloadValue draw_telemetry(const TelemetryField& f, RngStream& rng) {
  switch (f.type) {
    case ValueType::kInteger:
      return rng.uniform_int(static_cast<std::int64_t>(std::ceil(f.min)),
                             static_cast<std::int64_t>(std::floor(f.max)));
    case ValueType::kBoolean:
      return rng.bernoulli(0.5);
    case ValueType::kString:
      return std::string();
    case ValueType::kReal:
      break;
  }
  return std::clamp(std::round(rng.uniform(f.min, f.max) * 100.0) / 100.0, f.min, f.max);
}

std::string scenario_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scenario_%02zu", index + 1);
  return buf;
}

}  // namespace

std::vector<SimulationEvent> emit_benign_events(const HomeConfiguration& home,
                                                std::span<const behavior::PresenceTrace> traces,
                                                std::span<const InhabitantProfile> profiles,
                                                const Catalogs& catalogs, SimMillis duration,
                                                std::span<const Protocol> enabled, std::uint64_t seed) {
  if (traces.size() != profiles.size()) throw ValidationError("traces and profiles are not aligned");
  const behavior::InteractionModel im(home.behavior, catalogs.activities);
  std::map<std::string, int> room_index;
  for (std::size_t i = 0; i < home.rooms.size(); ++i) room_index[home.rooms[i].id] = static_cast<int>(i);
  const std::set<Protocol> on(enabled.begin(), enabled.end());
  const SimMillis tick = static_cast<SimMillis>(home.behavior.tick_seconds) * kMillisPerSecond;

  std::vector<SimulationEvent> out;
  for (const auto& d : home.devices) {
    const auto& entry = catalogs.device(d.type_name);
    auto proto = std::find_if(entry.protocols.begin(), entry.protocols.end(),
                              [&](Protocol p) { return on.count(p) > 0; });
    if (proto == entry.protocols.end()) continue;

    SimulationEvent base;
    base.device_id = d.id;
    base.device_type = d.type_name;
    base.category = entry.category;
    base.room = d.room_id;
    base.protocol = *proto;

    const RngStream stream = derive_stream(seed, "traffic/" + d.id);
    RngStream tel = stream.fork("telemetry");
    RngStream act = stream.fork("interaction");

    const auto interval = seconds_to_millis(entry.telemetry_interval_s);
    if (interval > 0) {
      const EventKind kind = entry.category == "network" ? EventKind::kNetworkPacket : EventKind::kTelemetry;
      for (SimMillis t = static_cast<SimMillis>(tel.uniform_index(static_cast<std::uint64_t>(interval)));
           t < duration; t += interval) {
        SimulationEvent e = base;
        e.timestamp = t;
        e.kind = kind;
        for (const auto& f : entry.value_ranges) e.payload[f.name] = draw_telemetry(f, tel);
        out.push_back(std::move(e));
      }
    }

    if (entry.interaction_probability <= 0.0 || entry.states.empty() || traces.empty()) continue;
    const behavior::DeviceContext ctx{entry.category, room_index.at(d.room_id),
                                      catalogs.category(entry.category).room_bound};
    std::string state = entry.states.front();
    std::vector<const std::pair<std::string, std::string>*> moves;
    const std::size_t ticks = traces.front().activity.size();
    for (std::size_t k = 0; k < ticks; ++k) {
      const SimMillis t = static_cast<SimMillis>(k) * tick;
      if (t >= duration) break;
      const auto a = behavior::device_activation(ctx, traces, profiles, t, im);
      const double p = a.value * entry.interaction_probability;
      if (p <= 0.0 || !act.bernoulli(p)) continue;
      moves.clear();
      for (const auto& tr : entry.transitions)
        if (tr.first == state) moves.push_back(&tr);
      if (moves.empty()) continue;
      const auto* mv = moves[act.uniform_index(moves.size())];
      SimulationEvent e = base;
      e.timestamp = std::min(duration - 1, t + static_cast<SimMillis>(act.uniform_index(static_cast<std::uint64_t>(tick))));
      e.kind = EventKind::kStateChange;
      e.payload["previous_state"] = mv->first;
      e.payload["state"] = mv->second;
      if (auto pw = entry.power_profile.find(mv->second); pw != entry.power_profile.end())
        e.payload["power_w"] = pw->second;
      if (a.source) e.inhabitant = profiles[*a.source].id;
      state = mv->second;
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<SimulationEvent> emit_attack_events(const HomeConfiguration& home,
                                                const threat::AttackScenario& scenario,
                                                const Catalogs& catalogs) {
  std::map<std::string, const DeviceInstance*> by_id;
  for (const auto& d : home.devices) by_id[d.id] = &d;
  std::vector<SimulationEvent> out;
  out.reserve(scenario.events.size());
  for (const auto& p : scenario.events) {
    auto it = by_id.find(p.target);
    if (it == by_id.end()) throw ValidationError("attack target '" + p.target + "' is not in the home");
    const auto& d = *it->second;
    SimulationEvent e;
    e.timestamp = p.timestamp;
    e.device_id = d.id;
    e.device_type = d.type_name;
    e.category = catalogs.device(d.type_name).category;
    e.room = d.room_id;
    e.protocol = scenario.protocol;
    e.kind = EventKind::kNetworkPacket;
    e.payload = p.payload;
    e.scenario_id = scenario.id;
    e.phase = p.phase;
    out.push_back(std::move(e));
  }
  return out;
}

SimulationResult run_simulation(const SimulationParameters& params, std::uint64_t seed,
                                const Catalogs& catalogs) {
  in_stage("parameters", [&] {
    validate(params, catalogs);
    return 0;
  });
  const SimulationParameters omega = resolve(params, catalogs);

  SimulationResult r;
  r.home = in_stage("home generation", [&] {
    auto req = omega.home;
    req.seed = seed;
    auto home = home::generate_home(req, catalogs);
    if (omega.residents) {
      home.inhabitants = *omega.residents;
      std::vector<InhabitantKind> kinds;
      for (const auto& p : home.inhabitants) kinds.push_back(p.kind);
      home.behavior = behavior::build_behavior_params(catalogs.activities, kinds);
    }
    return home;
  });

  std::vector<InhabitantProfile> profiles = r.home.inhabitants;
  std::sort(profiles.begin(), profiles.end(),
            [](const InhabitantProfile& a, const InhabitantProfile& b) { return a.id < b.id; });
  r.traces = in_stage("behavior", [&] {
    return behavior::simulate_behavior(r.home, profiles, catalogs.activities, omega.duration,
                                       derive_stream(seed, "behavior"));
  });

  auto benign = in_stage("benign traffic", [&] {
    return emit_benign_events(r.home, r.traces, profiles, catalogs, omega.duration, omega.protocols, seed);
  });

  std::vector<SimulationEvent> attacks;
  in_stage("threat injection", [&] {
    const RngStream threat_root = derive_stream(seed, "threat");
    std::set<std::string> known;
    for (const auto& d : r.home.devices) known.insert(d.id);
    for (std::size_t i = 0; i < omega.threats.size(); ++i) {
      const auto& req = omega.threats[i];
      const auto& spec = catalogs.threats.find(req.threat);
      std::vector<std::string> targets;
      if (req.targets) {
        for (const auto& t : *req.targets)
          if (!known.count(t)) throw ValidationError("target '" + t + "' is not a device of this home");
        targets = *req.targets;
      } else {
        targets = threat::select_targets(r.home.devices, catalogs, spec, *req.theta_vuln);
      }
      threat::ScenarioOptions opt;
      opt.id = scenario_id(i);
      opt.k_rate = catalogs.threats.k_rate;
      opt.k_stealth = catalogs.threats.k_stealth;
      opt.theta_vuln = *req.theta_vuln;
      opt.phase_tactics = catalogs.threats.phase_tactics;
      for (const auto& d : r.home.devices) opt.target_addresses[d.id] = d.network_address;
      RngStream rng = threat_root.fork(opt.id);
      r.scenarios.push_back(threat::generate_scenario(spec, targets, *req.window, req.gamma, rng, opt));
      auto emitted = emit_attack_events(r.home, r.scenarios.back(), catalogs);
      attacks.insert(attacks.end(), std::make_move_iterator(emitted.begin()),
                     std::make_move_iterator(emitted.end()));
    }
    return 0;
  });

  in_stage("labeling", [&] {
    r.events = std::move(benign);
    r.events.insert(r.events.end(), std::make_move_iterator(attacks.begin()),
                    std::make_move_iterator(attacks.end()));
    std::stable_sort(r.events.begin(), r.events.end(), event_order_less);
    for (auto& e : r.events)
      e.label = threat::label_event(e, r.scenarios, omega.taxonomy_level, catalogs.threats.confidence_floor);
    return 0;
  });

  auto& rec = r.record;
  rec.seed = seed;
  rec.params = omega;
  rec.catalog_version = catalogs.version;
  rec.exp_id = experiment_id(seed, omega, rec.engine_version);
  rec.event_count = r.events.size();
  rec.attack_event_count = static_cast<std::size_t>(std::count_if(
      r.events.begin(), r.events.end(), [](const SimulationEvent& e) { return e.label.verdict == Verdict::kAttack; }));
  return r;
}

}  // namespace homesim
