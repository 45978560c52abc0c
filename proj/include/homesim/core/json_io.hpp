#pragma once

#include <string>

#include "json.hpp"

#include "homesim/core/threat_spec.hpp"
#include "homesim/core/types.hpp"

namespace homesim {

// nlohmann ADL hooks for the core types. Objects serialize with sorted keys,
// so `dump()` of any of these is already canonical.

void to_json(nlohmann::json& j, Protocol p);
void from_json(const nlohmann::json& j, Protocol& p);
void to_json(nlohmann::json& j, InhabitantKind k);
void from_json(const nlohmann::json& j, InhabitantKind& k);
void to_json(nlohmann::json& j, AttackPhase p);
void from_json(const nlohmann::json& j, AttackPhase& p);

void to_json(nlohmann::json& j, const ResidenceTemplate& t);
void from_json(const nlohmann::json& j, ResidenceTemplate& t);
void to_json(nlohmann::json& j, const Room& r);
void from_json(const nlohmann::json& j, Room& r);
void to_json(nlohmann::json& j, const DeviceInstance& d);
void from_json(const nlohmann::json& j, DeviceInstance& d);
void to_json(nlohmann::json& j, const Schedule& s);
void from_json(const nlohmann::json& j, Schedule& s);
void to_json(nlohmann::json& j, const InhabitantProfile& p);
void from_json(const nlohmann::json& j, InhabitantProfile& p);
void to_json(nlohmann::json& j, const TransitionMatrix& m);
void from_json(const nlohmann::json& j, TransitionMatrix& m);
void to_json(nlohmann::json& j, const BehaviorParams& b);
void from_json(const nlohmann::json& j, BehaviorParams& b);
void to_json(nlohmann::json& j, const HomeConfiguration& c);
void from_json(const nlohmann::json& j, HomeConfiguration& c);
void to_json(nlohmann::json& j, const Label& l);
void from_json(const nlohmann::json& j, Label& l);
void to_json(nlohmann::json& j, const PayloadValue& v);
void from_json(const nlohmann::json& j, PayloadValue& v);
void to_json(nlohmann::json& j, const SimulationEvent& e);
void from_json(const nlohmann::json& j, SimulationEvent& e);

/// Seconds with millisecond resolution, e.g. 3600.125.
double millis_to_seconds(SimMillis t);
SimMillis seconds_to_millis(double seconds);

/// Compact, sorted-key serialization used for hashing and archives.
std::string canonical_dump(const nlohmann::json& j);

}  // namespace homesim

// PayloadValue is a std::variant, so ADL never reaches namespace homesim.
template <>
struct nlohmann::adl_serializer<homesim::PayloadValue> {
  static void to_json(json& j, const homesim::PayloadValue& v) { homesim::to_json(j, v); }
  static void from_json(const json& j, homesim::PayloadValue& v) { homesim::from_json(j, v); }
};
