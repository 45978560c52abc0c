#include "homesim/core/types.hpp"

#include <string>

#include "homesim/core/error.hpp"

namespace homesim {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::string_view, N>& names,
                std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 12> kProtocolNames = {
    "WiFi", "Zigbee", "Z-Wave", "Bluetooth", "BLE", "Matter",
    "Thread", "MQTT", "HTTP", "CoAP", "Ethernet", "Modbus"};

constexpr std::array<std::string_view, 5> kKindNames = {"adult", "child", "elderly",
                                                        "teenager", "pet"};

constexpr std::array<std::string_view, 3> kEventKindNames = {"state-change", "telemetry",
                                                             "network-packet"};

constexpr std::array<std::string_view, 2> kVerdictNames = {"benign", "attack"};

constexpr std::array<std::string_view, 6> kPhaseNames = {
    "reconnaissance", "initial_access", "execution", "persistence", "exfiltration", "cleanup"};

constexpr std::array<std::string_view, 4> kPeriodNames = {"morning", "daytime", "evening",
                                                          "night"};

constexpr std::array<std::string_view, 4> kValueTypeNames = {"integer", "real", "string",
                                                             "boolean"};

}  // namespace

std::string_view to_string(Protocol p) { return kProtocolNames[static_cast<std::size_t>(p)]; }
Protocol parse_protocol(std::string_view s) {
  return parse_enum<Protocol>(s, kProtocolNames, "protocol");
}

std::string_view to_string(InhabitantKind k) { return kKindNames[static_cast<std::size_t>(k)]; }
InhabitantKind parse_inhabitant_kind(std::string_view s) {
  return parse_enum<InhabitantKind>(s, kKindNames, "inhabitant kind");
}

std::string_view to_string(EventKind k) { return kEventKindNames[static_cast<std::size_t>(k)]; }
EventKind parse_event_kind(std::string_view s) {
  return parse_enum<EventKind>(s, kEventKindNames, "event kind");
}

std::string_view to_string(Verdict v) { return kVerdictNames[static_cast<std::size_t>(v)]; }
Verdict parse_verdict(std::string_view s) {
  return parse_enum<Verdict>(s, kVerdictNames, "verdict");
}

std::string_view to_string(AttackPhase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }
AttackPhase parse_attack_phase(std::string_view s) {
  return parse_enum<AttackPhase>(s, kPhaseNames, "attack phase");
}

std::string_view to_string(DiurnalPeriod p) { return kPeriodNames[static_cast<std::size_t>(p)]; }
DiurnalPeriod parse_diurnal_period(std::string_view s) {
  return parse_enum<DiurnalPeriod>(s, kPeriodNames, "diurnal period");
}

DiurnalPeriod period_of(SimMillis t) {
  SimMillis tod = t % kMillisPerDay;
  if (tod < 0) tod += kMillisPerDay;
  const SimMillis h = tod / kMillisPerHour;
  if (h >= 6 && h < 9) return DiurnalPeriod::kMorning;
  if (h >= 9 && h < 17) return DiurnalPeriod::kDaytime;
  if (h >= 17 && h < 21) return DiurnalPeriod::kEvening;
  return DiurnalPeriod::kNight;
}

std::string_view to_string(ValueType v) { return kValueTypeNames[static_cast<std::size_t>(v)]; }
ValueType parse_value_type(std::string_view s) {
  return parse_enum<ValueType>(s, kValueTypeNames, "value type");
}

ValueType value_type_of(const PayloadValue& v) {
  switch (v.index()) {
    case 0: return ValueType::kInteger;
    case 1: return ValueType::kReal;
    case 2: return ValueType::kString;
    default: return ValueType::kBoolean;
  }
}

bool event_order_less(const SimulationEvent& a, const SimulationEvent& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.device_id != b.device_id) return a.device_id < b.device_id;
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.scenario_id.value_or("") < b.scenario_id.value_or("");
}

}  // namespace homesim
