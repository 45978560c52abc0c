#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace homesim {

/// Simulated time in milliseconds since the start of the simulation window.
/// The window starts at local midnight, so `t % kMillisPerDay` is time of day.
using SimMillis = std::int64_t;

inline constexpr SimMillis kMillisPerSecond = 1000;
inline constexpr SimMillis kMillisPerMinute = 60 * kMillisPerSecond;
inline constexpr SimMillis kMillisPerHour = 60 * kMillisPerMinute;
inline constexpr SimMillis kMillisPerDay = 24 * kMillisPerHour;

// ---------------------------------------------------------------------------
// Enumerations

enum class Protocol : std::uint8_t {
  kWiFi,
  kZigbee,
  kZWave,
  kBluetooth,
  kBLE,
  kMatter,
  kThread,
  kMQTT,
  kHTTP,
  kCoAP,
  kEthernet,
  kModbus,
};

inline constexpr std::array<Protocol, 12> kAllProtocols = {
    Protocol::kWiFi,  Protocol::kZigbee, Protocol::kZWave,    Protocol::kBluetooth,
    Protocol::kBLE,   Protocol::kMatter, Protocol::kThread,   Protocol::kMQTT,
    Protocol::kHTTP,  Protocol::kCoAP,   Protocol::kEthernet, Protocol::kModbus,
};

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

enum class InhabitantKind : std::uint8_t { kAdult, kChild, kElderly, kTeenager, kPet };

inline constexpr std::array<InhabitantKind, 5> kAllInhabitantKinds = {
    InhabitantKind::kAdult, InhabitantKind::kChild, InhabitantKind::kElderly,
    InhabitantKind::kTeenager, InhabitantKind::kPet};

std::string_view to_string(InhabitantKind k);
InhabitantKind parse_inhabitant_kind(std::string_view s);

enum class EventKind : std::uint8_t { kStateChange, kTelemetry, kNetworkPacket };

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);

enum class Verdict : std::uint8_t { kBenign, kAttack };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view s);

/// Kill-chain phases in canonical order.
enum class AttackPhase : std::uint8_t {
  kReconnaissance,
  kInitialAccess,
  kExecution,
  kPersistence,
  kExfiltration,
  kCleanup,
};

inline constexpr std::size_t kPhaseCount = 6;
inline constexpr std::array<AttackPhase, kPhaseCount> kCanonicalPhases = {
    AttackPhase::kReconnaissance, AttackPhase::kInitialAccess, AttackPhase::kExecution,
    AttackPhase::kPersistence,    AttackPhase::kExfiltration,  AttackPhase::kCleanup};

std::string_view to_string(AttackPhase p);
AttackPhase parse_attack_phase(std::string_view s);

inline constexpr int phase_index(AttackPhase p) { return static_cast<int>(p); }

/// Diurnal periods: half-open [start, end) intervals of the day.
enum class DiurnalPeriod : std::uint8_t { kMorning, kDaytime, kEvening, kNight };

inline constexpr std::size_t kPeriodCount = 4;

std::string_view to_string(DiurnalPeriod p);
DiurnalPeriod parse_diurnal_period(std::string_view s);

/// morning [06,09), daytime [09,17), evening [17,21), night [21,06).
DiurnalPeriod period_of(SimMillis t);

enum class ValueType : std::uint8_t { kInteger, kReal, kString, kBoolean };

std::string_view to_string(ValueType v);
ValueType parse_value_type(std::string_view s);

// ---------------------------------------------------------------------------
// Home model

struct ResidenceTemplate {
  std::string name;
  std::string display_name;
  int room_count = 1;
  double floor_area = 1.0;  // m^2
  std::pair<double, double> device_density_bounds{0.0, 1.0};  // devices per m^2
  std::map<std::string, double> room_type_distribution;
  int default_inhabitants = 1;
  std::vector<InhabitantKind> inhabitant_kinds;
  std::optional<int> pinned_device_count;

  bool operator==(const ResidenceTemplate&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Room {
  std::string id;
  std::string room_type;
  double area = 0.0;
  Point2 coordinates;
  std::vector<std::string> adjacency;  // sorted room ids
  int capacity = 1;

  bool operator==(const Room&) const = default;
};

struct TelemetryField {
  std::string name;
  ValueType type = ValueType::kReal;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const TelemetryField&) const = default;
};

struct DeviceCatalogEntry {
  std::string type_name;
  std::string category;
  std::vector<Protocol> protocols;  // first entry is the preferred protocol
  std::map<std::string, double> power_profile;  // watts by state
  std::vector<std::string> states;
  std::vector<std::pair<std::string, std::string>> transitions;
  double base_density = 0.0;  // lambda_c of the category, devices per m^2
  double prevalence = 1.0;    // relative weight within the category
  std::vector<TelemetryField> value_ranges;
  double telemetry_interval_s = 3600.0;
  double interaction_probability = 0.0;  // per behaviour tick at full activation
  bool hub_capable = false;

  bool operator==(const DeviceCatalogEntry&) const = default;
};

struct DeviceInstance {
  std::string id;
  std::string type_name;
  std::string room_id;
  std::string network_address;

  bool operator==(const DeviceInstance&) const = default;
};

struct Schedule {
  int wake_minute = 6 * 60;
  int sleep_minute = 22 * 60;
  std::optional<std::pair<int, int>> work_minutes;  // [start, end) minutes of day
  bool work_from_home = false;

  bool operator==(const Schedule&) const = default;
};

struct InhabitantProfile {
  std::string id;
  InhabitantKind kind = InhabitantKind::kAdult;
  Schedule schedule;
  double tech_savviness = 0.5;
  double variation_sigma = 0.1;

  bool operator==(const InhabitantProfile&) const = default;
};

/// Row-major square matrix of transition probabilities.
struct TransitionMatrix {
  std::size_t size = 0;
  std::vector<double> values;

  double at(std::size_t from, std::size_t to) const { return values[from * size + to]; }
  double& at(std::size_t from, std::size_t to) { return values[from * size + to]; }

  bool operator==(const TransitionMatrix&) const = default;
};

/// Markov matrices and interaction-likelihood parameters attached to a home.
struct BehaviorParams {
  std::vector<std::string> activities;
  // kind -> one matrix per diurnal period
  std::map<InhabitantKind, std::array<TransitionMatrix, kPeriodCount>> matrices;
  std::array<double, kPeriodCount> temporal_factor{1.0, 1.0, 1.0, 1.0};
  double tech_floor = 0.1;
  double tech_slope = 0.9;
  int tick_seconds = 60;
  int presence_slot_minutes = 30;

  bool operator==(const BehaviorParams&) const = default;
};

struct HomeConfiguration {
  ResidenceTemplate residence;
  std::vector<Room> rooms;
  std::vector<DeviceInstance> devices;
  std::map<std::string, std::vector<std::string>> network;  // device id -> peers, sorted
  std::map<std::string, std::string> hubs;                  // protocol family -> hub id
  std::vector<InhabitantProfile> inhabitants;
  BehaviorParams behavior;
  std::uint64_t seed = 0;
  std::string catalog_version;

  bool operator==(const HomeConfiguration&) const = default;
};

// ---------------------------------------------------------------------------
// Events and labels

inline constexpr int kMaxTaxonomyLevel = 7;

struct Label {
  Verdict verdict = Verdict::kBenign;
  std::optional<std::string> threat_type;
  std::optional<std::string> attack_technique;
  double confidence = 1.0;
  std::vector<std::string> taxonomy_path;

  bool operator==(const Label&) const = default;
};

using PayloadValue = std::variant<std::int64_t, double, std::string, bool>;
using Payload = std::map<std::string, PayloadValue>;

ValueType value_type_of(const PayloadValue& v);

struct SimulationEvent {
  SimMillis timestamp = 0;
  std::string device_id;
  std::string device_type;
  std::string category;
  std::string room;
  Protocol protocol = Protocol::kWiFi;
  EventKind kind = EventKind::kTelemetry;
  Payload payload;
  std::optional<std::string> inhabitant;
  std::optional<std::string> scenario_id;  // set only for attack emissions
  std::optional<AttackPhase> phase;
  Label label;

  bool operator==(const SimulationEvent&) const = default;
};

/// Log order: timestamp, then device id, then event kind, then scenario id.
bool event_order_less(const SimulationEvent& a, const SimulationEvent& b);

}  // namespace homesim
