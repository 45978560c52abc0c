#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "homesim/core/threat_spec.hpp"
#include "homesim/core/types.hpp"

namespace homesim {

inline constexpr int kCatalogSchemaVersion = 1;
inline constexpr std::size_t kRoomTypeCount = 15;
inline constexpr std::size_t kCategoryCount = 16;
inline constexpr std::size_t kActivityCount = 16;
inline constexpr std::size_t kThreatCategoryCount = 7;

struct RoomTypeDef {
  std::string id;
  int capacity = 6;
};

struct CategoryDef {
  std::string id;
  double base_density = 0.0;
  bool room_bound = true;  // false: home-wide devices reachable from any room
};

/// (device category, room type) -> compatibility in [0,1]; absent pairs are 0.
class CompatibilityMatrix {
 public:
  void set(const std::string& category, const std::string& room_type, double value);
  double at(std::string_view category, std::string_view room_type) const;
  const std::map<std::pair<std::string, std::string>, double>& entries() const {
    return entries_;
  }

 private:
  std::map<std::pair<std::string, std::string>, double> entries_;
};

struct ActivityDef {
  std::string id;
  std::vector<std::string> preferred_rooms;
  std::map<std::string, double> category_affinity;
  double default_affinity = 0.2;
  double persistence = 0.9;  // self-transition probability per tick
};

struct PeriodDef {
  DiurnalPeriod period = DiurnalPeriod::kMorning;
  int start_minute = 0;
  int end_minute = 0;
  double temporal_factor = 1.0;
};

struct SuccessorBias {
  std::string from;
  std::string to;
  double factor = 1.0;
  std::vector<DiurnalPeriod> periods;  // empty: all periods
};

struct KindDefaults {
  int wake_minute = 6 * 60;
  int sleep_minute = 22 * 60;
  std::optional<std::pair<int, int>> work_minutes;
  double work_from_home_probability = 0.0;
  std::pair<double, double> tech_savviness{0.0, 1.0};
  std::vector<std::string> operable_categories;  // empty: all categories
};

struct ActivityCatalog {
  std::vector<ActivityDef> activities;
  std::array<PeriodDef, kPeriodCount> periods{};
  std::map<DiurnalPeriod, std::vector<double>> period_weights;
  std::map<InhabitantKind, std::map<std::string, double>> kind_multipliers;
  std::vector<SuccessorBias> successor_bias;
  std::map<InhabitantKind, KindDefaults> kinds;

  std::size_t index_of(std::string_view activity) const;
};

struct ThreatRegistry {
  std::vector<std::string> categories;
  std::map<AttackPhase, std::string> phase_tactics;
  double k_rate = 2.0;
  double k_stealth = 1.0;
  double theta_vuln = 0.5;
  double confidence_floor = 0.5;
  std::map<std::string, std::map<std::string, double>> vulnerability;
  std::vector<ThreatSpec> threats;

  const ThreatSpec& find(std::string_view threat_type) const;
  /// vuln(threat category, device category); absent pairs are 0.
  double vulnerability_of(std::string_view threat_category,
                          std::string_view device_category) const;
};

/// Raw catalog documents, one JSON value per file.
struct CatalogDocuments {
  nlohmann::json manifest;
  nlohmann::json protocols;
  nlohmann::json rooms;
  nlohmann::json devices;
  nlohmann::json templates;
  nlohmann::json activities;
  nlohmann::json threats;
};

/// Immutable bundle of every data catalog.
class Catalogs {
 public:
  int schema_version = kCatalogSchemaVersion;
  std::string version;
  std::vector<Protocol> protocols;
  std::map<std::string, std::vector<Protocol>> protocol_families;
  std::vector<RoomTypeDef> room_types;
  std::vector<CategoryDef> categories;
  std::vector<DeviceCatalogEntry> devices;
  std::size_t declared_device_count = 0;
  CompatibilityMatrix compat;
  std::vector<ResidenceTemplate> templates;
  ActivityCatalog activities;
  ThreatRegistry threats;

  const DeviceCatalogEntry& device(std::string_view type_name) const;
  bool has_device(std::string_view type_name) const;
  const RoomTypeDef& room_type(std::string_view id) const;
  bool has_room_type(std::string_view id) const;
  const CategoryDef& category(std::string_view id) const;
  bool has_category(std::string_view id) const;
  const ResidenceTemplate* find_template(std::string_view name) const;
  /// Protocol family name for `p`, e.g. "ip" for WiFi.
  const std::string& family_of(Protocol p) const;

  /// Rebuild lookup indexes; call after mutating the public vectors.
  void reindex();

 private:
  std::map<std::string, std::size_t, std::less<>> device_index_;
  std::map<std::string, std::size_t, std::less<>> room_index_;
  std::map<std::string, std::size_t, std::less<>> category_index_;
};

CatalogDocuments read_catalog_documents(const std::filesystem::path& dir);

/// Validate and assemble a catalog bundle. Throws CatalogError on any violation.
Catalogs parse_catalogs(const CatalogDocuments& docs);

Catalogs load_catalogs(const std::filesystem::path& dir);

/// Directory of the catalog shipped with the project.
std::filesystem::path default_catalog_dir();

/// Parse "HH:MM" into minutes of day.
int parse_clock(std::string_view hhmm);
std::string format_clock(int minute_of_day);

}  // namespace homesim
