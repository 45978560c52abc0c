#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homesim/runtime/simulation.hpp"

namespace homesim {

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kDigestFile = "digests.sha256";
inline constexpr int kArchiveFormatVersion = 1;

/// config.json, traces.json, scenarios.json, events.jsonl, events.csv.
inline constexpr std::array<std::string_view, 5> kArtifactFiles = {
    "config.json", "traces.json", "scenarios.json", "events.jsonl", "events.csv"};

struct Archive {
  ExperimentRecord record;  // digests cover every artifact
  std::map<std::string, std::string> artifacts;  // file name -> bytes
};

/// Serialize a run's outputs and fill the record's digests.
Archive make_archive(const SimulationResult& result);

std::string manifest_text(const Archive& archive);
/// `sha256sum` format over every artifact and the manifest, sorted by name.
std::string digest_text(const Archive& archive);

/// Every file the archive directory holds, manifest and digest file included.
std::map<std::string, std::string> archive_files(const Archive& archive);

/// Writes each file atomically. The directory is created if missing.
void export_archive(const Archive& archive, const std::filesystem::path& dir);

/// Warning text for a readable version skew; throws VersionError across
/// major versions. Older minor versions are read silently.
std::optional<std::string> check_version(std::string_view archived,
                                         std::string_view engine = kEngineVersion);

struct ImportedArchive {
  Archive archive;
  std::vector<std::string> warnings;
};

/// Verify digests, version, and experiment id. Throws IntegrityError naming
/// the first artifact that fails, VersionError on an incompatible major
/// version.
ImportedArchive import_archive(const std::filesystem::path& dir,
                               std::string_view engine = kEngineVersion);

/// Parse a record from manifest JSON without checking any artifact.
ExperimentRecord record_from_manifest(const nlohmann::json& manifest);

}  // namespace homesim
