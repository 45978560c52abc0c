#include "homesim/runtime/archive.hpp"

#include <sstream>

#include "homesim/core/error.hpp"
#include "homesim/core/event_table.hpp"
#include "homesim/core/json_io.hpp"
#include "homesim/runtime/digest.hpp"

namespace homesim {

namespace {

std::string pretty(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Semver {
  int major = 0;
  int minor = 0;
  int patch = 0;
};

Semver parse_semver(std::string_view v) {
  Semver s;
  char dot1 = 0, dot2 = 0;
  std::istringstream in{std::string(v)};
  if (!(in >> s.major >> dot1 >> s.minor >> dot2 >> s.patch) || dot1 != '.' || dot2 != '.')
    throw VersionError("malformed version '" + std::string(v) + "'");
  return s;
}

std::map<std::string, std::string> parse_digest_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto sep = line.find("  ");
    if (sep != 64 || line.size() <= sep + 2)
      throw IntegrityError(std::string(kDigestFile), "malformed line in digest file: " + line);
    out[line.substr(sep + 2)] = line.substr(0, sep);
  }
  return out;
}

}  // namespace

Archive make_archive(const SimulationResult& result) {
  Archive a;
  a.record = result.record;
  const behavior::ActivityModel model(result.home.behavior);
  a.artifacts["config.json"] = pretty(nlohmann::json(result.home));
  a.artifacts["traces.json"] = pretty(behavior::traces_to_json(result.traces, model, result.home.rooms));
  a.artifacts["scenarios.json"] = pretty(nlohmann::json(result.scenarios));
  a.artifacts["events.jsonl"] = events_to_jsonl(result.events);
  a.artifacts["events.csv"] = events_to_csv(result.events);
  a.record.digests.clear();
  for (const auto& [name, bytes] : a.artifacts) a.record.digests[name] = sha256_hex(bytes);
  return a;
}

std::string manifest_text(const Archive& archive) {
  const auto& r = archive.record;
  nlohmann::json artifacts = nlohmann::json::object();
  for (const auto& [name, digest] : r.digests) {
    auto it = archive.artifacts.find(name);
    artifacts[name] = {{"sha256", digest},
                       {"bytes", it == archive.artifacts.end() ? 0 : it->second.size()}};
  }
  const nlohmann::json j = {
      {"format_version", kArchiveFormatVersion},
      {"exp_id", r.exp_id},
      {"seed", r.seed},
      {"engine_version", r.engine_version},
      {"catalog_version", r.catalog_version},
      {"timestamp", r.timestamp},
      {"parameters", r.params},
      {"real_time_s", millis_to_seconds(r.params.duration) / r.params.compression},
      {"counts", {{"events", r.event_count}, {"attack_events", r.attack_event_count}}},
      {"artifacts", artifacts}};
  return pretty(j);
}

std::string digest_text(const Archive& archive) {
  std::map<std::string, std::string> lines = archive.record.digests;
  lines[std::string(kManifestFile)] = sha256_hex(manifest_text(archive));
  std::string out;
  for (const auto& [name, digest] : lines) out += digest + "  " + name + "\n";
  return out;
}

std::map<std::string, std::string> archive_files(const Archive& archive) {
  auto files = archive.artifacts;
  files[std::string(kManifestFile)] = manifest_text(archive);
  files[std::string(kDigestFile)] = digest_text(archive);
  return files;
}

void export_archive(const Archive& archive, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  // Manifest and digest file last, so a partial export never verifies.
  for (const auto& [name, bytes] : archive.artifacts) write_file_atomic(dir / name, bytes);
  write_file_atomic(dir / kManifestFile, manifest_text(archive));
  write_file_atomic(dir / kDigestFile, digest_text(archive));
}

std::optional<std::string> check_version(std::string_view archived, std::string_view engine) {
  const auto a = parse_semver(archived);
  const auto e = parse_semver(engine);
  if (a.major != e.major)
    throw VersionError("archive engine version " + std::string(archived) +
                       " is incompatible with engine " + std::string(engine));
  if (a.minor > e.minor || (a.minor == e.minor && a.patch > e.patch))
    return "archive written by newer engine " + std::string(archived) + " (running " +
           std::string(engine) + "); reading it anyway";
  return std::nullopt;
}

ExperimentRecord record_from_manifest(const nlohmann::json& m) {
  ExperimentRecord r;
  m.at("exp_id").get_to(r.exp_id);
  r.seed = m.at("seed").get<std::uint64_t>();
  r.params = m.at("parameters").get<SimulationParameters>();
  m.at("engine_version").get_to(r.engine_version);
  m.at("catalog_version").get_to(r.catalog_version);
  m.at("timestamp").get_to(r.timestamp);
  r.event_count = m.at("counts").at("events").get<std::size_t>();
  r.attack_event_count = m.at("counts").at("attack_events").get<std::size_t>();
  for (const auto& [name, entry] : m.at("artifacts").items()) r.digests[name] = entry.at("sha256").get<std::string>();
  return r;
}

ImportedArchive import_archive(const std::filesystem::path& dir, std::string_view engine) {
  namespace fs = std::filesystem;
  const auto manifest_name = std::string(kManifestFile);
  const auto digest_name = std::string(kDigestFile);
  if (!fs::is_directory(dir)) throw ValidationError("archive '" + dir.string() + "' is not a directory");
  for (const auto& name : {manifest_name, digest_name})
    if (!fs::is_regular_file(dir / name)) throw IntegrityError(name, "archive is missing " + name);

  const auto listed = parse_digest_text(read_file(dir / digest_name));
  const auto manifest_bytes = read_file(dir / manifest_name);
  auto lm = listed.find(manifest_name);
  if (lm == listed.end()) throw IntegrityError(digest_name, "digest file does not cover the manifest");
  if (lm->second != sha256_hex(manifest_bytes))
    throw IntegrityError(manifest_name, "manifest.json does not match its recorded digest");

  nlohmann::json manifest;
  ImportedArchive out;
  try {
    manifest = nlohmann::json::parse(manifest_bytes);
    if (manifest.at("format_version").get<int>() != kArchiveFormatVersion)
      throw VersionError("unsupported archive format version");
  } catch (const nlohmann::json::exception& ex) {
    throw IntegrityError(manifest_name, std::string("unreadable manifest: ") + ex.what());
  }
  if (auto warning = check_version(manifest.at("engine_version").get<std::string>(), engine))
    out.warnings.push_back(*warning);
  try {
    out.archive.record = record_from_manifest(manifest);
  } catch (const nlohmann::json::exception& ex) {
    throw IntegrityError(manifest_name, std::string("unreadable manifest: ") + ex.what());
  }
  auto& rec = out.archive.record;

  for (const auto& [name, digest] : rec.digests) {
    if (name.find('/') != std::string::npos || name.find("..") != std::string::npos)
      throw IntegrityError(name, "artifact name escapes the archive");
    if (!fs::is_regular_file(dir / name)) throw IntegrityError(name, "archive is missing " + name);
    auto bytes = read_file(dir / name);
    if (sha256_hex(bytes) != digest) throw IntegrityError(name, name + " does not match its recorded digest");
    auto it = listed.find(name);
    if (it == listed.end() || it->second != digest)
      throw IntegrityError(digest_name, "digest file disagrees with the manifest on " + name);
    out.archive.artifacts[name] = std::move(bytes);
  }
  if (listed.size() != rec.digests.size() + 1)
    throw IntegrityError(digest_name, "digest file lists artifacts the manifest does not");
  if (experiment_id(rec.seed, rec.params, rec.engine_version) != rec.exp_id)
    throw IntegrityError(manifest_name, "experiment id does not match the recorded seed and parameters");
  return out;
}

}  // namespace homesim
