#include "homesim/cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "homesim/core/error.hpp"
#include "homesim/core/event_table.hpp"
#include "homesim/core/json_io.hpp"
#include "homesim/home/generator.hpp"
#include "homesim/knowledge/knowledge.hpp"
#include "homesim/metrics/metrics.hpp"
#include "homesim/runtime/archive.hpp"
#include "homesim/runtime/digest.hpp"
#include "homesim/runtime/sweep.hpp"
#include "homesim/verify/verify.hpp"

namespace homesim::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ValidationError("no such file: " + path.string());
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + " is not valid JSON: " + e.what());
  }
}

template <class T>
T typed(const json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Tables: CSV to files, CSV or JSON lines to stdout.

enum class Format { kJsonl, kCsv };

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string csv_cell(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.is_null() ? "" : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_cell(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

std::string to_jsonl(const Table& t) {
  std::string out;
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = row[i];
    out += obj.dump() + "\n";
  }
  return out;
}

std::string render(const Table& t, Format f) { return f == Format::kCsv ? to_csv(t) : to_jsonl(t); }

// ---------------------------------------------------------------------------
// Shared state

struct Global {
  std::uint64_t seed = 42;
  std::string catalog;
  std::string out;
  std::string format = "csv";
  std::vector<std::string> argv;

  std::optional<Catalogs> loaded;

  const Catalogs& catalogs() {
    if (!loaded) loaded = load_catalogs(catalog.empty() ? default_catalog_dir() : fs::path(catalog));
    return *loaded;
  }
  Format table_format() const { return format == "jsonl" ? Format::kJsonl : Format::kCsv; }
  fs::path require_out(const std::string& command) const {
    if (out.empty()) throw ValidationError(command + " needs --out");
    return out;
  }
};

struct RunFlags {
  std::string params_file;
  std::string template_name;
  double hours = 0, duration_s = 0, compression = 0, room_mult = 0, density_mult = 0, gamma = 0, theta = 0;
  int taxonomy_level = 0;
  std::vector<std::string> threats;
  std::string window, targets, protocols;
  bool dump_traces = false;

  CLI::Option *o_hours = nullptr, *o_duration = nullptr, *o_compression = nullptr, *o_room = nullptr,
              *o_density = nullptr, *o_gamma = nullptr, *o_theta = nullptr, *o_level = nullptr;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--params", f.params_file, "parameter file (JSON); flags override it");
  cmd->add_option("--template", f.template_name, "residence template");
  f.o_hours = cmd->add_option("--hours", f.hours, "simulated hours");
  f.o_duration = cmd->add_option("--duration-s", f.duration_s, "simulated seconds");
  f.o_compression = cmd->add_option("--compression", f.compression, "time compression factor (metadata)");
  f.o_room = cmd->add_option("--room-multiplier", f.room_mult, "room count multiplier");
  f.o_density = cmd->add_option("--density-multiplier", f.density_mult, "device density multiplier");
  cmd->add_option("--protocols", f.protocols, "comma-separated enabled protocols");
  cmd->add_option("--threat", f.threats, "threat type to inject (repeatable)");
  f.o_gamma = cmd->add_option("--gamma", f.gamma, "attack intensity in [0, 1], applied to every threat");
  f.o_theta = cmd->add_option("--theta", f.theta, "vulnerability threshold in [0, 1], applied to every threat");
  cmd->add_option("--window", f.window, "attack window HH:MM-HH:MM or <s>-<s>");
  cmd->add_option("--targets", f.targets, "comma-separated target device ids");
  f.o_level = cmd->add_option("--taxonomy-level", f.taxonomy_level, "label taxonomy depth 1..7");
}

SimulationParameters build_params(const RunFlags& f) {
  SimulationParameters p;
  if (!f.params_file.empty()) p = typed<SimulationParameters>(read_json_file(f.params_file), f.params_file);
  if (!f.template_name.empty()) p.home.template_name = f.template_name;
  if (f.o_hours->count()) apply_override(p, "hours", f.hours);
  if (f.o_duration->count()) apply_override(p, "duration_s", f.duration_s);
  if (f.o_compression->count()) apply_override(p, "compression", f.compression);
  if (f.o_room->count()) apply_override(p, "room_count_multiplier", f.room_mult);
  if (f.o_density->count()) apply_override(p, "density_multiplier", f.density_mult);
  if (f.o_level->count()) p.taxonomy_level = f.taxonomy_level;
  if (!f.protocols.empty()) {
    p.protocols.clear();
    for (const auto& name : split(f.protocols, ',')) p.protocols.push_back(parse_protocol(name));
  }
  for (const auto& name : f.threats) {
    ScenarioRequest r;
    r.threat = name;
    p.threats.push_back(r);
  }
  if (f.o_gamma->count()) {
    if (!(f.gamma >= 0.0 && f.gamma <= 1.0))
      throw ValidationError("--gamma " + CLI::detail::to_string(f.gamma) + " outside [0, 1]");
    for (auto& t : p.threats) t.gamma = f.gamma;
  }
  if (f.o_theta->count()) {
    if (!(f.theta >= 0.0 && f.theta <= 1.0))
      throw ValidationError("--theta " + CLI::detail::to_string(f.theta) + " outside [0, 1]");
    for (auto& t : p.threats) t.theta_vuln = f.theta;
  }
  if (!f.window.empty()) {
    const auto w = parse_window(f.window);
    for (auto& t : p.threats) t.window = w;
  }
  if (!f.targets.empty()) {
    const auto ids = split(f.targets, ',');
    for (auto& t : p.threats) t.targets = ids;
  }
  return p;
}

json run_manifest(const Global& g, const std::string& command, const ExperimentRecord& record,
                  const std::map<std::string, std::string>& files) {
  return {{"command", command},
          {"argv", g.argv},
          {"config", kParametersFile},
          {"seed", record.seed},
          {"out", g.out},
          {"exp_id", record.exp_id},
          {"engine_version", record.engine_version},
          {"catalog_version", record.catalog_version},
          {"files", files},
          {"exit_status", kExitOk}};
}

/// Archive plus resolved parameters plus run manifest, the manifest last.
void write_outputs(const Global& g, const std::string& command, const Archive& archive, const fs::path& dir) {
  export_archive(archive, dir);
  const auto params_text = pretty(json(archive.record.params));
  write_file_atomic(dir / kParametersFile, params_text);
  auto files = archive.record.digests;
  files[std::string(kParametersFile)] = sha256_hex(params_text);
  write_file_atomic(dir / kRunManifestFile, pretty(run_manifest(g, command, archive.record, files)));
}

// ---------------------------------------------------------------------------
// Commands

int cmd_generate(Global& g, const RunFlags& f, std::ostream& out) {
  home::GenerationRequest req;
  if (!f.template_name.empty()) req.template_name = f.template_name;
  req.seed = g.seed;
  if (f.o_room->count()) req.room_count_multiplier = f.room_mult;
  if (f.o_density->count()) req.density_multiplier = f.density_mult;
  const auto home = home::generate_home(req, g.catalogs());
  const auto text = pretty(json(home));
  if (g.out.empty()) {
    out << text;
    return kExitOk;
  }
  const fs::path dir = g.out;
  fs::create_directories(dir);
  write_file_atomic(dir / "home.json", text);
  out << home.residence.name << ": " << home.rooms.size() << " rooms, " << home.devices.size() << " devices, "
      << home.inhabitants.size() << " inhabitants -> " << (dir / "home.json").string() << "\n";
  return kExitOk;
}

int cmd_run(Global& g, const RunFlags& f, const std::string& command, std::ostream& out) {
  const auto params = build_params(f);
  if (command == "inject" && params.threats.empty())
    throw ValidationError("inject needs --threat or threats in --params");
  const auto dir = g.require_out(command);
  const auto result = run_simulation(params, g.seed, g.catalogs());
  const auto archive = make_archive(result);
  write_outputs(g, command, archive, dir);
  out << command << " " << result.record.exp_id.substr(0, 12) << ": " << result.events.size() << " events ("
      << result.record.attack_event_count << " attack) from " << result.home.devices.size() << " devices -> "
      << dir.string() << "\n";
  if (f.dump_traces) out << archive.artifacts.at("traces.json");
  return kExitOk;
}

int cmd_export(Global& g, const std::string& source, std::ostream& out, std::ostream& err) {
  const auto dir = g.require_out("export");
  auto imported = import_archive(source);
  for (const auto& w : imported.warnings) err << "homesim: warning: " << w << "\n";
  write_outputs(g, "export", imported.archive, dir);
  out << "exported " << imported.archive.record.exp_id.substr(0, 12) << " -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_import(Global& g, const std::string& source, std::ostream& out, std::ostream& err) {
  auto imported = import_archive(source);
  for (const auto& w : imported.warnings) err << "homesim: warning: " << w << "\n";
  const auto& r = imported.archive.record;
  out << "archive " << r.exp_id << "\n"
      << "  seed " << r.seed << ", template " << r.params.home.template_name << ", engine " << r.engine_version
      << ", catalog " << r.catalog_version << "\n"
      << "  " << r.event_count << " events (" << r.attack_event_count << " attack), " << r.digests.size()
      << " artifacts verified\n";
  if (!g.out.empty()) {
    write_outputs(g, "import", imported.archive, g.out);
    out << "  copied -> " << g.out << "\n";
  }
  return kExitOk;
}

int cmd_reproduce(Global& g, const std::string& target, std::ostream& out, std::ostream& err) {
  const fs::path p = target;
  const fs::path dir = fs::is_directory(p) ? p : p.parent_path();
  std::uint64_t seed = 0;
  SimulationParameters params;
  std::string engine, catalog_version;
  const fs::path run_file = fs::is_regular_file(p) ? p : dir / kRunManifestFile;
  if (fs::is_regular_file(run_file) && run_file.filename() != kManifestFile) {
    const auto m = read_json_file(run_file);
    seed = typed<std::uint64_t>(m.at("seed"), "run manifest seed");
    engine = typed<std::string>(m.at("engine_version"), "run manifest engine_version");
    catalog_version = typed<std::string>(m.at("catalog_version"), "run manifest catalog_version");
    const auto config = dir / typed<std::string>(m.at("config"), "run manifest config");
    params = typed<SimulationParameters>(read_json_file(config), config.string());
  } else if (fs::is_regular_file(dir / kManifestFile)) {
    const auto record = record_from_manifest(read_json_file(dir / kManifestFile));
    seed = record.seed;
    params = record.params;
    engine = record.engine_version;
    catalog_version = record.catalog_version;
  } else {
    throw ValidationError("no run manifest or archive manifest at " + target);
  }
  if (auto warning = check_version(engine)) err << "homesim: warning: " << *warning << "\n";
  if (catalog_version != g.catalogs().version)
    throw VersionError("outputs were produced with catalog " + catalog_version + ", loaded catalog is " +
                       g.catalogs().version);

  const auto files = archive_files(make_archive(run_simulation(params, seed, g.catalogs())));
  std::vector<std::string> diffs;
  for (const auto& [name, bytes] : files) {
    const auto path = dir / name;
    if (!fs::is_regular_file(path)) {
      diffs.push_back("missing  " + name);
      continue;
    }
    const auto found = read_file(path);
    if (found == bytes) continue;
    std::size_t at = 0;
    while (at < found.size() && at < bytes.size() && found[at] == bytes[at]) ++at;
    diffs.push_back("differs  " + name + " (first difference at byte " + std::to_string(at) + ", expected " +
                    std::to_string(bytes.size()) + " bytes, found " + std::to_string(found.size()) + ")");
  }
  if (diffs.empty()) {
    out << "reproduced " << files.size() << " files byte-identically\n";
    return kExitOk;
  }
  err << "homesim: reproduce diverged in " << diffs.size() << " of " << files.size() << " files\n";
  for (const auto& d : diffs) err << "  " << d << "\n";
  return kExitValidation;
}

json parse_vary_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

int cmd_sweep(Global& g, const RunFlags& f, const std::string& grid_file, const std::vector<std::string>& vary,
              std::ostream& out) {
  SweepGrid grid;
  if (!grid_file.empty()) grid = sweep_grid_from_json(read_json_file(grid_file));
  for (const auto& spec : vary) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--vary expects key=v1,v2: " + spec);
    const auto key = spec.substr(0, eq);
    if (grid.count(key)) throw ValidationError("sweep key given twice: " + key);
    auto& values = grid[key];
    for (const auto& v : split(spec.substr(eq + 1), ',')) values.push_back(parse_vary_value(v));
  }
  const auto base = build_params(f);
  const auto points = expand_sweep(base, grid, g.seed);
  const fs::path dir = g.require_out("sweep");

  Table table{{"index", "seed", "assignment", "exp_id", "events", "attack_events", "dir"}, {}};
  json summary_points = json::array();
  for (const auto& point : points) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%04zu", point.index);
    const auto result = run_simulation(point.params, point.seed, g.catalogs());
    write_outputs(g, "sweep", make_archive(result), dir / name);
    const json assignment(point.assignment);
    table.rows.push_back({point.index, point.seed, assignment.dump(), result.record.exp_id, result.events.size(),
                          result.record.attack_event_count, name});
    summary_points.push_back(
        {{"index", point.index}, {"seed", point.seed}, {"assignment", assignment}, {"exp_id", result.record.exp_id},
         {"dir", name}});
  }
  json summary{{"seed_base", g.seed}, {"grid", grid}, {"points", summary_points}};
  write_file_atomic(dir / "sweep.json", pretty(summary));
  write_file_atomic(dir / "sweep.csv", to_csv(table));
  out << render(table, g.table_format());
  return kExitOk;
}

std::shared_ptr<const knowledge::EmbeddingProvider> reference_provider() {
  return std::make_shared<knowledge::HashingProvider>();
}

std::unique_ptr<knowledge::KnowledgeIndex> open_index(const fs::path& dir) {
  if (!fs::is_regular_file(dir / "meta.json")) throw ValidationError("no knowledge index at " + dir.string());
  return knowledge::KnowledgeIndex::load(dir, reference_provider());
}

int cmd_verify(Global& g, const std::string& artifact_path, const std::string& kb_dir, const std::string& report,
               std::size_t k, std::ostream& out) {
  const auto artifact = verify::load_artifact(artifact_path);
  std::unique_ptr<knowledge::KnowledgeIndex> kb;
  if (!kb_dir.empty()) kb = open_index(kb_dir);
  const auto v = verify::verify_artifact(artifact, verify::Context{&g.catalogs(), kb.get(), k});

  out << "artifact " << artifact.name << " (" << verify::artifact_kind_name(artifact.kind) << ")\n";
  for (const auto& r : v.reports) {
    int errors = 0, warnings = 0;
    for (const auto& f : r.findings) {
      errors += f.severity == verify::Severity::kError;
      warnings += f.severity == verify::Severity::kWarning;
    }
    char line[128];
    std::snprintf(line, sizeof line, "  %-9s %s  (%d errors, %d warnings)\n",
                  std::string(verify::stage_name(r.stage)).c_str(), fixed(r.score).c_str(), errors, warnings);
    out << line;
  }
  out << "confidence " << fixed(v.confidence, 4) << "\n"
      << "decision " << verify::outcome_name(v.decision.outcome) << "\n"
      << v.decision.explanation << "\n";

  fs::path report_path = report;
  if (report_path.empty() && !g.out.empty()) report_path = fs::path(g.out) / "verification.json";
  if (!report_path.empty()) {
    auto j = verify::to_json(v);
    j["artifact"] = {{"name", artifact.name}, {"kind", verify::artifact_kind_name(artifact.kind)}};
    if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
    write_file_atomic(report_path, pretty(j));
  }
  return v.decision.outcome == verify::Outcome::kReject ? kExitValidation : kExitOk;
}

int cmd_kb_ingest(Global& g, const std::vector<std::string>& files, const std::string& adapter_name,
                  const std::string& id, std::ostream& out) {
  const fs::path dir = g.require_out("kb ingest");
  if (!id.empty() && files.size() != 1) throw ValidationError("--id needs exactly one input file");
  const auto adapter = knowledge::parse_adapter(adapter_name);
  auto index = fs::is_regular_file(dir / "meta.json") ? open_index(dir)
                                                      : std::make_unique<knowledge::KnowledgeIndex>(reference_provider());
  std::size_t chunks = 0;
  for (const auto& file : files)
    chunks += index->ingest_file(file, adapter, id.empty() ? std::nullopt : std::optional<std::string>(id));
  index->save(dir);
  out << "ingested " << files.size() << " documents (" << chunks << " chunks); index holds "
      << index->document_count() << " documents, " << index->chunk_count() << " chunks\n";
  return kExitOk;
}

int cmd_kb_query(Global& g, const std::string& index_dir, const std::vector<std::string>& words,
                 const std::string& mode, std::size_t k, std::ostream& out) {
  std::string query;
  for (const auto& w : words) query += (query.empty() ? "" : " ") + w;
  const auto index = open_index(index_dir);
  Table table{{"rank", "chunk_id", "document_id", "score", "semantic_rank", "keyword_rank", "text"}, {}};
  std::size_t rank = 0;
  for (const auto& r : index->retrieve(query, k, knowledge::parse_mode(mode))) {
    std::string snippet;
    for (std::size_t i = 0; i < r.chunk->tokens.size() && i < 12; ++i) snippet += (i ? " " : "") + r.chunk->tokens[i];
    const auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
    table.rows.push_back({++rank, r.chunk->id, r.chunk->document_id, r.score, opt(r.semantic_rank),
                          opt(r.keyword_rank), snippet});
  }
  out << render(table, g.table_format());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Evaluation

struct LoadedRun {
  std::string name;
  std::string template_name = "-";
  std::vector<SimulationEvent> events;
  std::optional<std::vector<threat::AttackScenario>> scenarios;
};

LoadedRun load_run(const std::string& input, std::ostream& err) {
  const fs::path p = input;
  LoadedRun run;
  run.name = p.filename().empty() ? p.parent_path().filename().string() : p.filename().string();
  if (fs::is_directory(p)) {
    auto imported = import_archive(p);
    for (const auto& w : imported.warnings) err << "homesim: warning: " << w << "\n";
    const auto& a = imported.archive;
    run.template_name = a.record.params.home.template_name;
    run.events = events_from_jsonl(a.artifacts.at("events.jsonl"));
    run.scenarios = typed<std::vector<threat::AttackScenario>>(json::parse(a.artifacts.at("scenarios.json")),
                                                               "scenarios.json");
    return run;
  }
  if (p.extension() != ".jsonl") throw ValidationError("expected an archive directory or a .jsonl event log: " + input);
  if (!fs::is_regular_file(p)) throw ValidationError("no such file: " + input);
  run.events = events_from_jsonl(read_file(p));
  return run;
}

Table eval_threat(const std::vector<LoadedRun>& runs, const Catalogs& c) {
  Table t{{"input", "scenario", "threat_type", "abc_matched", "abc_total", "abc_coverage", "abc_pass", "alf_phases",
           "alf_coverage", "alf_order_valid", "alf_pass"},
          {}};
  for (const auto& run : runs) {
    std::map<std::string, std::string> scenarios;  // id -> threat type
    if (run.scenarios) {
      for (const auto& s : *run.scenarios) scenarios[s.id] = s.threat_type;
    } else {
      for (const auto& e : run.events)
        if (e.scenario_id && e.label.threat_type) scenarios.emplace(*e.scenario_id, *e.label.threat_type);
    }
    for (const auto& [id, threat_type] : scenarios) {
      std::vector<SimulationEvent> observed, own;
      for (const auto& e : run.events) {
        if (!e.scenario_id || *e.scenario_id == id) observed.push_back(e);
        if (e.scenario_id && *e.scenario_id == id) own.push_back(e);
      }
      const auto a = metrics::abc(observed, threat_type, c.threats);
      const auto l = metrics::alf(own);
      t.rows.push_back({run.name, id, threat_type, a.matched, a.total, a.coverage, a.pass, l.phases_covered, l.coverage,
                        l.ordering_valid, l.pass});
    }
  }
  return t;
}

Table eval_msim(const std::vector<LoadedRun>& runs, const metrics::ReferenceSchema& schema, bool skip_unknown) {
  Table t{{"input", "template", "field_coverage", "type_compat", "range_overlap", "semantic_sim", "combined"}, {}};
  for (const auto& run : runs) {
    const auto s = metrics::msim(run.events, schema, skip_unknown);
    t.rows.push_back({run.name, run.template_name, s.field_coverage, s.type_compat, s.range_overlap, s.semantic_sim,
                      s.combined});
  }
  return t;
}

Table eval_quality(const std::vector<LoadedRun>& runs) {
  Table t{{"input", "template", "scale", "features", "balance", "attack_diversity", "temporal_uniformity",
           "source_diversity", "taxonomy_depth"},
          {}};
  for (const auto& run : runs) {
    const auto q = metrics::dataset_quality(run.events, csv_columns(run.events).size());
    t.rows.push_back({run.name, run.template_name, q.scale, q.features, q.balance, q.attack_diversity,
                      q.temporal_uniformity, q.source_diversity, q.taxonomy_depth});
  }
  return t;
}

Table eval_diversity(const std::vector<LoadedRun>& runs) {
  Table t{{"input", "template", "devices", "events", "unique_types", "unique_categories", "type_entropy",
           "category_entropy", "gini"},
          {}};
  for (const auto& run : runs) {
    std::set<std::string> devices;
    for (const auto& e : run.events) devices.insert(e.device_id);
    const auto d = metrics::diversity_profile(run.events);
    t.rows.push_back({run.name, run.template_name, devices.size(), run.events.size(), d.unique_types,
                      d.unique_categories, d.type_entropy, d.category_entropy, d.gini});
  }
  return t;
}

/// Queries file: [{"id": ..., "query": ..., "relevant": [document ids]}].
/// Rankings are at document level: chunk hits collapse to their document.
Table eval_ir(const std::string& index_dir, const std::string& queries_file, std::size_t k) {
  if (k == 0) throw ValidationError("--k must be positive");
  const auto index = open_index(index_dir);
  const auto queries = read_json_file(queries_file);
  if (!queries.is_array() || queries.empty()) throw ValidationError(queries_file + " must be a non-empty array");
  Table t{{"mode", "queries", "k", "precision_at_k", "recall_at_k", "ndcg_at_k", "mrr", "map"}, {}};
  for (auto mode : {knowledge::RetrievalMode::kHybrid, knowledge::RetrievalMode::kSemantic,
                    knowledge::RetrievalMode::kKeyword}) {
    std::vector<metrics::Ranking> rankings;
    std::vector<metrics::RelevantSet> relevant;
    double p = 0, r = 0, n = 0;
    for (const auto& q : queries) {
      const auto text = typed<std::string>(q.at("query"), "query text");
      metrics::RelevantSet rel;
      for (const auto& id : q.at("relevant")) rel.insert(typed<std::string>(id, "relevant id"));
      metrics::Ranking ranking;
      for (const auto& hit : index->retrieve(text, index->chunk_count(), mode))
        if (std::find(ranking.begin(), ranking.end(), hit.chunk->document_id) == ranking.end())
          ranking.push_back(hit.chunk->document_id);
      p += metrics::precision_at_k(ranking, rel, k);
      r += metrics::recall_at_k(ranking, rel, k);
      n += metrics::ndcg_at_k(ranking, rel, k);
      rankings.push_back(std::move(ranking));
      relevant.push_back(std::move(rel));
    }
    const double count = static_cast<double>(queries.size());
    t.rows.push_back({std::string(knowledge::mode_name(mode)), queries.size(), k, p / count, r / count, n / count,
                      metrics::mrr(rankings, relevant), metrics::mean_average_precision(rankings, relevant)});
  }
  return t;
}

int emit_table(Global& g, const std::string& name, const Table& t, std::ostream& out) {
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    write_file_atomic(fs::path(g.out) / ("eval_" + name + ".csv"), to_csv(t));
  }
  out << render(t, g.table_format());
  return kExitOk;
}

fs::path default_schema_path(const Global& g) {
  const fs::path catalog = g.catalog.empty() ? default_catalog_dir() : fs::path(g.catalog);
  return catalog.parent_path() / "reference_schema.json";
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Global g;
  g.argv.assign(args.begin(), args.end());

  CLI::App app{"Smart home dataset simulator", "homesim"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "random seed; every stream derives from it")->capture_default_str();
  app.add_option("--catalog", g.catalog, "catalog directory");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--format", g.format, "stdout table format")
      ->check(CLI::IsMember({"jsonl", "csv"}))
      ->capture_default_str();

  RunFlags gen_flags, run_flags, inject_flags, sweep_flags;
  auto* generate = app.add_subcommand("generate", "generate a home configuration");
  generate->add_option("--template", gen_flags.template_name, "residence template");
  gen_flags.o_room = generate->add_option("--room-multiplier", gen_flags.room_mult, "room count multiplier");
  gen_flags.o_density = generate->add_option("--density-multiplier", gen_flags.density_mult, "device density multiplier");

  auto* run = app.add_subcommand("run", "simulate and write an archive");
  run->alias("simulate");
  add_run_flags(run, run_flags);
  run->add_flag("--dump-traces", run_flags.dump_traces, "print presence traces to stdout");

  auto* inject = app.add_subcommand("inject", "simulate with at least one threat");
  add_run_flags(inject, inject_flags);

  std::string source;
  auto* exp = app.add_subcommand("export", "verify an archive and write a copy under --out");
  exp->add_option("archive", source, "archive directory")->required();
  auto* imp = app.add_subcommand("import", "verify an archive and summarize it");
  imp->add_option("archive", source, "archive directory")->required();
  auto* reproduce = app.add_subcommand("reproduce", "rerun from a manifest and byte-compare the outputs");
  reproduce->add_option("manifest", source, "run manifest, archive manifest, or their directory")->required();

  std::string grid_file;
  std::vector<std::string> vary;
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--grid", grid_file, "grid file (JSON object of value lists)");
  sweep->add_option("--vary", vary, "key=v1,v2 (repeatable)");

  std::string artifact, kb_dir, report;
  std::size_t verify_k = 5;
  auto* ver = app.add_subcommand("verify", "run the six-stage verification pipeline");
  ver->add_option("--artifact", artifact, "home, parameter or scenario JSON, or an archive directory")->required();
  ver->add_option("--kb", kb_dir, "knowledge index for the factual stage");
  ver->add_option("--report", report, "report file (default: <out>/verification.json)");
  ver->add_option("--k", verify_k, "evidence passages per claim")->capture_default_str();

  auto* kb = app.add_subcommand("kb", "knowledge index");
  kb->require_subcommand(1);
  std::vector<std::string> files, words;
  std::string adapter = "academic", doc_id, index_dir, mode = "hybrid";
  std::size_t kb_k = 5;
  auto* ingest = kb->add_subcommand("ingest", "add documents to the index under --out");
  ingest->add_option("files", files, "documents (.txt, .md, .json)")->required();
  ingest->add_option("--adapter", adapter, "academic, threat or device")->capture_default_str();
  ingest->add_option("--id", doc_id, "document id (single file only)");
  auto* query = kb->add_subcommand("query", "retrieve passages");
  query->add_option("text", words, "query text")->required();
  query->add_option("--index", index_dir, "index directory")->required();
  query->add_option("--mode", mode, "hybrid, semantic or keyword")->capture_default_str();
  query->add_option("--k", kb_k, "results")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "metric tables as CSV");
  eval->require_subcommand(1);
  std::vector<std::string> inputs;
  std::string queries_file, schema_file;
  std::size_t ir_k = 5;
  bool skip_unknown = false;
  auto* ir = eval->add_subcommand("ir", "retrieval metrics over a query set");
  ir->add_option("--index", index_dir, "index directory")->required();
  ir->add_option("--queries", queries_file, "queries with relevant document ids")->required();
  ir->add_option("--k", ir_k, "cutoff")->capture_default_str();
  auto* ev_threat = eval->add_subcommand("threat", "indicator coverage and lifecycle per scenario");
  ev_threat->add_option("inputs", inputs, "archives or .jsonl logs")->required();
  auto* ev_msim = eval->add_subcommand("msim", "message similarity against a reference schema");
  ev_msim->add_option("inputs", inputs, "archives or .jsonl logs")->required();
  ev_msim->add_option("--schema", schema_file, "reference schema (default: data/reference_schema.json)");
  ev_msim->add_flag("--skip-unknown", skip_unknown, "ignore device types the schema lacks");
  auto* ev_quality = eval->add_subcommand("quality", "dataset quality dimensions");
  ev_quality->add_option("inputs", inputs, "archives or .jsonl logs")->required();
  auto* ev_div = eval->add_subcommand("diversity", "device diversity profile");
  ev_div->add_option("inputs", inputs, "archives or .jsonl logs")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*generate) return cmd_generate(g, gen_flags, out);
    if (*run) return cmd_run(g, run_flags, "run", out);
    if (*inject) return cmd_run(g, inject_flags, "inject", out);
    if (*exp) return cmd_export(g, source, out, err);
    if (*imp) return cmd_import(g, source, out, err);
    if (*reproduce) return cmd_reproduce(g, source, out, err);
    if (*sweep) return cmd_sweep(g, sweep_flags, grid_file, vary, out);
    if (*ver) return cmd_verify(g, artifact, kb_dir, report, verify_k, out);
    if (*ingest) return cmd_kb_ingest(g, files, adapter, doc_id, out);
    if (*query) return cmd_kb_query(g, index_dir, words, mode, kb_k, out);
    if (*ir) return emit_table(g, "ir", eval_ir(index_dir, queries_file, ir_k), out);
    std::vector<LoadedRun> runs;
    for (const auto& input : inputs) runs.push_back(load_run(input, err));
    if (*ev_threat) return emit_table(g, "threat", eval_threat(runs, g.catalogs()), out);
    if (*ev_msim) {
      const auto path = schema_file.empty() ? default_schema_path(g) : fs::path(schema_file);
      return emit_table(g, "msim", eval_msim(runs, metrics::ReferenceSchema::from_json(read_json_file(path)), skip_unknown),
                        out);
    }
    if (*ev_quality) return emit_table(g, "quality", eval_quality(runs), out);
    if (*ev_div) return emit_table(g, "diversity", eval_diversity(runs), out);
    err << "homesim: no command\n";
    return kExitValidation;
  } catch (const IntegrityError& e) {
    err << "homesim: integrity error in " << e.artifact() << ": " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const VersionError& e) {
    err << "homesim: version mismatch: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "homesim: invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ProviderError& e) {
    err << "homesim: embedding provider: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "homesim: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace homesim::cli
