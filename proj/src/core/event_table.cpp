#include "homesim/core/event_table.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "homesim/core/error.hpp"
#include "homesim/core/json_io.hpp"

namespace homesim {

namespace {

const std::vector<std::string> kLeading{"timestamp", "device_id", "device_type", "category",
                                        "room",      "protocol",  "event_kind"};

std::string csv_cell(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string payload_cell(const PayloadValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  nlohmann::json j = v;
  return j.dump();
}

std::set<std::string> payload_names(std::span<const SimulationEvent> events) {
  std::set<std::string> names;
  for (const auto& e : events)
    for (const auto& [k, v] : e.payload) names.insert(k);
  return names;
}

}  // namespace

std::vector<std::string> csv_columns(std::span<const SimulationEvent> events) {
  std::vector<std::string> cols = kLeading;
  for (const auto& n : payload_names(events)) cols.push_back("payload." + n);
  for (const char* c : {"verdict", "threat_type", "technique", "confidence"}) cols.emplace_back(c);
  for (int i = 1; i <= kMaxTaxonomyLevel; ++i) cols.push_back("taxonomy_" + std::to_string(i));
  return cols;
}

std::string events_to_csv(std::span<const SimulationEvent> events) {
  const auto names = payload_names(events);
  std::string out;
  const auto cols = csv_columns(events);
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + csv_cell(cols[i]);
  out += '\n';
  char ts[32];
  for (const auto& e : events) {
    std::vector<std::string> row;
    std::snprintf(ts, sizeof ts, "%.3f", millis_to_seconds(e.timestamp));
    row.emplace_back(ts);
    row.push_back(e.device_id);
    row.push_back(e.device_type);
    row.push_back(e.category);
    row.push_back(e.room);
    row.emplace_back(to_string(e.protocol));
    row.emplace_back(to_string(e.kind));
    for (const auto& n : names) {
      auto it = e.payload.find(n);
      row.push_back(it == e.payload.end() ? std::string() : payload_cell(it->second));
    }
    row.emplace_back(to_string(e.label.verdict));
    row.push_back(e.label.threat_type.value_or(""));
    row.push_back(e.label.attack_technique.value_or(""));
    row.push_back(nlohmann::json(e.label.confidence).dump());
    for (std::size_t i = 0; i < static_cast<std::size_t>(kMaxTaxonomyLevel); ++i)
      row.push_back(i < e.label.taxonomy_path.size() ? e.label.taxonomy_path[i] : std::string());
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

std::string events_to_jsonl(std::span<const SimulationEvent> events) {
  std::string out;
  for (const auto& e : events) {
    out += canonical_dump(nlohmann::json(e));
    out += '\n';
  }
  return out;
}

std::vector<SimulationEvent> events_from_jsonl(std::string_view text) {
  std::vector<SimulationEvent> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<SimulationEvent>());
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError("event log line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace homesim
