#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homesim/core/types.hpp"

namespace homesim {

/// Leading event columns, then `payload.<name>` for every payload field in the
/// log (sorted), then verdict, threat_type, technique, confidence, taxonomy_1..7.
std::vector<std::string> csv_columns(std::span<const SimulationEvent> events);

/// RFC 4180 table with the columns above; absent cells are empty.
std::string events_to_csv(std::span<const SimulationEvent> events);

/// One canonical JSON object per line.
std::string events_to_jsonl(std::span<const SimulationEvent> events);
std::vector<SimulationEvent> events_from_jsonl(std::string_view text);

}  // namespace homesim
