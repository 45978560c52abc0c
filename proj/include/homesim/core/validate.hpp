#pragma once

#include <string>
#include <vector>

#include "homesim/core/catalog.hpp"
#include "homesim/core/types.hpp"

namespace homesim {

struct Violation {
  std::string code;      // short machine-readable tag, e.g. "missing-room"
  std::string message;
  std::string location;  // id of the offending element

  bool operator==(const Violation&) const = default;
};

/// Check every HomeConfiguration invariant; empty result means valid.
/// With `catalogs`, device types and room types are also resolved.
std::vector<Violation> validate_home(const HomeConfiguration& config,
                                     const Catalogs* catalogs = nullptr);

}  // namespace homesim
