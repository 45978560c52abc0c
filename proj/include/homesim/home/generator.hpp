#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homesim/core/catalog.hpp"
#include "homesim/core/types.hpp"
#include "homesim/runtime/rng.hpp"

namespace homesim::home {

struct GenerationRequest {
  std::string template_name = "studio";
  std::uint64_t seed = 42;
  std::optional<double> room_count_multiplier;
  std::optional<double> density_multiplier;

  bool operator==(const GenerationRequest&) const = default;
};

/// Concentration of the symmetric Dirichlet used to split floor area.
inline constexpr double kAreaConcentration = 5.0;

/// Catalog template with overrides applied. Throws ValidationError for an
/// unknown name or a non-positive multiplier.
ResidenceTemplate select_template(const GenerationRequest& request, const Catalogs& catalogs);

std::vector<Room> instantiate_rooms(const ResidenceTemplate& tmpl, const Catalogs& catalogs,
                                    RngStream& rng);

/// Cell (room, category) weights are lambda_c * area * compat * density
/// multiplier. The total is the template's pinned count, or a Poisson draw
/// with mean equal to the summed weights clamped into the density bounds. It
/// is spread over cells by systematic sampling, so each cell gets its expected
/// share up to rounding; types are drawn by prevalence within the category.
std::vector<DeviceInstance> place_devices(const std::vector<Room>& rooms,
                                          const ResidenceTemplate& tmpl,
                                          const Catalogs& catalogs,
                                          const CompatibilityMatrix& compat, RngStream& rng,
                                          double density_multiplier = 1.0);

struct NetworkTopology {
  std::map<std::string, std::vector<std::string>> adjacency;  // symmetric, sorted
  std::map<std::string, std::string> hubs;                    // family -> hub device id
};

/// One hub per protocol family, star links inside a family, and every
/// secondary hub linked to the root hub (the "ip" hub when present).
/// Also fills in each device's network address.
NetworkTopology build_network(std::vector<DeviceInstance>& devices, const Catalogs& catalogs);

std::vector<InhabitantProfile> generate_inhabitants(const ResidenceTemplate& tmpl,
                                                    const Catalogs& catalogs, RngStream& rng);

HomeConfiguration generate_home(const GenerationRequest& request, const Catalogs& catalogs);

}  // namespace homesim::home
