#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "homesim/core/catalog.hpp"
#include "homesim/core/types.hpp"
#include "homesim/runtime/rng.hpp"

namespace homesim::behavior {

inline constexpr int kAbsent = -1;

/// Assemble per-kind, per-period transition matrices from catalog weights.
///
/// For period p and kind k, let w(s') = period_weight[p][s'] * kind_mult[k][s'].
/// Row s keeps probability persistence(s) on the diagonal (0 if w(s) = 0) and
/// spreads the rest over s' != s proportionally to w(s') * bias(s -> s', p).
/// A row with no admissible successor becomes absorbing.
BehaviorParams build_behavior_params(const ActivityCatalog& catalog,
                                     std::span<const InhabitantKind> kinds);

/// Throws ValidationError unless entries are >= 0 and each row sums to 1 within tol.
void check_row_stochastic(const TransitionMatrix& m, double tol = 1e-9);

class ActivityModel {
 public:
  /// Validates every matrix (square, sized to the state list, row-stochastic).
  explicit ActivityModel(BehaviorParams params);

  const std::vector<std::string>& states() const { return params_.activities; }
  std::size_t state_count() const { return params_.activities.size(); }
  std::size_t index_of(std::string_view state) const;
  const TransitionMatrix& matrix(InhabitantKind kind, DiurnalPeriod period) const;
  const BehaviorParams& params() const { return params_; }

 private:
  BehaviorParams params_;
};

/// Piecewise-constant schedule prior: 1 at home, 0 during the work block,
/// 0.5 in the half hour after work starts and the half hour after it ends.
/// Work-from-home profiles, elderly, and pets are always 1.
double schedule_probability(const InhabitantProfile& profile, SimMillis t);

/// p_schedule * (1 + eps), eps ~ N(0, sigma), clamped to [0, 1].
double perturb_presence(double p_schedule, double sigma, RngStream& rng);

/// perturb_presence(schedule_probability(profile, t), profile.variation_sigma).
double presence_probability(const InhabitantProfile& profile, SimMillis t, RngStream& rng);

/// Next state drawn from row `state` of the matrix active at t.
std::size_t activity_step(const ActivityModel& model, InhabitantKind kind, std::size_t state,
                          SimMillis t, RngStream& rng);

/// Device-interaction factors: temporal (per period), proficiency
/// (tech_floor + tech_slope * pi), and context (activity -> category affinity).
class InteractionModel {
 public:
  InteractionModel(const BehaviorParams& params, const ActivityCatalog& catalog);

  double phi_temporal(SimMillis t) const;
  double phi_tech(double tech_savviness) const;
  double phi_context(std::size_t state, std::string_view category) const;
  bool may_operate(InhabitantKind kind, std::string_view category) const;

 private:
  std::array<double, kPeriodCount> temporal_{};
  double tech_floor_ = 0.1;
  double tech_slope_ = 0.9;
  const ActivityCatalog* catalog_;
};

double interaction_likelihood(const InteractionModel& model, const InhabitantProfile& profile,
                              SimMillis t, std::size_t state, std::string_view category);

struct PresenceTrace {
  std::string inhabitant_id;
  SimMillis tick_millis = 60 * kMillisPerSecond;
  std::vector<int> activity;  // per tick, kAbsent while away
  std::vector<int> room;      // per tick, index into HomeConfiguration::rooms

  std::size_t tick_of(SimMillis t) const { return static_cast<std::size_t>(t / tick_millis); }
  bool present_at(SimMillis t) const;
  int activity_at(SimMillis t) const;
  int room_at(SimMillis t) const;

  bool operator==(const PresenceTrace&) const = default;
};

/// One inhabitant's share of a device's activation.
struct Contribution {
  bool compatible = false;  // chi_i(d)
  bool present = false;
  double f_activity = 0.0;
};

/// Max over contributions of chi * present * f, clamped to [0, 1].
double aggregate_activation(std::span<const Contribution> contributions);

struct DeviceContext {
  std::string category;
  int room = kAbsent;  // index into the home's rooms
  bool room_bound = true;
};

struct Activation {
  double value = 0.0;
  std::optional<std::size_t> source;  // inhabitant index of the maximal contribution
};

/// traces[i] and profiles[i] describe the same inhabitant.
Activation device_activation(const DeviceContext& device, std::span<const PresenceTrace> traces,
                             std::span<const InhabitantProfile> profiles, SimMillis t,
                             const InteractionModel& model);

/// Room graph with capacities, indexed by position in the room list.
class RoomGraph {
 public:
  explicit RoomGraph(const std::vector<Room>& rooms);

  std::size_t size() const { return capacity_.size(); }
  int capacity(std::size_t room) const { return capacity_[room]; }
  const std::vector<std::size_t>& neighbours(std::size_t room) const { return adj_[room]; }
  const std::string& type(std::size_t room) const { return types_[room]; }
  int total_capacity() const { return total_; }

 private:
  std::vector<int> capacity_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::string> types_;
  int total_ = 0;
};

/// Admit inhabitants in index order; anyone whose desired room is full is
/// moved to the nearest room (breadth-first, ties by index) with space.
/// desired[i] == kAbsent leaves inhabitant i unassigned. Throws
/// ValidationError when more inhabitants are present than the home holds.
std::vector<int> assign_rooms(const RoomGraph& graph, std::span<const int> desired);

/// Room an inhabitant seeks for `activity`: the first preferred room type
/// present in the home, picking among same-type rooms by inhabitant index.
int preferred_room(const RoomGraph& graph, const ActivityDef& activity, std::size_t inhabitant);

/// Presence, activity, and rooms at every tick of [0, window) for each
/// profile, in id order. Each inhabitant draws from rng.fork(id).
std::vector<PresenceTrace> simulate_behavior(const HomeConfiguration& home,
                                             std::span<const InhabitantProfile> profiles,
                                             const ActivityCatalog& catalog, SimMillis window,
                                             const RngStream& rng);

/// Run-length segments {start_s, end_s, activity, room} per inhabitant.
nlohmann::json traces_to_json(std::span<const PresenceTrace> traces, const ActivityModel& model,
                              const std::vector<Room>& rooms);

}  // namespace homesim::behavior
