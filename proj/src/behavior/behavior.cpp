#include "homesim/behavior/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "homesim/core/error.hpp"

namespace homesim::behavior {

namespace {

bool bias_applies(const SuccessorBias& b, DiurnalPeriod p) {
  return b.periods.empty() || std::find(b.periods.begin(), b.periods.end(), p) != b.periods.end();
}

TransitionMatrix build_matrix(const ActivityCatalog& catalog, InhabitantKind kind,
                              DiurnalPeriod period) {
  const std::size_t n = catalog.activities.size();
  std::vector<double> w = catalog.period_weights.at(period);
  if (auto it = catalog.kind_multipliers.find(kind); it != catalog.kind_multipliers.end()) {
    for (const auto& [act, mult] : it->second) w[catalog.index_of(act)] *= mult;
  }
  // bias[s][s'] multiplies the off-diagonal weight of s -> s'
  std::vector<double> bias(n * n, 1.0);
  for (const auto& b : catalog.successor_bias) {
    if (!bias_applies(b, period)) continue;
    bias[catalog.index_of(b.from) * n + catalog.index_of(b.to)] *= b.factor;
  }

  TransitionMatrix m{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t s = 0; s < n; ++s) {
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      if (t != s) total += w[t] * bias[s * n + t];
    if (total <= 0.0) {
      m.at(s, s) = 1.0;
      continue;
    }
    const double stay = w[s] > 0.0 ? catalog.activities[s].persistence : 0.0;
    m.at(s, s) = stay;
    for (std::size_t t = 0; t < n; ++t)
      if (t != s) m.at(s, t) = (1.0 - stay) * w[t] * bias[s * n + t] / total;
  }
  return m;
}

}  // namespace

BehaviorParams build_behavior_params(const ActivityCatalog& catalog,
                                     std::span<const InhabitantKind> kinds) {
  BehaviorParams params;
  for (const auto& a : catalog.activities) params.activities.push_back(a.id);
  for (const auto& p : catalog.periods)
    params.temporal_factor[static_cast<std::size_t>(p.period)] = p.temporal_factor;
  for (InhabitantKind kind : kinds) {
    if (params.matrices.count(kind)) continue;
    auto& per_period = params.matrices[kind];
    for (std::size_t p = 0; p < kPeriodCount; ++p) {
      per_period[p] = build_matrix(catalog, kind, static_cast<DiurnalPeriod>(p));
      check_row_stochastic(per_period[p]);
    }
  }
  return params;
}

void check_row_stochastic(const TransitionMatrix& m, double tol) {
  if (m.values.size() != m.size * m.size) throw ValidationError("transition matrix is not square");
  for (std::size_t r = 0; r < m.size; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < m.size; ++c) {
      if (!(m.at(r, c) >= 0.0)) throw ValidationError("negative transition probability");
      sum += m.at(r, c);
    }
    if (std::abs(sum - 1.0) > tol)
      throw ValidationError("transition row " + std::to_string(r) + " sums to " +
                            std::to_string(sum));
  }
}

ActivityModel::ActivityModel(BehaviorParams params) : params_(std::move(params)) {
  for (const auto& [kind, matrices] : params_.matrices) {
    for (const auto& m : matrices) {
      if (m.size != params_.activities.size())
        throw ValidationError("matrix size does not match the activity list");
      check_row_stochastic(m);
    }
  }
}

std::size_t ActivityModel::index_of(std::string_view state) const {
  for (std::size_t i = 0; i < params_.activities.size(); ++i)
    if (params_.activities[i] == state) return i;
  throw ValidationError("unknown activity state '" + std::string(state) + "'");
}

const TransitionMatrix& ActivityModel::matrix(InhabitantKind kind, DiurnalPeriod period) const {
  auto it = params_.matrices.find(kind);
  if (it == params_.matrices.end())
    throw ValidationError("no transition matrices for kind '" + std::string(to_string(kind)) + "'");
  return it->second[static_cast<std::size_t>(period)];
}

double schedule_probability(const InhabitantProfile& profile, SimMillis t) {
  const auto& sched = profile.schedule;
  if (profile.kind == InhabitantKind::kPet || profile.kind == InhabitantKind::kElderly)
    return 1.0;
  if (!sched.work_minutes || sched.work_from_home) return 1.0;
  const auto minute = static_cast<int>((t % kMillisPerDay) / kMillisPerMinute);
  // Minutes elapsed since `from`, wrapping around midnight.
  auto since = [minute](int from) { return ((minute - from) % 1440 + 1440) % 1440; };
  const auto [start, end] = *sched.work_minutes;
  const int block = ((end - start) % 1440 + 1440) % 1440;
  if (since(end) < 30) return 0.5;
  if (since(start) < block) return since(start) < 30 ? 0.5 : 0.0;
  return 1.0;
}

double perturb_presence(double p_schedule, double sigma, RngStream& rng) {
  const double eps = rng.normal(0.0, sigma);
  return std::clamp(p_schedule * (1.0 + eps), 0.0, 1.0);
}

double presence_probability(const InhabitantProfile& profile, SimMillis t, RngStream& rng) {
  return perturb_presence(schedule_probability(profile, t), profile.variation_sigma, rng);
}

std::size_t activity_step(const ActivityModel& model, InhabitantKind kind, std::size_t state,
                          SimMillis t, RngStream& rng) {
  if (state >= model.state_count())
    throw ValidationError("unknown activity state index " + std::to_string(state));
  const auto& m = model.matrix(kind, period_of(t));
  return rng.categorical(std::span<const double>(m.values.data() + state * m.size, m.size));
}

InteractionModel::InteractionModel(const BehaviorParams& params, const ActivityCatalog& catalog)
    : temporal_(params.temporal_factor),
      tech_floor_(params.tech_floor),
      tech_slope_(params.tech_slope),
      catalog_(&catalog) {}

double InteractionModel::phi_temporal(SimMillis t) const {
  return temporal_[static_cast<std::size_t>(period_of(t))];
}

double InteractionModel::phi_tech(double tech_savviness) const {
  return tech_floor_ + tech_slope_ * std::clamp(tech_savviness, 0.0, 1.0);
}

double InteractionModel::phi_context(std::size_t state, std::string_view category) const {
  const auto& def = catalog_->activities.at(state);
  auto it = def.category_affinity.find(std::string(category));
  return it == def.category_affinity.end() ? def.default_affinity : it->second;
}

bool InteractionModel::may_operate(InhabitantKind kind, std::string_view category) const {
  auto it = catalog_->kinds.find(kind);
  if (it == catalog_->kinds.end() || it->second.operable_categories.empty()) return true;
  const auto& ops = it->second.operable_categories;
  return std::find(ops.begin(), ops.end(), category) != ops.end();
}

double interaction_likelihood(const InteractionModel& model, const InhabitantProfile& profile,
                              SimMillis t, std::size_t state, std::string_view category) {
  return model.phi_temporal(t) * model.phi_tech(profile.tech_savviness) *
         model.phi_context(state, category);
}

bool PresenceTrace::present_at(SimMillis t) const { return activity_at(t) != kAbsent; }

int PresenceTrace::activity_at(SimMillis t) const {
  const auto k = tick_of(t);
  return k < activity.size() ? activity[k] : kAbsent;
}

int PresenceTrace::room_at(SimMillis t) const {
  const auto k = tick_of(t);
  return k < room.size() ? room[k] : kAbsent;
}

double aggregate_activation(std::span<const Contribution> contributions) {
  double best = 0.0;
  for (const auto& c : contributions)
    if (c.compatible && c.present) best = std::max(best, c.f_activity);
  return std::clamp(best, 0.0, 1.0);
}

Activation device_activation(const DeviceContext& device, std::span<const PresenceTrace> traces,
                             std::span<const InhabitantProfile> profiles, SimMillis t,
                             const InteractionModel& model) {
  if (traces.size() != profiles.size())
    throw ValidationError("traces and profiles are not aligned");
  Activation out;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const int state = traces[i].activity_at(t);
    if (state == kAbsent) continue;
    if (!model.may_operate(profiles[i].kind, device.category)) continue;
    if (device.room_bound && traces[i].room_at(t) != device.room) continue;
    const double f = interaction_likelihood(model, profiles[i], t,
                                            static_cast<std::size_t>(state), device.category);
    if (f > out.value) {
      out.value = f;
      out.source = i;
    }
  }
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

RoomGraph::RoomGraph(const std::vector<Room>& rooms) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < rooms.size(); ++i) index[rooms[i].id] = i;
  adj_.resize(rooms.size());
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    if (rooms[i].capacity < 1) throw ValidationError("room capacity must be >= 1");
    capacity_.push_back(rooms[i].capacity);
    types_.push_back(rooms[i].room_type);
    total_ += rooms[i].capacity;
    for (const auto& other : rooms[i].adjacency) {
      auto it = index.find(other);
      if (it != index.end()) adj_[i].push_back(it->second);
    }
    std::sort(adj_[i].begin(), adj_[i].end());
  }
}

std::vector<int> assign_rooms(const RoomGraph& graph, std::span<const int> desired) {
  const auto present = std::count_if(desired.begin(), desired.end(),
                                     [](int d) { return d != kAbsent; });
  if (present > graph.total_capacity())
    throw ValidationError("occupancy " + std::to_string(present) + " exceeds home capacity " +
                          std::to_string(graph.total_capacity()));
  std::vector<int> load(graph.size(), 0);
  std::vector<int> out(desired.size(), kAbsent);
  for (std::size_t i = 0; i < desired.size(); ++i) {
    if (desired[i] == kAbsent) continue;
    const auto want = static_cast<std::size_t>(desired[i]);
    if (want >= graph.size()) throw ValidationError("desired room index out of range");
    // Breadth-first search for the closest room with space; neighbours are sorted.
    std::vector<bool> seen(graph.size(), false);
    std::deque<std::size_t> queue{want};
    seen[want] = true;
    std::optional<std::size_t> found;
    while (!queue.empty() && !found) {
      // Scan one whole BFS layer so ties go to the lowest index.
      std::vector<std::size_t> layer(queue.begin(), queue.end());
      queue.clear();
      std::sort(layer.begin(), layer.end());
      for (auto r : layer) {
        if (load[r] < graph.capacity(r)) {
          found = r;
          break;
        }
      }
      for (auto r : layer)
        for (auto n : graph.neighbours(r))
          if (!seen[n]) {
            seen[n] = true;
            queue.push_back(n);
          }
    }
    if (!found) {
      // Disconnected leftovers: any room with space.
      for (std::size_t r = 0; r < graph.size() && !found; ++r)
        if (load[r] < graph.capacity(r)) found = r;
    }
    ++load[*found];
    out[i] = static_cast<int>(*found);
  }
  return out;
}

int preferred_room(const RoomGraph& graph, const ActivityDef& activity, std::size_t inhabitant) {
  for (const auto& type : activity.preferred_rooms) {
    std::vector<int> matches;
    for (std::size_t r = 0; r < graph.size(); ++r)
      if (graph.type(r) == type) matches.push_back(static_cast<int>(r));
    if (!matches.empty()) return matches[inhabitant % matches.size()];
  }
  // No preferred type in this home: the roomiest room, lowest index first.
  int best = 0;
  for (std::size_t r = 1; r < graph.size(); ++r)
    if (graph.capacity(r) > graph.capacity(static_cast<std::size_t>(best))) best = static_cast<int>(r);
  return best;
}

std::vector<PresenceTrace> simulate_behavior(const HomeConfiguration& home,
                                             std::span<const InhabitantProfile> profiles,
                                             const ActivityCatalog& catalog, SimMillis window,
                                             const RngStream& rng) {
  if (window <= 0) throw ValidationError("simulation window must be positive");
  if (home.rooms.empty()) throw ValidationError("home has no rooms");
  const ActivityModel model(home.behavior);
  if (model.state_count() != catalog.activities.size())
    throw ValidationError("behavior parameters do not match the activity catalog");
  const RoomGraph graph(home.rooms);
  const SimMillis tick = static_cast<SimMillis>(home.behavior.tick_seconds) * kMillisPerSecond;
  const SimMillis slot = static_cast<SimMillis>(home.behavior.presence_slot_minutes) * kMillisPerMinute;
  if (tick <= 0 || slot <= 0) throw ValidationError("tick and presence slot must be positive");
  const auto ticks = static_cast<std::size_t>((window + tick - 1) / tick);

  std::vector<std::size_t> order(profiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return profiles[a].id < profiles[b].id; });

  const std::size_t start_state = model.index_of("sleeping");
  std::vector<PresenceTrace> traces;
  for (std::size_t idx : order) {
    const auto& p = profiles[idx];
    RngStream base = rng.fork(p.id);
    RngStream presence_rng = base.fork("presence");
    RngStream activity_rng = base.fork("activity");
    PresenceTrace trace{p.id, tick, std::vector<int>(ticks, kAbsent), std::vector<int>(ticks, kAbsent)};
    std::size_t state = start_state;
    bool present = false;
    SimMillis current_slot = -1;
    for (std::size_t k = 0; k < ticks; ++k) {
      const SimMillis t = static_cast<SimMillis>(k) * tick;
      if (t / slot != current_slot) {
        current_slot = t / slot;
        present = presence_rng.bernoulli(presence_probability(p, t, presence_rng));
      }
      // Transitions happen only at tick boundaries, using the period of the previous tick.
      if (k > 0 && trace.activity[k - 1] != kAbsent)
        state = activity_step(model, p.kind, state, t - tick, activity_rng);
      if (present) trace.activity[k] = static_cast<int>(state);
    }
    traces.push_back(std::move(trace));
  }

  // Occupancy is resolved jointly per tick, inhabitants in id order.
  std::vector<int> desired(traces.size());
  for (std::size_t k = 0; k < ticks; ++k) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const int a = traces[i].activity[k];
      desired[i] = a == kAbsent ? kAbsent
                                : preferred_room(graph, catalog.activities[static_cast<std::size_t>(a)], i);
    }
    const auto rooms = assign_rooms(graph, desired);
    for (std::size_t i = 0; i < traces.size(); ++i) traces[i].room[k] = rooms[i];
  }
  return traces;
}

nlohmann::json traces_to_json(std::span<const PresenceTrace> traces, const ActivityModel& model,
                              const std::vector<Room>& rooms) {
  auto out = nlohmann::json::array();
  for (const auto& tr : traces) {
    auto segments = nlohmann::json::array();
    std::size_t k = 0;
    while (k < tr.activity.size()) {
      std::size_t j = k;
      while (j < tr.activity.size() && tr.activity[j] == tr.activity[k] && tr.room[j] == tr.room[k]) ++j;
      nlohmann::json seg;
      seg["start_s"] = static_cast<std::int64_t>(k) * tr.tick_millis / kMillisPerSecond;
      seg["end_s"] = static_cast<std::int64_t>(j) * tr.tick_millis / kMillisPerSecond;
      if (tr.activity[k] == kAbsent) {
        seg["activity"] = nullptr;
        seg["room"] = nullptr;
      } else {
        seg["activity"] = model.states()[static_cast<std::size_t>(tr.activity[k])];
        seg["room"] = rooms[static_cast<std::size_t>(tr.room[k])].id;
      }
      segments.push_back(std::move(seg));
      k = j;
    }
    out.push_back({{"inhabitant", tr.inhabitant_id},
                   {"tick_seconds", tr.tick_millis / kMillisPerSecond},
                   {"segments", std::move(segments)}});
  }
  return out;
}

}  // namespace homesim::behavior
