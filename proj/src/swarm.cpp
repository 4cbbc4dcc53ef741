#include "swarmnav/swarm.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "swarmnav/error.hpp"

namespace swarmnav {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace

SwarmGraph build_graph(std::span<const AgentState> agents, double comm_radius) {
  std::vector<const AgentState*> alive;
  for (const auto& a : agents) {
    if (!a.position.finite()) throw ContractError("agent position must be finite");
    if (a.alive) alive.push_back(&a);
  }
  std::sort(alive.begin(), alive.end(), [](auto* l, auto* r) { return l->id < r->id; });

  SwarmGraph g;
  DisjointSets sets(alive.size());
  const double r2 = comm_radius * comm_radius;
  for (std::size_t i = 0; i < alive.size(); ++i) {
    for (std::size_t j = i + 1; j < alive.size(); ++j) {
      const double d2 = (alive[i]->position - alive[j]->position).squared_norm();
      if (d2 <= r2) {
        g.edges.push_back({alive[i]->id, alive[j]->id});
        sets.unite(i, j);
      }
    }
  }
  // Agents are visited in ascending id, so components come out ordered by
  // their smallest member.
  std::map<std::size_t, int> root_index;
  for (std::size_t i = 0; i < alive.size(); ++i) {
    const std::size_t root = sets.find(i);
    auto [it, inserted] = root_index.emplace(root, static_cast<int>(g.components.size()));
    if (inserted) g.components.emplace_back();
    g.components[it->second].push_back(alive[i]->id);
    g.component_of[alive[i]->id] = it->second;
  }
  return g;
}

std::map<int, int> Assignment::counts() const {
  std::map<int, int> c;
  for (const auto& [agent, target] : tracked_target) ++c[target];
  return c;
}

double target_distance(DistanceMetric metric, const FieldCache* fields, const Target& target, const Vec3& point) {
  if (metric == DistanceMetric::geodesic && fields) {
    if (const DistanceField* f = fields->field(target.id)) return geodesic_distance(*f, point);
  }
  return distance(point, target.position);
}

Assignment assign_targets(std::span<const AgentState> agents, std::span<const Target> targets,
                          DistanceMetric metric, const FieldCache* fields) {
  if (targets.empty()) throw ContractError("assignment needs at least one target");
  std::vector<const AgentState*> alive;
  for (const auto& a : agents) {
    if (a.alive) alive.push_back(&a);
  }
  if (alive.empty()) throw ContractError("assignment needs at least one living agent");

  const int agent_count = static_cast<int>(alive.size());
  const int target_count = static_cast<int>(targets.size());
  const int floor_quota = agent_count / target_count;
  int extras = agent_count % target_count;

  std::vector<std::tuple<double, int, int>> pairs;
  pairs.reserve(alive.size() * targets.size());
  for (const auto* a : alive) {
    for (const auto& t : targets) pairs.emplace_back(target_distance(metric, fields, t, a->position), a->id, t.id);
  }
  std::sort(pairs.begin(), pairs.end());

  Assignment out;
  std::map<int, int> count;
  for (const auto& t : targets) count[t.id] = 0;
  for (const auto& [d, agent, target] : pairs) {
    if (out.tracked_target.count(agent)) continue;
    int& c = count[target];
    if (c < floor_quota) {
      ++c;
    } else if (c == floor_quota && extras > 0) {
      ++c;
      --extras;
    } else {
      continue;
    }
    out.tracked_target[agent] = target;
    if (static_cast<int>(out.tracked_target.size()) == agent_count) break;
  }
  for (const auto& [target, c] : count) {
    if (c == 0) out.untracked_targets.push_back(target);
  }
  return out;
}

std::string to_string(IslandEventKind kind) { return kind == IslandEventKind::split ? "split" : "merge"; }

IslandState island_report(const SwarmGraph& graph, const Assignment& assignment, std::optional<int> previous_count) {
  IslandState s;
  s.component_count = static_cast<int>(graph.components.size());
  s.members = graph.components;
  for (const auto& members : graph.components) {
    std::map<int, int> votes;
    for (int id : members) {
      if (auto it = assignment.tracked_target.find(id); it != assignment.tracked_target.end()) ++votes[it->second];
    }
    int best = -1, best_votes = 0;
    for (const auto& [target, v] : votes) {
      if (v > best_votes) {
        best = target;
        best_votes = v;
      }
    }
    s.majority_target.push_back(best);
  }
  if (previous_count) {
    if (s.component_count > *previous_count) {
      s.events.push_back({IslandEventKind::split, *previous_count, s.component_count});
    } else if (s.component_count < *previous_count) {
      s.events.push_back({IslandEventKind::merge, *previous_count, s.component_count});
    }
  }
  return s;
}

}  // namespace swarmnav
