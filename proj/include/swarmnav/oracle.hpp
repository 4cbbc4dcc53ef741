#pragma once

#include <set>
#include <vector>

#include "swarmnav/policy.hpp"

namespace swarmnav {

struct OracleConfig {
  double los_inflation = 0.25;   // obstacle padding for waypoint line-of-sight
  double move_inflation = 0.05;  // obstacle padding when vetting a move
  int lookahead = 24;            // voxels followed down the field
  double repulsion_gain = 1.0;
  double yield_gain = 6.0;       // towards neighbors ahead; balances the heading 2.5 units behind them
  double cruise_speed = 15.0;    // physical mode, units per second
  double braking = 40.0;         // physical mode, units per second squared
};

/// Non-learned controller: heads for the assigned target along the field's
/// descent path (straight line under the Euclidean metric), hovers inside the
/// safe shell, pushes away from neighbors closer than the safe radius and
/// never commands a move into an obstacle or out of the arena.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(OracleConfig config = {}) : config_(config) {}

  std::string name() const override { return "oracle"; }
  std::vector<Vec3> act(const SwarmEnv& env) override;

  /// Point the agent at `position` is currently steering towards.
  Vec3 waypoint(const SwarmEnv& env, const Vec3& position, int target_id) const;

  /// Voxel chain that descends the field from `position`, nearest first.
  std::vector<std::array<int, 3>> descent_chain(const DistanceField& field, const Vec3& position) const;

 private:
  bool line_of_sight(const WorldState& world, const Vec3& a, const Vec3& b, double inflation) const;
  bool move_is_safe(const WorldState& world, const Vec3& from, const Vec3& to) const;
  Vec3 vet_move(const WorldState& world, const Vec3& from, const Vec3& delta) const;

  OracleConfig config_;
  std::set<int> warned_;
};

}  // namespace swarmnav
