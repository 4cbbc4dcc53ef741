#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "swarmnav/vec3.hpp"
#include "swarmnav/world.hpp"

namespace swarmnav {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Voxel occupancy over the arena. Voxel (i, j, k) spans
/// [i*r, (i+1)*r) x [j*r, (j+1)*r) x [k*r, (k+1)*r).
struct OccupancyGrid {
  double resolution = 1.0;
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> blocked;

  std::int64_t size() const { return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2]; }
  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  std::int64_t index(int i, int j, int k) const {
    return (static_cast<std::int64_t>(k) * dims[1] + j) * dims[0] + i;
  }
  std::array<int, 3> coords(std::int64_t index) const;
  /// Out-of-grid voxels count as blocked.
  bool is_blocked(int i, int j, int k) const { return !in_bounds(i, j, k) || blocked[index(i, j, k)] != 0; }
  Vec3 center(int i, int j, int k) const;
  /// Containing voxel, clamped into the grid.
  std::array<int, 3> voxel_of(const Vec3& p) const;
};

/// Conservative rasterization: any voxel with positive-volume overlap with an
/// obstacle box is blocked. Throws ConfigError above `max_voxels`.
OccupancyGrid rasterize(const WorldState& world, double resolution, std::int64_t max_voxels = 1 << 24);
OccupancyGrid rasterize(const std::vector<Aabb>& boxes, double axis_length, double resolution,
                        std::int64_t max_voxels = 1 << 24);

/// Single-target geodesic distance per voxel; kUnreachable for blocked or
/// disconnected voxels.
struct DistanceField {
  int target_id = -1;
  std::shared_ptr<const OccupancyGrid> grid;
  std::vector<double> distance;

  double at(int i, int j, int k) const {
    return grid->in_bounds(i, j, k) ? distance[grid->index(i, j, k)] : kUnreachable;
  }
};

/// The 26 neighbor offsets and their lengths in voxel units.
struct NeighborOffset {
  int di, dj, dk;
  double length;
};
const std::array<NeighborOffset, 26>& neighbor_offsets();

/// True when moving from voxel (i,j,k) by `o` keeps every voxel of the spanned
/// unit cube free, so diagonal moves never cut past a blocked edge or corner.
bool move_is_clear(const OccupancyGrid& grid, int i, int j, int k, const NeighborOffset& o);

/// Dijkstra from the target voxel over free voxels, 26-connected, with edge
/// weights resolution * {1, sqrt2, sqrt3}. Throws ContractError when the target
/// voxel is blocked.
DistanceField build_field(std::shared_ptr<const OccupancyGrid> grid, const Target& target);

/// Like build_field, but a target sitting in a conservatively blocked voxel
/// seeds the search from its free neighbor voxels instead of failing.
DistanceField build_field_near(std::shared_ptr<const OccupancyGrid> grid, const Target& target);

/// Field value of the containing voxel plus the straight offset from that
/// voxel's center. When the containing voxel is blocked (conservative
/// rasterization next to an obstacle), the best free neighbor voxel is used.
double geodesic_distance(const DistanceField& field, const Vec3& point);

/// Keeps one distance field per target and rebuilds a field only when the
/// owning target changes voxel or an obstacle moved by at least one voxel
/// since the last build.
class FieldCache {
 public:
  explicit FieldCache(double resolution = 1.0, std::int64_t max_voxels = 1 << 24)
      : resolution_(resolution), max_voxels_(max_voxels) {}

  /// Returns true if any field was rebuilt.
  bool update(const WorldState& world);

  const DistanceField* field(int target_id) const;
  const OccupancyGrid* grid() const { return grid_.get(); }
  double resolution() const { return resolution_; }
  std::int64_t rebuild_count() const { return rebuilds_; }

 private:
  double resolution_;
  std::int64_t max_voxels_;
  std::shared_ptr<const OccupancyGrid> grid_;
  std::vector<Aabb> grid_boxes_;
  std::map<int, DistanceField> fields_;
  std::map<int, std::array<int, 3>> field_voxels_;
  std::int64_t rebuilds_ = 0;
};

}  // namespace swarmnav
