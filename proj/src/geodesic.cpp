#include "swarmnav/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include "swarmnav/error.hpp"

namespace swarmnav {

std::array<int, 3> OccupancyGrid::coords(std::int64_t index) const {
  const int i = static_cast<int>(index % dims[0]);
  const int j = static_cast<int>((index / dims[0]) % dims[1]);
  const int k = static_cast<int>(index / (static_cast<std::int64_t>(dims[0]) * dims[1]));
  return {i, j, k};
}

Vec3 OccupancyGrid::center(int i, int j, int k) const {
  return {(i + 0.5) * resolution, (j + 0.5) * resolution, (k + 0.5) * resolution};
}

std::array<int, 3> OccupancyGrid::voxel_of(const Vec3& p) const {
  std::array<int, 3> v{};
  for (int a = 0; a < 3; ++a) {
    v[a] = std::clamp(static_cast<int>(std::floor(p[a] / resolution)), 0, dims[a] - 1);
  }
  return v;
}

OccupancyGrid rasterize(const std::vector<Aabb>& boxes, double axis_length, double resolution,
                        std::int64_t max_voxels) {
  if (!(resolution > 0.0)) throw ConfigError("grid resolution must be > 0");
  OccupancyGrid g;
  g.resolution = resolution;
  const int n = std::max(1, static_cast<int>(std::ceil(axis_length / resolution - 1e-9)));
  g.dims = {n, n, n};
  if (g.size() > max_voxels) {
    throw ConfigError("occupancy grid of " + std::to_string(g.size()) + " voxels exceeds budget " +
                      std::to_string(max_voxels));
  }
  g.blocked.assign(static_cast<std::size_t>(g.size()), 0);
  for (const auto& box : boxes) {
    const Vec3 lo = box.lo();
    const Vec3 hi = box.hi();
    int first[3], last[3];
    for (int a = 0; a < 3; ++a) {
      // Voxel [v*r, (v+1)*r) overlaps (lo, hi) with positive volume iff
      // v*r < hi and (v+1)*r > lo.
      first[a] = std::max(0, static_cast<int>(std::floor(lo[a] / resolution)));
      while (first[a] > 0 && (first[a]) * resolution > lo[a]) --first[a];
      while ((first[a] + 1) * resolution <= lo[a]) ++first[a];
      last[a] = std::min(n - 1, static_cast<int>(std::ceil(hi[a] / resolution)));
      while (last[a] >= 0 && last[a] * resolution >= hi[a]) --last[a];
    }
    for (int k = first[2]; k <= last[2]; ++k) {
      for (int j = first[1]; j <= last[1]; ++j) {
        for (int i = first[0]; i <= last[0]; ++i) g.blocked[g.index(i, j, k)] = 1;
      }
    }
  }
  return g;
}

OccupancyGrid rasterize(const WorldState& world, double resolution, std::int64_t max_voxels) {
  std::vector<Aabb> boxes;
  boxes.reserve(world.obstacles.size());
  for (const auto& o : world.obstacles) boxes.push_back(o.box);
  return rasterize(boxes, world.config.axis_length, resolution, max_voxels);
}

const std::array<NeighborOffset, 26>& neighbor_offsets() {
  static const std::array<NeighborOffset, 26> offsets = [] {
    std::array<NeighborOffset, 26> out{};
    std::size_t n = 0;
    for (int dk = -1; dk <= 1; ++dk) {
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const int axes = std::abs(di) + std::abs(dj) + std::abs(dk);
          out[n++] = {di, dj, dk, std::sqrt(static_cast<double>(axes))};
        }
      }
    }
    return out;
  }();
  return offsets;
}

bool move_is_clear(const OccupancyGrid& g, int i, int j, int k, const NeighborOffset& o) {
  for (int a = 0; a <= std::abs(o.di); ++a) {
    for (int b = 0; b <= std::abs(o.dj); ++b) {
      for (int c = 0; c <= std::abs(o.dk); ++c) {
        if (g.is_blocked(i + a * o.di, j + b * o.dj, k + c * o.dk)) return false;
      }
    }
  }
  return true;
}

namespace {

void run_dijkstra(const OccupancyGrid& g, DistanceField& f, const std::vector<std::pair<std::int64_t, double>>& seeds) {
  using Entry = std::pair<double, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (const auto& [v, d] : seeds) {
    if (d < f.distance[v]) {
      f.distance[v] = d;
      open.push({d, v});
    }
  }
  const auto& offsets = neighbor_offsets();
  while (!open.empty()) {
    const auto [d, v] = open.top();
    open.pop();
    if (d > f.distance[v]) continue;
    const auto [i, j, k] = g.coords(v);
    for (const auto& o : offsets) {
      if (!move_is_clear(g, i, j, k, o)) continue;
      const std::int64_t u = g.index(i + o.di, j + o.dj, k + o.dk);
      const double nd = d + o.length * g.resolution;
      if (nd < f.distance[u]) {
        f.distance[u] = nd;
        open.push({nd, u});
      }
    }
  }
}

DistanceField empty_field(std::shared_ptr<const OccupancyGrid> grid, int target_id) {
  DistanceField f;
  f.target_id = target_id;
  f.distance.assign(static_cast<std::size_t>(grid->size()), kUnreachable);
  f.grid = std::move(grid);
  return f;
}

}  // namespace

DistanceField build_field(std::shared_ptr<const OccupancyGrid> grid, const Target& target) {
  const OccupancyGrid& g = *grid;
  const auto src = g.voxel_of(target.position);
  if (g.is_blocked(src[0], src[1], src[2])) {
    throw ContractError("target " + std::to_string(target.id) + " lies in a blocked voxel");
  }
  DistanceField f = empty_field(grid, target.id);
  run_dijkstra(g, f, {{g.index(src[0], src[1], src[2]), 0.0}});
  return f;
}

DistanceField build_field_near(std::shared_ptr<const OccupancyGrid> grid, const Target& target) {
  const OccupancyGrid& g = *grid;
  const auto src = g.voxel_of(target.position);
  if (!g.is_blocked(src[0], src[1], src[2])) return build_field(std::move(grid), target);
  DistanceField f = empty_field(grid, target.id);
  std::vector<std::pair<std::int64_t, double>> seeds;
  for (const auto& o : neighbor_offsets()) {
    const int i = src[0] + o.di, j = src[1] + o.dj, k = src[2] + o.dk;
    if (g.is_blocked(i, j, k)) continue;
    seeds.push_back({g.index(i, j, k), distance(target.position, g.center(i, j, k))});
  }
  run_dijkstra(g, f, seeds);
  return f;
}

double geodesic_distance(const DistanceField& field, const Vec3& point) {
  const OccupancyGrid& g = *field.grid;
  const auto v = g.voxel_of(point);
  const double here = field.at(v[0], v[1], v[2]);
  if (here != kUnreachable) return std::max(0.0, here + distance(point, g.center(v[0], v[1], v[2])));
  double best = kUnreachable;
  for (const auto& o : neighbor_offsets()) {
    const int i = v[0] + o.di, j = v[1] + o.dj, k = v[2] + o.dk;
    const double d = field.at(i, j, k);
    if (d == kUnreachable) continue;
    best = std::min(best, d + distance(point, g.center(i, j, k)));
  }
  return best;
}

bool FieldCache::update(const WorldState& world) {
  std::vector<Aabb> boxes;
  boxes.reserve(world.obstacles.size());
  for (const auto& o : world.obstacles) boxes.push_back(o.box);

  bool regrid = !grid_ || boxes.size() != grid_boxes_.size();
  for (std::size_t i = 0; !regrid && i < boxes.size(); ++i) {
    const Vec3 shift = boxes[i].center - grid_boxes_[i].center;
    const bool resized = !(boxes[i].half_extents == grid_boxes_[i].half_extents);
    if (resized || std::abs(shift.x) >= resolution_ || std::abs(shift.y) >= resolution_ ||
        std::abs(shift.z) >= resolution_) {
      regrid = true;
    }
  }
  if (regrid) {
    grid_ = std::make_shared<const OccupancyGrid>(rasterize(boxes, world.config.axis_length, resolution_, max_voxels_));
    grid_boxes_ = std::move(boxes);
    fields_.clear();
    field_voxels_.clear();
  }

  bool rebuilt = regrid;
  std::map<int, DistanceField> kept;
  for (const auto& t : world.targets) {
    const auto voxel = grid_->voxel_of(t.position);
    auto it = fields_.find(t.id);
    if (it != fields_.end() && field_voxels_[t.id] == voxel) {
      kept.emplace(t.id, std::move(it->second));
      continue;
    }
    kept.emplace(t.id, build_field_near(grid_, t));
    field_voxels_[t.id] = voxel;
    ++rebuilds_;
    rebuilt = true;
  }
  if (kept.size() != fields_.size()) rebuilt = true;
  fields_ = std::move(kept);
  for (auto it = field_voxels_.begin(); it != field_voxels_.end();) {
    it = fields_.count(it->first) ? std::next(it) : field_voxels_.erase(it);
  }
  return rebuilt;
}

const DistanceField* FieldCache::field(int target_id) const {
  auto it = fields_.find(target_id);
  return it == fields_.end() ? nullptr : &it->second;
}

}  // namespace swarmnav
