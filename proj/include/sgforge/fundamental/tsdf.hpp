#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>

#include "sgforge/fundamental/frame.hpp"
#include "sgforge/geometry/point_cloud.hpp"

namespace sgforge::fundamental {

using VoxelIndex = std::array<std::int64_t, 3>;

struct VoxelIndexHash {
  std::size_t operator()(const VoxelIndex& k) const {
    return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
  }
};

struct Voxel {
  float sdf = 0.0f;
  float weight = 0.0f;
  std::map<std::string, std::uint32_t> labels;  // semantic label histogram
};

struct IntegrationStats {
  std::size_t rays = 0;
  std::size_t voxel_updates = 0;
  bool empty_depth = false;  // all-zero depth frame, integration was a no-op
};

/// Sparse truncated signed distance field with per-voxel label histograms.
/// SDF convention: positive on the observed (free) side of the surface.
class TsdfGrid {
 public:
  TsdfGrid(double voxel_size, double truncation,
           Eigen::Vector3d origin = Eigen::Vector3d::Zero())
      : voxel_size_(voxel_size), truncation_(truncation), origin_(std::move(origin)) {
    if (voxel_size <= 0.0) throw input_error("SchemaError", "voxel_size must be positive");
    if (truncation < voxel_size) {
      throw input_error("SchemaError", "truncation must be >= voxel_size");
    }
  }

  [[nodiscard]] double voxel_size() const { return voxel_size_; }
  [[nodiscard]] double truncation() const { return truncation_; }
  [[nodiscard]] const Eigen::Vector3d& origin() const { return origin_; }
  [[nodiscard]] std::size_t size() const { return voxels_.size(); }
  [[nodiscard]] bool empty() const { return voxels_.empty(); }

  [[nodiscard]] VoxelIndex index_of(const Eigen::Vector3d& p) const {
    Eigen::Vector3d q = (p - origin_) / voxel_size_;
    return {static_cast<std::int64_t>(std::floor(q.x())),
            static_cast<std::int64_t>(std::floor(q.y())),
            static_cast<std::int64_t>(std::floor(q.z()))};
  }

  [[nodiscard]] Eigen::Vector3d center_of(const VoxelIndex& idx) const {
    return origin_ + voxel_size_ * Eigen::Vector3d(static_cast<double>(idx[0]) + 0.5,
                                                   static_cast<double>(idx[1]) + 0.5,
                                                   static_cast<double>(idx[2]) + 0.5);
  }

  [[nodiscard]] const Voxel* find(const VoxelIndex& idx) const {
    auto it = voxels_.find(idx);
    return it == voxels_.end() ? nullptr : &it->second;
  }

  [[nodiscard]] const std::unordered_map<VoxelIndex, Voxel, VoxelIndexHash>& voxels() const {
    return voxels_;
  }

  /// Direct weighted-average update of one voxel (weight cap 100).
  void fuse_observation(const VoxelIndex& idx, double sdf_obs, double obs_weight = 1.0) {
    const float clamped = static_cast<float>(
        std::clamp(sdf_obs, -truncation_, truncation_));
    Voxel& voxel = voxels_[idx];
    const float old_weight = voxel.weight;
    const float new_weight = old_weight + static_cast<float>(obs_weight);
    voxel.sdf = (voxel.sdf * old_weight + clamped * static_cast<float>(obs_weight)) / new_weight;
    voxel.weight = std::min(new_weight, kMaxWeight);
  }

  void add_label(const VoxelIndex& idx, const std::string& class_name) {
    voxels_[idx].labels[class_name] += 1;
  }

  /// Seeds the grid from an analytic signed distance function over a box of
  /// interest; used for synthetic fixtures and oracles.
  template <typename SdfFn>
  void fill_from_sdf(const geometry::Aabb& region, SdfFn&& sdf,
                     const std::string& label = "surface") {
    VoxelIndex lo = index_of(region.min);
    VoxelIndex hi = index_of(region.max);
    for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
      for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
        for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
          VoxelIndex idx{x, y, z};
          double d = sdf(center_of(idx));
          if (std::abs(d) <= truncation_) {
            fuse_observation(idx, d);
            if (std::abs(d) <= voxel_size_) add_label(idx, label);
          }
        }
      }
    }
  }

  [[nodiscard]] std::size_t total_label_count() const {
    std::size_t n = 0;
    for (const auto& [idx, voxel] : voxels_) {
      for (const auto& [name, count] : voxel.labels) n += count;
    }
    return n;
  }

  static constexpr float kMaxWeight = 100.0f;

 private:
  double voxel_size_;
  double truncation_;
  Eigen::Vector3d origin_;
  std::unordered_map<VoxelIndex, Voxel, VoxelIndexHash> voxels_;
};

namespace detail {

/// Amanatides-Woo voxel traversal between two points; visits each voxel once.
template <typename Visit>
void walk_voxels(const TsdfGrid& grid, const Eigen::Vector3d& from, const Eigen::Vector3d& to,
                 Visit&& visit) {
  const double cell = grid.voxel_size();
  Eigen::Vector3d dir = to - from;
  const double length = dir.norm();
  if (length < 1e-12) {
    visit(grid.index_of(from));
    return;
  }
  dir /= length;

  VoxelIndex idx = grid.index_of(from);
  const VoxelIndex end = grid.index_of(to);
  std::array<int, 3> step{};
  Eigen::Vector3d t_max;
  Eigen::Vector3d t_delta;
  const Eigen::Vector3d rel = (from - grid.origin()) / cell;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 1e-15) {
      step[a] = 1;
      t_max[a] = ((std::floor(rel[a]) + 1.0) * cell + grid.origin()[a] - from[a]) / dir[a];
      t_delta[a] = cell / dir[a];
    } else if (dir[a] < -1e-15) {
      step[a] = -1;
      t_max[a] = (std::floor(rel[a]) * cell + grid.origin()[a] - from[a]) / dir[a];
      t_delta[a] = -cell / dir[a];
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }

  for (std::size_t guard = 0; guard < 1000000; ++guard) {
    visit(idx);
    if (idx == end) return;
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    if (t_max[axis] > length) return;
    idx[static_cast<std::size_t>(axis)] += step[static_cast<std::size_t>(axis)];
    t_max[axis] += t_delta[axis];
  }
}

}  // namespace detail

/// Ray-casting TSDF fusion of one posed depth frame. For every valid depth pixel
/// the voxels along the ray within +-truncation of the surface point receive a
/// weighted-average SDF update; the voxel containing the surface point gets a
/// label histogram increment for the covering mask's class (or "unlabeled").
/// Invalid (zero) depth pixels are skipped, never treated as free space.
inline IntegrationStats integrate_frame(TsdfGrid& grid, const FrameObservation& frame,
                                        int pixel_stride = 1) {
  frame.check();
  IntegrationStats stats;

  bool any_valid = false;
  for (float d : frame.depth) {
    if (d > 0.0f) {
      any_valid = true;
      break;
    }
  }
  if (!any_valid) {
    stats.empty_depth = true;
    return stats;
  }

  const Eigen::Vector3d cam_origin = frame.pose.translation;
  for (int v = 0; v < frame.height; v += pixel_stride) {
    for (int u = 0; u < frame.width; u += pixel_stride) {
      const float d = frame.depth_at(u, v);
      if (d <= 0.0f) continue;
      ++stats.rays;

      const Eigen::Vector3d p_cam =
          frame.intrinsics.backproject(static_cast<double>(u) + 0.5,
                                       static_cast<double>(v) + 0.5, static_cast<double>(d));
      const Eigen::Vector3d surface = frame.pose.apply(p_cam);
      Eigen::Vector3d ray = surface - cam_origin;
      const double dist = ray.norm();
      if (dist < 1e-9) continue;
      ray /= dist;

      const double t0 = std::max(0.0, dist - grid.truncation());
      const double t1 = dist + grid.truncation();
      const Eigen::Vector3d from = cam_origin + t0 * ray;
      const Eigen::Vector3d to = cam_origin + t1 * ray;
      detail::walk_voxels(grid, from, to, [&](const VoxelIndex& idx) {
        const double t_center = (grid.center_of(idx) - cam_origin).dot(ray);
        grid.fuse_observation(idx, dist - t_center);
        ++stats.voxel_updates;
      });

      // Label the voxel nearest the surface with the covering mask's class.
      std::string label = "unlabeled";
      double best_conf = -1.0;
      for (const auto& mask : frame.masks) {
        if (mask.at(u, v) && mask.confidence > best_conf) {
          best_conf = mask.confidence;
          label = mask.class_name;
        }
      }
      grid.add_label(grid.index_of(surface), label);
    }
  }
  return stats;
}

}  // namespace sgforge::fundamental
