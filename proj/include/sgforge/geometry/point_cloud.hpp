#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "sgforge/geometry/camera.hpp"

namespace sgforge::geometry {

using PointCloud = std::vector<Eigen::Vector3d>;

inline Eigen::Vector3d centroid(const PointCloud& cloud) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud) sum += p;
  return cloud.empty() ? sum : Eigen::Vector3d(sum / static_cast<double>(cloud.size()));
}

inline Aabb bounds(const PointCloud& cloud) {
  Aabb box;
  for (const auto& p : cloud) box.expand(p);
  return box;
}

namespace detail {

using CellKey = std::array<std::int64_t, 3>;

inline CellKey cell_of(const Eigen::Vector3d& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    // Teschner-style spatial hash.
    return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
  }
};

}  // namespace detail

/// Hash grid over a fixed point set for radius queries.
class PointGrid {
 public:
  PointGrid(const PointCloud& points, double cell) : points_(points), cell_(cell) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[detail::cell_of(points[i], cell_)].push_back(i);
    }
  }

  [[nodiscard]] bool has_neighbor_within(const Eigen::Vector3d& q, double radius) const {
    const double r2 = radius * radius;
    auto base = detail::cell_of(q, cell_);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({base[0] + dx, base[1] + dy, base[2] + dz});
          if (it == cells_.end()) continue;
          for (std::size_t idx : it->second) {
            if ((points_[idx] - q).squaredNorm() <= r2) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  const PointCloud& points_;
  double cell_;
  std::unordered_map<detail::CellKey, std::vector<std::size_t>, detail::CellKeyHash> cells_;
};

/// Fraction of `query` points that have a `reference` point within `radius`.
inline double overlap_fraction(const PointCloud& query, const PointCloud& reference,
                               double radius) {
  if (query.empty() || reference.empty()) return 0.0;
  PointGrid grid(reference, std::max(radius, 1e-9));
  std::size_t hits = 0;
  for (const auto& p : query) {
    if (grid.has_neighbor_within(p, radius)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(query.size());
}

/// One centroid per occupied leaf cell, emitted in sorted cell order so the
/// result is deterministic regardless of input ordering.
inline PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  std::map<detail::CellKey, std::pair<Eigen::Vector3d, std::size_t>> cells;
  for (const auto& p : cloud) {
    auto& [sum, count] = cells[detail::cell_of(p, leaf)];
    if (count == 0) sum = Eigen::Vector3d::Zero();
    sum += p;
    ++count;
  }
  PointCloud out;
  out.reserve(cells.size());
  for (const auto& [key, acc] : cells) {
    out.push_back(acc.first / static_cast<double>(acc.second));
  }
  return out;
}

/// Statistical outlier removal: drop points whose mean distance to their k
/// nearest neighbors exceeds mean + stddev_mult * sigma over the cloud.
inline PointCloud remove_statistical_outliers(const PointCloud& cloud, std::size_t k = 16,
                                              double stddev_mult = 2.0) {
  const std::size_t n = cloud.size();
  if (n <= k + 1) return cloud;
  std::vector<double> mean_dist(n);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d2[j] = (cloud[i] - cloud[j]).squaredNorm();
    d2[i] = std::numeric_limits<double>::infinity();
    std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(k - 1), d2.end());
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += std::sqrt(d2[j]);
    mean_dist[i] = acc / static_cast<double>(k);
  }
  double mu = 0.0;
  for (double d : mean_dist) mu += d;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double d : mean_dist) var += (d - mu) * (d - mu);
  double sigma = std::sqrt(var / static_cast<double>(n));
  const double cutoff = mu + stddev_mult * sigma;
  PointCloud out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (mean_dist[i] <= cutoff) out.push_back(cloud[i]);
  }
  return out;
}

}  // namespace sgforge::geometry
