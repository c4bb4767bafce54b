#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgforge/fundamental/mc_tables.hpp"
#include "sgforge/fundamental/tsdf.hpp"

namespace sgforge::fundamental {

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::string> vertex_labels;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  [[nodiscard]] bool empty() const { return triangles.empty(); }

  [[nodiscard]] double surface_area() const {
    double area = 0.0;
    for (const auto& tri : triangles) {
      const Eigen::Vector3d& a = vertices[tri[0]];
      const Eigen::Vector3d& b = vertices[tri[1]];
      const Eigen::Vector3d& c = vertices[tri[2]];
      area += 0.5 * (b - a).cross(c - a).norm();
    }
    return area;
  }
};

namespace detail {

// Cube corner offsets in the Bourke numbering.
inline constexpr std::array<std::array<std::int64_t, 3>, 8> kCorners = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

inline constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0},
    {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

struct EdgeKey {
  VoxelIndex base;
  int axis;

  bool operator<(const EdgeKey& other) const {
    if (base != other.base) return base < other.base;
    return axis < other.axis;
  }
};

inline std::string argmax_label(const std::map<std::string, double>& histogram) {
  std::string best = "unlabeled";
  double best_count = 0.0;
  for (const auto& [name, count] : histogram) {
    // strictly greater keeps the lexicographically smallest name on ties,
    // since std::map iterates in sorted key order
    if (count > best_count) {
      best_count = count;
      best = name;
    }
  }
  return best;
}

}  // namespace detail

/// Zero-isosurface extraction via marching cubes. Only cubes whose eight
/// corner voxels are all observed are polygonized. Each vertex carries the
/// argmax class of the interpolation-weighted histograms of its two edge
/// voxels (ties broken lexicographically).
inline Mesh extract_mesh(const TsdfGrid& grid) {
  if (grid.empty()) throw input_error("EmptyGrid", "cannot mesh an empty grid");

  std::vector<VoxelIndex> bases;
  bases.reserve(grid.voxels().size());
  for (const auto& [idx, voxel] : grid.voxels()) bases.push_back(idx);
  std::sort(bases.begin(), bases.end());

  Mesh mesh;
  std::map<detail::EdgeKey, std::uint32_t> edge_vertices;

  std::array<const Voxel*, 8> corner_voxels{};
  std::array<Eigen::Vector3d, 8> corner_pos;
  std::array<double, 8> corner_sdf{};

  for (const VoxelIndex& base : bases) {
    bool complete = true;
    for (int c = 0; c < 8 && complete; ++c) {
      VoxelIndex idx{base[0] + detail::kCorners[static_cast<std::size_t>(c)][0],
                     base[1] + detail::kCorners[static_cast<std::size_t>(c)][1],
                     base[2] + detail::kCorners[static_cast<std::size_t>(c)][2]};
      const Voxel* voxel = grid.find(idx);
      if (voxel == nullptr || voxel->weight <= 0.0f) {
        complete = false;
        break;
      }
      corner_voxels[static_cast<std::size_t>(c)] = voxel;
      corner_pos[static_cast<std::size_t>(c)] = grid.center_of(idx);
      corner_sdf[static_cast<std::size_t>(c)] = voxel->sdf;
    }
    if (!complete) continue;

    unsigned cube_index = 0;
    for (int c = 0; c < 8; ++c) {
      if (corner_sdf[static_cast<std::size_t>(c)] < 0.0) cube_index |= 1u << c;
    }
    if (mc_tables::kEdgeTable[cube_index] == 0) continue;

    // Vertex on each crossed edge, shared across cubes through the edge map.
    std::array<std::uint32_t, 12> cube_edge_vertex{};
    for (int e = 0; e < 12; ++e) {
      if ((mc_tables::kEdgeTable[cube_index] & (1u << e)) == 0) continue;
      const int c0 = detail::kEdgeCorners[static_cast<std::size_t>(e)][0];
      const int c1 = detail::kEdgeCorners[static_cast<std::size_t>(e)][1];
      const auto& off0 = detail::kCorners[static_cast<std::size_t>(c0)];
      const auto& off1 = detail::kCorners[static_cast<std::size_t>(c1)];
      VoxelIndex v0{base[0] + off0[0], base[1] + off0[1], base[2] + off0[2]};
      VoxelIndex v1{base[0] + off1[0], base[1] + off1[1], base[2] + off1[2]};
      int axis = 0;
      for (int a = 0; a < 3; ++a) {
        if (off0[a] != off1[a]) axis = a;
      }
      detail::EdgeKey key{std::min(v0, v1), axis};
      auto it = edge_vertices.find(key);
      if (it != edge_vertices.end()) {
        cube_edge_vertex[static_cast<std::size_t>(e)] = it->second;
        continue;
      }

      const double s0 = corner_sdf[static_cast<std::size_t>(c0)];
      const double s1 = corner_sdf[static_cast<std::size_t>(c1)];
      double t = 0.5;
      if (std::abs(s1 - s0) > 1e-12) t = std::clamp((0.0 - s0) / (s1 - s0), 0.0, 1.0);
      Eigen::Vector3d pos = corner_pos[static_cast<std::size_t>(c0)] +
                            t * (corner_pos[static_cast<std::size_t>(c1)] -
                                 corner_pos[static_cast<std::size_t>(c0)]);

      std::map<std::string, double> histogram;
      for (const auto& [name, count] : corner_voxels[static_cast<std::size_t>(c0)]->labels) {
        histogram[name] += (1.0 - t) * count;
      }
      for (const auto& [name, count] : corner_voxels[static_cast<std::size_t>(c1)]->labels) {
        histogram[name] += t * count;
      }

      auto vertex_index = static_cast<std::uint32_t>(mesh.vertices.size());
      mesh.vertices.push_back(pos);
      mesh.vertex_labels.push_back(detail::argmax_label(histogram));
      edge_vertices.emplace(key, vertex_index);
      cube_edge_vertex[static_cast<std::size_t>(e)] = vertex_index;
    }

    const auto& tris = mc_tables::kTriTable[cube_index];
    for (int t = 0; tris[static_cast<std::size_t>(t)] != -1; t += 3) {
      std::array<std::uint32_t, 3> tri{
          cube_edge_vertex[static_cast<std::size_t>(tris[static_cast<std::size_t>(t)])],
          cube_edge_vertex[static_cast<std::size_t>(tris[static_cast<std::size_t>(t + 1)])],
          cube_edge_vertex[static_cast<std::size_t>(tris[static_cast<std::size_t>(t + 2)])]};
      if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

}  // namespace sgforge::fundamental
