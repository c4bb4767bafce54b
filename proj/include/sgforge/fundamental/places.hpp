#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/tsdf.hpp"

namespace sgforge::fundamental {

struct PlacesParams {
  double agent_height = 1.6;
  /// A cell survives ridge extraction iff no free neighbour exceeds its
  /// clearance by ridge_alpha times the step length. Values below 1 keep
  /// saddle cells (doorways) in addition to strict local maxima.
  double ridge_alpha = 0.9;
  double nms_radius_factor = 2.0;
  double max_edge_factor = 6.0;
};

/// Horizontal clearance field sampled at the traversal slice
/// (half the agent height above the lowest observed voxel).
struct ClearanceField {
  double voxel_size = 0.0;
  double slice_z = 0.0;
  std::int64_t min_x = 0;
  std::int64_t min_y = 0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<bool> occupied;
  std::vector<double> clearance;

  [[nodiscard]] std::size_t cell(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }

  [[nodiscard]] bool in_bounds(std::int64_t ix, std::int64_t iy) const {
    return ix >= 0 && iy >= 0 && ix < static_cast<std::int64_t>(nx) &&
           iy < static_cast<std::int64_t>(ny);
  }

  [[nodiscard]] bool is_free(std::size_t ix, std::size_t iy) const { return !occupied[cell(ix, iy)]; }

  [[nodiscard]] Eigen::Vector3d cell_center(std::size_t ix, std::size_t iy) const {
    Eigen::Vector3d p;
    p.x() = (static_cast<double>(min_x + static_cast<std::int64_t>(ix)) + 0.5) * voxel_size;
    p.y() = (static_cast<double>(min_y + static_cast<std::int64_t>(iy)) + 0.5) * voxel_size;
    p.z() = slice_z;
    return p;
  }

  /// Grid cell containing a world point, or nullopt outside the field.
  [[nodiscard]] std::optional<std::pair<std::size_t, std::size_t>> locate(
      const Eigen::Vector3d& world) const {
    auto ix = static_cast<std::int64_t>(std::floor(world.x() / voxel_size)) - min_x;
    auto iy = static_cast<std::int64_t>(std::floor(world.y() / voxel_size)) - min_y;
    if (!in_bounds(ix, iy)) return std::nullopt;
    return std::make_pair(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
  }
};

struct Place {
  Eigen::Vector3d position;
  double clearance = 0.0;
};

struct PlacesGraph {
  std::vector<Place> places;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<std::size_t>> adjacency;
};

namespace detail {

/// Finite stand-in for "no source in sight"; avoids inf-inf in the
/// parabola intersection below while dwarfing any real squared distance.
inline constexpr double kFarSquared = 1e15;

/// Felzenszwalb-Huttenlocher 1D squared distance transform.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& out) {
  const std::size_t n = f.size();
  out.assign(n, 0.0);
  if (n == 0) return;
  std::vector<std::size_t> v(n, 0);
  std::vector<double> z(n + 1, 0.0);
  const auto intersect = [&](std::size_t q, std::size_t p) {
    const double dq = static_cast<double>(q);
    const double dp = static_cast<double>(p);
    return ((f[q] + dq * dq) - (f[p] + dp * dp)) / (2.0 * dq - 2.0 * dp);
  };
  std::size_t k = 0;
  z[0] = -kFarSquared;
  z[1] = kFarSquared;
  for (std::size_t q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (k > 0 && s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    if (k == 0 && s <= z[0]) s = -kFarSquared;
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFarSquared;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double d = static_cast<double>(q) - static_cast<double>(v[k]);
    out[q] = d * d + f[v[k]];
  }
}

inline void edt_2d(std::vector<double>& field, std::size_t nx, std::size_t ny) {
  std::vector<double> line;
  std::vector<double> dist;
  line.reserve(std::max(nx, ny));
  for (std::size_t iy = 0; iy < ny; ++iy) {
    line.assign(field.begin() + static_cast<std::ptrdiff_t>(iy * nx),
                field.begin() + static_cast<std::ptrdiff_t>((iy + 1) * nx));
    edt_1d(line, dist);
    std::copy(dist.begin(), dist.end(), field.begin() + static_cast<std::ptrdiff_t>(iy * nx));
  }
  for (std::size_t ix = 0; ix < nx; ++ix) {
    line.resize(ny);
    for (std::size_t iy = 0; iy < ny; ++iy) line[iy] = field[iy * nx + ix];
    edt_1d(line, dist);
    for (std::size_t iy = 0; iy < ny; ++iy) field[iy * nx + ix] = dist[iy];
  }
}

constexpr std::array<std::pair<int, int>, 4> kFourNeighbors = {
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

/// Labels 4-connected free-cell components; occupied cells stay -1.
inline std::vector<int> free_components(const ClearanceField& field) {
  std::vector<int> label(field.nx * field.ny, -1);
  int next = 0;
  std::queue<std::pair<std::size_t, std::size_t>> frontier;
  for (std::size_t iy = 0; iy < field.ny; ++iy) {
    for (std::size_t ix = 0; ix < field.nx; ++ix) {
      if (!field.is_free(ix, iy) || label[field.cell(ix, iy)] >= 0) continue;
      label[field.cell(ix, iy)] = next;
      frontier.emplace(ix, iy);
      while (!frontier.empty()) {
        const auto [cx, cy] = frontier.front();
        frontier.pop();
        for (const auto& [dx, dy] : kFourNeighbors) {
          const std::int64_t jx = static_cast<std::int64_t>(cx) + dx;
          const std::int64_t jy = static_cast<std::int64_t>(cy) + dy;
          if (!field.in_bounds(jx, jy)) continue;
          const auto ujx = static_cast<std::size_t>(jx);
          const auto ujy = static_cast<std::size_t>(jy);
          if (!field.is_free(ujx, ujy) || label[field.cell(ujx, ujy)] >= 0) continue;
          label[field.cell(ujx, ujy)] = next;
          frontier.emplace(ujx, ujy);
        }
      }
      ++next;
    }
  }
  return label;
}

constexpr std::array<std::pair<int, int>, 8> kEightNeighbors = {
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

/// Steepest-ascent cell walk through free space, start excluded; ends at the
/// cell where no neighbor gains clearance.
inline std::vector<std::pair<std::size_t, std::size_t>> ascent_route(
    const ClearanceField& field, std::pair<std::size_t, std::size_t> start) {
  std::vector<std::pair<std::size_t, std::size_t>> route;
  auto at = start;
  for (std::size_t guard = field.nx * field.ny; guard > 0; --guard) {
    const double here = field.clearance[field.cell(at.first, at.second)];
    double best_gain = 0.0;
    std::optional<std::pair<std::size_t, std::size_t>> next;
    for (const auto& [dx, dy] : kEightNeighbors) {
      const std::int64_t jx = static_cast<std::int64_t>(at.first) + dx;
      const std::int64_t jy = static_cast<std::int64_t>(at.second) + dy;
      if (!field.in_bounds(jx, jy)) continue;
      const auto ujx = static_cast<std::size_t>(jx);
      const auto ujy = static_cast<std::size_t>(jy);
      if (!field.is_free(ujx, ujy)) continue;
      const double gain = (field.clearance[field.cell(ujx, ujy)] - here) /
                          std::hypot(static_cast<double>(dx), static_cast<double>(dy));
      if (gain > best_gain) {
        best_gain = gain;
        next = {ujx, ujy};
      }
    }
    if (!next) break;
    route.push_back(*next);
    at = *next;
  }
  return route;
}

}  // namespace detail

/// Slices the grid at traversal height and computes per-cell clearance
/// (metric distance to the nearest occupied cell within the slice bounds).
inline ClearanceField compute_clearance_field(const TsdfGrid& grid, const PlacesParams& params) {
  if (grid.empty()) throw input_error("NoFreeSpace", "grid holds no observed voxels");

  std::int64_t min_x = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_x = std::numeric_limits<std::int64_t>::min();
  std::int64_t min_y = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_y = std::numeric_limits<std::int64_t>::min();
  double min_z = std::numeric_limits<double>::infinity();
  for (const auto& [idx, voxel] : grid.voxels()) {
    min_x = std::min(min_x, idx[0]);
    max_x = std::max(max_x, idx[0]);
    min_y = std::min(min_y, idx[1]);
    max_y = std::max(max_y, idx[1]);
    min_z = std::min(min_z, grid.center_of(idx).z());
  }

  ClearanceField field;
  field.voxel_size = grid.voxel_size();
  field.slice_z = min_z + 0.5 * params.agent_height;
  field.min_x = min_x;
  field.min_y = min_y;
  field.nx = static_cast<std::size_t>(max_x - min_x + 1);
  field.ny = static_cast<std::size_t>(max_y - min_y + 1);
  field.occupied.assign(field.nx * field.ny, false);

  const double band = grid.voxel_size();
  for (const auto& [idx, voxel] : grid.voxels()) {
    if (voxel.weight <= 0.0f) continue;
    if (std::abs(grid.center_of(idx).z() - field.slice_z) > band) continue;
    if (voxel.sdf >= static_cast<float>(grid.voxel_size())) continue;
    const auto ix = static_cast<std::size_t>(idx[0] - min_x);
    const auto iy = static_cast<std::size_t>(idx[1] - min_y);
    field.occupied[field.cell(ix, iy)] = true;
  }

  std::vector<double> squared(field.nx * field.ny, detail::kFarSquared);
  bool any_occupied = false;
  for (std::size_t i = 0; i < squared.size(); ++i) {
    if (field.occupied[i]) {
      squared[i] = 0.0;
      any_occupied = true;
    }
  }
  field.clearance.assign(field.nx * field.ny, 0.0);
  if (!any_occupied) {
    const double cap = std::hypot(static_cast<double>(field.nx), static_cast<double>(field.ny)) *
                       field.voxel_size;
    std::fill(field.clearance.begin(), field.clearance.end(), cap);
    return field;
  }
  detail::edt_2d(squared, field.nx, field.ny);
  for (std::size_t i = 0; i < squared.size(); ++i) {
    field.clearance[i] = std::sqrt(squared[i]) * field.voxel_size;
  }
  return field;
}

/// Sparse traversability graph: ridge cells of the clearance field survive a
/// non-maximum suppression pass and get linked by short straight segments
/// that stay in free space.
inline PlacesGraph build_places_graph(const TsdfGrid& grid, const PlacesParams& params) {
  const ClearanceField field = compute_clearance_field(grid, params);

  struct Candidate {
    double clearance;
    std::size_t ix;
    std::size_t iy;
  };
  std::vector<Candidate> candidates;
  for (std::size_t iy = 0; iy < field.ny; ++iy) {
    for (std::size_t ix = 0; ix < field.nx; ++ix) {
      if (!field.is_free(ix, iy)) continue;
      const double here = field.clearance[field.cell(ix, iy)];
      if (here <= 0.0) continue;
      bool ridge = true;
      for (int dy = -1; dy <= 1 && ridge; ++dy) {
        for (int dx = -1; dx <= 1 && ridge; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const std::int64_t jx = static_cast<std::int64_t>(ix) + dx;
          const std::int64_t jy = static_cast<std::int64_t>(iy) + dy;
          if (!field.in_bounds(jx, jy)) continue;
          const auto ujx = static_cast<std::size_t>(jx);
          const auto ujy = static_cast<std::size_t>(jy);
          if (!field.is_free(ujx, ujy)) continue;
          const double step = std::hypot(static_cast<double>(dx), static_cast<double>(dy)) *
                              field.voxel_size;
          if (field.clearance[field.cell(ujx, ujy)] - here >= params.ridge_alpha * step) {
            ridge = false;
          }
        }
      }
      if (ridge) candidates.push_back({here, ix, iy});
    }
  }
  if (candidates.empty()) throw input_error("NoFreeSpace", "no traversable cells at slice height");

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.clearance != b.clearance) return a.clearance > b.clearance;
    if (a.iy != b.iy) return a.iy < b.iy;
    return a.ix < b.ix;
  });

  PlacesGraph graph;
  const double nms_radius = params.nms_radius_factor * field.voxel_size;
  std::vector<std::pair<std::size_t, std::size_t>> kept_cells;
  for (const Candidate& c : candidates) {
    bool suppressed = false;
    for (const auto& [kx, ky] : kept_cells) {
      const double dx = (static_cast<double>(c.ix) - static_cast<double>(kx)) * field.voxel_size;
      const double dy = (static_cast<double>(c.iy) - static_cast<double>(ky)) * field.voxel_size;
      if (std::hypot(dx, dy) < nms_radius) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) continue;
    kept_cells.emplace_back(c.ix, c.iy);
    graph.places.push_back({field.cell_center(c.ix, c.iy), c.clearance});
  }

  const double max_edge = params.max_edge_factor * field.voxel_size;
  const double sample_step = 0.5 * field.voxel_size;
  const auto chord_clear = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a).norm() / sample_step)));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(steps);
      const auto cell = field.locate(a + t * (b - a));
      if (!cell || !field.is_free(cell->first, cell->second)) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < graph.places.size(); ++i) {
    for (std::size_t j = i + 1; j < graph.places.size(); ++j) {
      const Eigen::Vector3d& a = graph.places[i].position;
      const Eigen::Vector3d& b = graph.places[j].position;
      if ((b - a).norm() > max_edge) continue;
      if (chord_clear(a, b)) graph.edges.emplace_back(i, j);
    }
  }

  // The ridge test drops strictly uphill cells, so funnel floors (doorways,
  // wall shadows) keep places whose neighborhood misses the basin they drain
  // into; a clearance sweep over such a graph mistakes them for rooms. Give
  // every place that lacks an uphill edge a chain of bridge places along its
  // steepest-ascent route until it reaches a place that activates earlier in
  // the sweep, keeping the suppression spacing and edge rules intact.
  const std::vector<int> flood = detail::free_components(field);
  std::vector<std::pair<std::size_t, std::size_t>> place_cell(kept_cells);
  const auto cell_flood = [&](std::pair<std::size_t, std::size_t> c) {
    return flood[field.cell(c.first, c.second)];
  };
  const auto earlier = [&](std::size_t q, std::size_t p) {
    if (graph.places[q].clearance != graph.places[p].clearance) {
      return graph.places[q].clearance > graph.places[p].clearance;
    }
    return q < p;
  };
  std::vector<char> has_uphill(graph.places.size(), 0);
  for (const auto& [i, j] : graph.edges) has_uphill[earlier(i, j) ? j : i] = 1;

  std::set<std::pair<std::size_t, std::size_t>> edge_set(graph.edges.begin(), graph.edges.end());
  const auto add_edge = [&](std::size_t i, std::size_t j) {
    const auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
    if (edge_set.insert(key).second) graph.edges.push_back(key);
  };

  struct Hop {
    bool existing;
    std::size_t index;  // place index or slot in the planned-cell list
  };
  const auto max_span = static_cast<std::size_t>(params.max_edge_factor);
  const std::size_t original_count = graph.places.size();
  for (std::size_t p = 0; p < original_count; ++p) {
    if (has_uphill[p]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> route{place_cell[p]};
    const auto tail = detail::ascent_route(field, place_cell[p]);
    route.insert(route.end(), tail.begin(), tail.end());

    // Plan the whole chain against frozen state so a dead end changes nothing.
    std::vector<Hop> chain;
    std::vector<std::pair<std::size_t, std::size_t>> planned;
    Hop anchor{true, p};
    Eigen::Vector3d anchor_pos = graph.places[p].position;
    std::size_t at = 0;
    bool done = false;
    bool dead = false;
    while (!done && !dead) {
      if (at + 1 >= route.size()) {
        dead = true;
        break;
      }
      bool advanced = false;
      for (std::size_t span = std::min(max_span, route.size() - 1 - at); span >= 1 && !advanced;
           --span) {
        const auto cell = route[at + span];
        const Eigen::Vector3d center = field.cell_center(cell.first, cell.second);
        double near_d = nms_radius;
        int near_kind = 0;  // 0 open, 1 existing place, 2 cell planned earlier
        std::size_t near_index = 0;
        for (std::size_t q = 0; q < graph.places.size(); ++q) {
          const double d = (graph.places[q].position - center).norm();
          if (d < near_d) {
            near_d = d;
            near_kind = 1;
            near_index = q;
          }
        }
        for (std::size_t k = 0; k < planned.size(); ++k) {
          const double d = (field.cell_center(planned[k].first, planned[k].second) - center).norm();
          if (d < near_d) {
            near_d = d;
            near_kind = 2;
            near_index = k;
          }
        }
        if (near_kind != 0 && anchor.existing == (near_kind == 1) && anchor.index == near_index) {
          at += span;  // still inside the anchor's spacing disk: walk on
          advanced = true;
        } else if (near_kind == 1) {
          const std::size_t q = near_index;
          if (cell_flood(place_cell[q]) != cell_flood(cell)) continue;
          if ((graph.places[q].position - anchor_pos).norm() > max_edge) continue;
          if (!chord_clear(anchor_pos, graph.places[q].position)) continue;
          chain.push_back({true, q});
          anchor = {true, q};
          anchor_pos = graph.places[q].position;
          at += span;
          advanced = true;
          done = earlier(q, p);
        } else if (near_kind == 0) {
          if ((center - anchor_pos).norm() > max_edge) continue;
          if (!chord_clear(anchor_pos, center)) continue;
          chain.push_back({false, planned.size()});
          planned.push_back(cell);
          anchor = {false, planned.size() - 1};
          anchor_pos = center;
          at += span;
          advanced = true;
        }
      }
      if (!advanced) dead = true;
    }
    if (dead || !done) continue;

    std::size_t last = p;
    for (const Hop& hop : chain) {
      std::size_t next = hop.index;
      if (!hop.existing) {
        next = graph.places.size();
        const auto cell = planned[hop.index];
        graph.places.push_back(
            {field.cell_center(cell.first, cell.second),
             field.clearance[field.cell(cell.first, cell.second)]});
        place_cell.push_back(cell);
        has_uphill.push_back(1);
      }
      add_edge(last, next);
      has_uphill[earlier(last, next) ? next : last] = 1;
      last = next;
    }
    has_uphill[p] = 1;
  }

  graph.adjacency.assign(graph.places.size(), {});
  for (const auto& [i, j] : graph.edges) {
    graph.adjacency[i].push_back(j);
    graph.adjacency[j].push_back(i);
  }
  return graph;
}

}  // namespace sgforge::fundamental
