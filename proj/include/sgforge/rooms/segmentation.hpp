#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/places.hpp"
#include "sgforge/objects/object_node.hpp"
#include "sgforge/rooms/types.hpp"

namespace sgforge::rooms {

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

}  // namespace detail

/// Splits the places graph into rooms with a 0-dimensional persistence sweep
/// over the clearance filtration: descending the clearance threshold, two
/// meeting components merge only while the younger one has lived for less
/// than persistence_min; long-lived components survive as rooms. Components
/// that reach the end of the sweep without enough lifetime of their own are
/// folded into the nearest surviving room (graph hops, then Euclidean).
inline std::vector<RoomNode> segment_rooms(const fundamental::PlacesGraph& places,
                                           double persistence_min = 0.3) {
  const std::size_t n = places.places.size();
  if (n == 0) throw input_error("NoPlaces", "places graph is empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ca = places.places[a].clearance;
    const double cb = places.places[b].clearance;
    if (ca != cb) return ca > cb;
    return a < b;
  });

  detail::UnionFind uf(n);
  std::vector<double> birth(n, 0.0);
  std::vector<bool> active(n, false);
  double min_clearance = std::numeric_limits<double>::infinity();

  for (const std::size_t p : order) {
    const double tau = places.places[p].clearance;
    min_clearance = std::min(min_clearance, tau);
    birth[p] = tau;
    active[p] = true;
    for (const std::size_t q : places.adjacency[p]) {
      if (!active[q]) continue;
      std::size_t rp = uf.find(p);
      std::size_t rq = uf.find(q);
      if (rp == rq) continue;
      std::size_t elder = rp;
      std::size_t younger = rq;
      if (birth[rq] > birth[rp] || (birth[rq] == birth[rp] && rq < rp)) {
        elder = rq;
        younger = rp;
      }
      if (birth[younger] - tau < persistence_min) uf.parent[younger] = elder;
    }
  }

  std::vector<std::size_t> root_of(n);
  std::vector<std::size_t> roots;
  for (std::size_t p = 0; p < n; ++p) {
    root_of[p] = uf.find(p);
    if (root_of[p] == p) roots.push_back(p);
  }

  // Rooms are the components whose own lifetime cleared the bar; everything
  // else is noise to be absorbed. At least one room always survives.
  std::vector<std::size_t> room_roots;
  for (const std::size_t r : roots) {
    if (birth[r] - min_clearance >= persistence_min) room_roots.push_back(r);
  }
  if (room_roots.empty()) {
    std::size_t best = roots.front();
    for (const std::size_t r : roots) {
      if (birth[r] > birth[best] || (birth[r] == birth[best] && r < best)) best = r;
    }
    room_roots.push_back(best);
  }
  std::sort(room_roots.begin(), room_roots.end());

  std::vector<int> room_of(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    const auto it = std::find(room_roots.begin(), room_roots.end(), root_of[p]);
    if (it != room_roots.end()) room_of[p] = static_cast<int>(it - room_roots.begin());
  }

  // Leftover places: breadth-first search to the nearest room over the graph,
  // falling back to Euclidean distance for disconnected islands.
  std::vector<std::size_t> pending;
  for (std::size_t p = 0; p < n; ++p) {
    if (room_of[p] < 0) pending.push_back(p);
  }
  if (!pending.empty()) {
    std::vector<int> hop_room(n, -1);
    std::queue<std::size_t> frontier;
    for (std::size_t p = 0; p < n; ++p) {
      if (room_of[p] >= 0) {
        hop_room[p] = room_of[p];
        frontier.push(p);
      }
    }
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop();
      std::vector<std::size_t> nbrs = places.adjacency[p];
      std::sort(nbrs.begin(), nbrs.end());
      for (const std::size_t q : nbrs) {
        if (hop_room[q] >= 0) continue;
        hop_room[q] = hop_room[p];
        frontier.push(q);
      }
    }
    for (const std::size_t p : pending) {
      if (hop_room[p] >= 0) {
        room_of[p] = hop_room[p];
        continue;
      }
      int best_room = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < n; ++q) {
        if (room_of[q] < 0 || root_of[q] == root_of[p]) continue;
        const double d = (places.places[p].position - places.places[q].position).norm();
        if (d < best_dist) {
          best_dist = d;
          best_room = room_of[q];
        }
      }
      room_of[p] = best_room;
    }
  }

  std::vector<RoomNode> rooms(room_roots.size());
  for (std::size_t p = 0; p < n; ++p) {
    rooms[static_cast<std::size_t>(room_of[p])].place_members.insert(p);
  }
  // Absorbing islands can leave a declared room empty only if every one of
  // its places migrated, which cannot happen: members keep their root's room.
  return rooms;
}

/// Assigns every object to the room that owns its nearest place; exact
/// distance ties go to the lower place index. Returns room index per object.
inline std::vector<std::size_t> assign_objects(std::vector<RoomNode>& rooms,
                                               const std::vector<objects::ObjectNode>& object_nodes,
                                               const fundamental::PlacesGraph& places) {
  std::vector<std::size_t> room_of_place(places.places.size(), 0);
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    for (const std::size_t p : rooms[r].place_members) room_of_place[p] = r;
  }

  std::vector<std::size_t> assignment;
  assignment.reserve(object_nodes.size());
  for (const objects::ObjectNode& node : object_nodes) {
    const Eigen::Vector3d c = node.centroid();
    std::size_t best_place = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < places.places.size(); ++p) {
      const double d = (places.places[p].position - c).norm();
      if (d < best_dist) {
        best_dist = d;
        best_place = p;
      }
    }
    const std::size_t room = room_of_place[best_place];
    rooms[room].object_members.insert(node.node_id);
    assignment.push_back(room);
  }
  return assignment;
}

}  // namespace sgforge::rooms
