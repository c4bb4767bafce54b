#pragma once

#include <algorithm>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "sgforge/graph/scene_graph.hpp"

namespace sgtest {

inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> words = {
      "red",  "round", "wooden", "metal", "large",  "small",  "clean", "worn",
      "desk", "lamp",  "chair",  "mug",   "carpet", "window", "shelf", "plant"};
  return words;
}

inline sgforge::graph::NodeKind kind_for_layer(int layer) {
  using sgforge::graph::NodeKind;
  switch (layer) {
    case 1: return NodeKind::place;
    case 2: return NodeKind::object;
    case 3: return NodeKind::room;
    case 4: return NodeKind::floor;
    default: return NodeKind::building;
  }
}

/// Well-formed random 5-layer graph: every insertion goes through the checked
/// API, so validate() is empty by construction.
inline sgforge::graph::SceneGraph random_valid_graph(std::mt19937_64& rng) {
  using sgforge::graph::GraphNode;
  sgforge::graph::SceneGraph g(5);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_int_distribution<std::size_t> word(0, word_pool().size() - 1);

  std::vector<std::vector<sgforge::graph::NodeId>> by_layer(6);
  const std::array<std::pair<int, int>, 5> counts = {
      {{3, 10}, {0, 6}, {1, 3}, {1, 2}, {1, 1}}};
  for (int layer = 1; layer <= 5; ++layer) {
    std::uniform_int_distribution<int> node_count(
        counts[static_cast<std::size_t>(layer - 1)].first,
        counts[static_cast<std::size_t>(layer - 1)].second);
    const int n = node_count(rng);
    for (int i = 0; i < n; ++i) {
      GraphNode node;
      node.layer = layer;
      node.kind = kind_for_layer(layer);
      node.centroid = Eigen::Vector3d(coord(rng), coord(rng), coord(rng));
      if (rng() % 2 == 0) node.label = word_pool()[word(rng)];
      if (rng() % 3 == 0) {
        node.descriptions.add("state", word_pool()[word(rng)]);
        node.descriptions.add("predicate", "near the " + word_pool()[word(rng)]);
      }
      if (layer == 2 && rng() % 2 == 0) {
        node.geometry_ref = "objects/blob_" + std::to_string(i) + ".ply";
      }
      by_layer[static_cast<std::size_t>(layer)].push_back(g.add_node(std::move(node)));
    }
  }

  // Random legal edges: same or adjacent layer.
  std::uniform_int_distribution<int> layer_pick(1, 5);
  const std::size_t edge_attempts = 12 + rng() % 20;
  for (std::size_t e = 0; e < edge_attempts; ++e) {
    const int la = layer_pick(rng);
    const int lb = std::clamp(la + static_cast<int>(rng() % 3) - 1, 1, 5);
    const auto& as = by_layer[static_cast<std::size_t>(la)];
    const auto& bs = by_layer[static_cast<std::size_t>(lb)];
    if (as.empty() || bs.empty()) continue;
    const auto& u = as[rng() % as.size()];
    const auto& v = bs[rng() % bs.size()];
    if (u == v) continue;
    g.add_edge(u, v);
  }
  g.metadata()["dataset"] = "random_" + std::to_string(rng() % 1000);
  return g;
}

/// One randomized mutation step; illegal operations are expected to throw and
/// must leave the graph unchanged. Returns the op name (for debugging).
inline std::string mutate_graph(sgforge::graph::SceneGraph& g, std::mt19937_64& rng) {
  using sgforge::graph::GraphNode;
  const int op = static_cast<int>(rng() % 4);
  const auto& nodes = g.nodes();
  switch (op) {
    case 0: {  // add a node on a random layer
      GraphNode node;
      node.layer = 1 + static_cast<int>(rng() % 5);
      node.kind = kind_for_layer(node.layer);
      node.centroid = Eigen::Vector3d::Zero();
      try {
        g.add_node(std::move(node));
      } catch (const sgforge::Error&) {
      }
      return "add_node";
    }
    case 1: {  // attempt an arbitrary edge, possibly illegal
      if (nodes.size() < 2) return "add_edge_skip";
      const auto& u = nodes[rng() % nodes.size()].id;
      const auto& v = nodes[rng() % nodes.size()].id;
      try {
        g.add_edge(u, v);
      } catch (const sgforge::Error&) {
      }
      return "add_edge";
    }
    case 2: {  // attempt an edge between far layers specifically
      sgforge::graph::NodeId low, high;
      for (const auto& node : nodes) {
        if (node.layer == 1) low = node.id;
        if (node.layer >= 3) high = node.id;
      }
      if (low.empty() || high.empty()) return "far_edge_skip";
      try {
        g.add_edge(low, high);
      } catch (const sgforge::Error&) {
      }
      return "far_edge";
    }
    default: {  // mutate a label through the checked surface
      if (nodes.empty()) return "label_skip";
      auto* node = g.find_mutable(nodes[rng() % nodes.size()].id);
      if (node != nullptr) node->label = word_pool()[rng() % word_pool().size()];
      return "relabel";
    }
  }
}

}  // namespace sgtest
