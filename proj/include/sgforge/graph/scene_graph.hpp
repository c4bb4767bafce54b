#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sgforge/common.hpp"

namespace sgforge::graph {

using NodeId = std::string;

enum class NodeKind { place, object, room, floor, building };

inline const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::place: return "place";
    case NodeKind::object: return "object";
    case NodeKind::room: return "room";
    case NodeKind::floor: return "floor";
    case NodeKind::building: return "building";
  }
  return "place";
}

inline std::optional<NodeKind> kind_from_string(std::string_view s) {
  if (s == "place") return NodeKind::place;
  if (s == "object") return NodeKind::object;
  if (s == "room") return NodeKind::room;
  if (s == "floor") return NodeKind::floor;
  if (s == "building") return NodeKind::building;
  return std::nullopt;
}

/// Layer a kind must live on: place=1, object=2, room=3, floor=4, building=5.
inline int layer_for_kind(NodeKind kind) { return static_cast<int>(kind) + 1; }

struct Description {
  std::string key;
  std::string text;

  bool operator==(const Description&) const = default;
};

/// Ordered key/text attribute list attached to a node. Duplicate keys are
/// merged in place ("; " separated) except for "predicate", which may repeat.
class DescriptionSet {
 public:
  void add(const std::string& key, const std::string& text) {
    if (key.empty()) throw input_error("EmptyKey", "description key must be non-empty");
    if (key != "predicate") {
      for (auto& entry : entries_) {
        if (entry.key == key) {
          if (!entry.text.empty() && !text.empty()) entry.text += "; ";
          entry.text += text;
          return;
        }
      }
    }
    entries_.push_back({key, text});
  }

  [[nodiscard]] const std::vector<Description>& attributes() const { return entries_; }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  [[nodiscard]] std::optional<std::string> find(std::string_view key) const {
    for (const auto& entry : entries_) {
      if (entry.key == key) return entry.text;
    }
    return std::nullopt;
  }

  /// All texts joined with ". " — the flat prose form used in prompts.
  [[nodiscard]] std::string joined_text() const {
    std::string out;
    for (const auto& entry : entries_) {
      if (!out.empty()) out += ". ";
      out += entry.text;
    }
    return out;
  }

  /// "key: text" lines, one per entry — the form the caption grammar parses.
  [[nodiscard]] std::string keyed_lines() const {
    std::string out;
    for (const auto& entry : entries_) {
      if (!out.empty()) out += "\n";
      out += entry.key + ": " + entry.text;
    }
    return out;
  }

  void clear() { entries_.clear(); }

  bool operator==(const DescriptionSet&) const = default;

 private:
  std::vector<Description> entries_;
};

struct GraphNode {
  NodeId id;
  int layer = 0;
  NodeKind kind = NodeKind::place;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  DescriptionSet descriptions;
  std::optional<std::string> label;
  std::optional<std::string> geometry_ref;

  bool operator==(const GraphNode& other) const {
    return id == other.id && layer == other.layer && kind == other.kind &&
           centroid == other.centroid && descriptions == other.descriptions &&
           label == other.label && geometry_ref == other.geometry_ref;
  }
};

struct Violation {
  std::string code;
  std::string detail;
};

/// Layered node/edge store. Edges are unordered, unlabeled pairs restricted
/// to the same or adjacent layers. Single-writer / multi-reader: mutating
/// calls need exclusive access, const traversal may run from many threads.
class SceneGraph {
 public:
  SceneGraph() = default;
  explicit SceneGraph(int layer_count) : layer_count_(layer_count) {
    if (layer_count < 1) throw input_error("LayerOutOfRange", "layer count must be >= 1");
  }

  [[nodiscard]] int layer_count() const { return layer_count_; }

  /// Inserts a node. An empty id is auto-assigned as "L{layer}_{counter}".
  NodeId add_node(GraphNode node) {
    if (node.layer < 1 || node.layer > layer_count_) {
      throw input_error("LayerOutOfRange",
                        "layer " + std::to_string(node.layer) + " outside 1.." +
                            std::to_string(layer_count_));
    }
    if (layer_for_kind(node.kind) != node.layer) {
      throw input_error("KindLayerMismatch",
                        std::string(to_string(node.kind)) + " node cannot live on layer " +
                            std::to_string(node.layer));
    }
    if (node.id.empty()) {
      node.id = "L" + std::to_string(node.layer) + "_" +
                std::to_string(++layer_counters_[node.layer]);
    }
    if (index_.contains(node.id)) {
      throw input_error("DuplicateId", "node id already present: " + node.id);
    }
    index_.emplace(node.id, nodes_.size());
    nodes_.push_back(std::move(node));
    return nodes_.back().id;
  }

  /// Adds an undirected edge; idempotent for repeated insertion.
  void add_edge(const NodeId& u, const NodeId& v) {
    const GraphNode* a = find(u);
    const GraphNode* b = find(v);
    if (a == nullptr) throw input_error("MissingNode", "no such node: " + u);
    if (b == nullptr) throw input_error("MissingNode", "no such node: " + v);
    if (u == v) throw input_error("SelfLoop", "self loop on " + u);
    if (std::abs(a->layer - b->layer) > 1) {
      throw invariant_error("LayerAdjacencyViolation",
                            u + " (layer " + std::to_string(a->layer) + ") -- " + v +
                                " (layer " + std::to_string(b->layer) + ")");
    }
    edges_.insert(normalized(u, v));
  }

  [[nodiscard]] bool has_edge(const NodeId& u, const NodeId& v) const {
    return edges_.contains(normalized(u, v));
  }

  [[nodiscard]] const GraphNode* find(const NodeId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second];
  }

  [[nodiscard]] GraphNode* find_mutable(const NodeId& id) {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second];
  }

  [[nodiscard]] const std::vector<GraphNode>& nodes() const { return nodes_; }
  [[nodiscard]] const std::set<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

  // Raw store access. Bypasses all insertion checks; validate() is the net
  // that catches graphs corrupted through here.
  [[nodiscard]] std::vector<GraphNode>& raw_nodes() { return nodes_; }
  [[nodiscard]] std::set<std::pair<NodeId, NodeId>>& raw_edges() { return edges_; }

  [[nodiscard]] std::vector<NodeId> layer_nodes(int layer) const {
    std::vector<NodeId> ids;
    for (const auto& node : nodes_) {
      if (node.layer == layer) ids.push_back(node.id);
    }
    return ids;
  }

  [[nodiscard]] std::size_t layer_size(int layer) const {
    std::size_t n = 0;
    for (const auto& node : nodes_) {
      if (node.layer == layer) ++n;
    }
    return n;
  }

  [[nodiscard]] std::vector<NodeId> neighbors(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& [u, v] : edges_) {
      if (u == id) out.push_back(v);
      else if (v == id) out.push_back(u);
    }
    return out;
  }

  [[nodiscard]] const std::map<std::string, std::string>& metadata() const { return metadata_; }
  [[nodiscard]] std::map<std::string, std::string>& metadata() { return metadata_; }

  void set_layer_count(int layer_count) {
    if (layer_count < 1) throw input_error("LayerOutOfRange", "layer count must be >= 1");
    layer_count_ = layer_count;
  }

  /// Rebuilds the id index from the raw node store (used after deserialize
  /// or raw mutation). Duplicate ids keep the first occurrence.
  void reindex() {
    index_.clear();
    layer_counters_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      index_.try_emplace(nodes_[i].id, i);
      // keep auto-id counters ahead of any "L{k}_{n}" id already present
      const auto& id = nodes_[i].id;
      if (id.size() > 1 && id[0] == 'L') {
        auto sep = id.find('_');
        if (sep != std::string::npos) {
          try {
            int layer = std::stoi(id.substr(1, sep - 1));
            long counter = std::stol(id.substr(sep + 1));
            auto& c = layer_counters_[layer];
            c = std::max(c, counter);
          } catch (...) {
          }
        }
      }
    }
  }

  /// Full invariant sweep; empty result iff the graph is well formed.
  [[nodiscard]] std::vector<Violation> validate() const {
    std::vector<Violation> out;
    if (layer_count_ < 1 && !nodes_.empty()) {
      out.push_back({"LayerOutOfRange", "graph holds nodes but has no layers configured"});
    }
    std::set<NodeId> seen;
    for (const auto& node : nodes_) {
      if (!seen.insert(node.id).second) {
        out.push_back({"DuplicateId", node.id});
        continue;
      }
      if (node.layer < 1 || node.layer > std::max(layer_count_, 0)) {
        out.push_back({"LayerOutOfRange", node.id + " on layer " + std::to_string(node.layer)});
      }
      if (layer_for_kind(node.kind) != node.layer) {
        out.push_back({"KindLayerMismatch",
                       node.id + " kind " + to_string(node.kind) + " on layer " +
                           std::to_string(node.layer)});
      }
      std::set<std::string> keys;
      for (const auto& attr : node.descriptions.attributes()) {
        if (attr.key.empty()) {
          out.push_back({"EmptyKey", node.id});
        } else if (!keys.insert(attr.key).second && attr.key != "predicate") {
          out.push_back({"DuplicateDescriptionKey", node.id + ": " + attr.key});
        }
      }
    }
    for (const auto& [u, v] : edges_) {
      const GraphNode* a = lookup_unique(u, seen);
      const GraphNode* b = lookup_unique(v, seen);
      if (a == nullptr) out.push_back({"MissingNode", "edge endpoint " + u});
      if (b == nullptr) out.push_back({"MissingNode", "edge endpoint " + v});
      if (u == v) out.push_back({"SelfLoop", u});
      if (a != nullptr && b != nullptr && std::abs(a->layer - b->layer) > 1) {
        out.push_back({"LayerAdjacencyViolation", u + " -- " + v});
      }
    }
    return out;
  }

  bool operator==(const SceneGraph& other) const {
    return layer_count_ == other.layer_count_ && nodes_sorted() == other.nodes_sorted() &&
           edges_ == other.edges_ && metadata_ == other.metadata_;
  }

 private:
  static std::pair<NodeId, NodeId> normalized(const NodeId& u, const NodeId& v) {
    return u <= v ? std::make_pair(u, v) : std::make_pair(v, u);
  }

  [[nodiscard]] const GraphNode* lookup_unique(const NodeId& id,
                                               const std::set<NodeId>& unique_ids) const {
    if (!unique_ids.contains(id)) return nullptr;
    return find(id);
  }

  [[nodiscard]] std::vector<GraphNode> nodes_sorted() const {
    std::vector<GraphNode> copy = nodes_;
    std::sort(copy.begin(), copy.end(),
              [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
    return copy;
  }

  int layer_count_ = 0;
  std::vector<GraphNode> nodes_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::set<std::pair<NodeId, NodeId>> edges_;
  std::map<std::string, std::string> metadata_;
  std::map<int, long> layer_counters_;
};

}  // namespace sgforge::graph
