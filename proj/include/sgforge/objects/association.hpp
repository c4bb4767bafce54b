#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/geometry/point_cloud.hpp"
#include "sgforge/objects/extraction.hpp"
#include "sgforge/objects/object_node.hpp"

namespace sgforge::objects {

namespace detail {

/// Numeric suffix of ids like "L2_17"; lets ties resolve in creation order.
inline long long id_rank(const std::string& node_id) {
  const auto pos = node_id.rfind('_');
  if (pos == std::string::npos || pos + 1 >= node_id.size()) return -1;
  long long value = 0;
  for (std::size_t i = pos + 1; i < node_id.size(); ++i) {
    const char c = node_id[i];
    if (c < '0' || c > '9') return -1;
    value = value * 10 + (c - '0');
  }
  return value;
}

inline bool id_less(const std::string& a, const std::string& b) {
  const long long ra = id_rank(a);
  const long long rb = id_rank(b);
  if (ra >= 0 && rb >= 0 && ra != rb) return ra < rb;
  return a < b;
}

}  // namespace detail

inline SimilarityScore similarity(const ObjectInstance& instance, const ObjectNode& node,
                                  const AssociationParams& params) {
  require_embedding(instance);
  if (node.feature.size() == 0) {
    throw input_error("MissingEmbedding", "node has no feature vector");
  }
  if (node.feature.size() != instance.embedding.size()) {
    throw input_error("EmbeddingDimMismatch", "instance and node feature dimensions differ");
  }
  SimilarityScore score;
  score.geometric = geometry::overlap_fraction(instance.cloud, node.cloud, params.overlap_radius);
  score.semantic = instance.embedding.dot(node.feature);
  score.combined = params.geometric_weight * score.geometric +
                   params.semantic_weight * 0.5 * (score.semantic + 1.0);
  return score;
}

/// Index of the best-scoring node at or above threshold, or nullopt for a new
/// node. Ties go to the node with the lower id.
inline std::optional<std::size_t> associate(const ObjectInstance& instance,
                                            const std::vector<ObjectNode>& nodes,
                                            const AssociationParams& params) {
  params.check();
  std::optional<std::size_t> best;
  double best_combined = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const SimilarityScore score = similarity(instance, nodes[i], params);
    if (score.combined < params.threshold) continue;
    if (!best || score.combined > best_combined ||
        (score.combined == best_combined &&
         detail::id_less(nodes[i].node_id, nodes[*best].node_id))) {
      best = i;
      best_combined = score.combined;
    }
  }
  return best;
}

inline ObjectNode make_node(const ObjectInstance& instance, graph::NodeId node_id,
                            double downsample_leaf) {
  instance.check();
  ObjectNode node;
  node.node_id = std::move(node_id);
  node.cloud = geometry::voxel_downsample(instance.cloud, downsample_leaf);
  node.feature = instance.embedding;
  node.instance_count = 1;
  node.class_votes[instance.class_name] = 1;
  node.bbox = geometry::bounds(instance.cloud);
  return node;
}

/// Merges an associated instance into the node: downsampled cloud union,
/// count-weighted renormalized feature mean, expanded bbox.
inline void fuse(ObjectNode& node, const ObjectInstance& instance, double downsample_leaf) {
  instance.check();
  geometry::PointCloud merged = node.cloud;
  merged.insert(merged.end(), instance.cloud.begin(), instance.cloud.end());
  node.cloud = geometry::voxel_downsample(merged, downsample_leaf);
  for (const Eigen::Vector3d& p : instance.cloud) node.bbox.expand(p);

  if (instance.embedding.size() > 0) {
    if (node.feature.size() == 0) {
      node.feature = instance.embedding;
    } else if (node.feature.size() == instance.embedding.size()) {
      Eigen::VectorXd blended =
          static_cast<double>(node.instance_count) * node.feature + instance.embedding;
      const double norm = blended.norm();
      if (norm > 1e-12) node.feature = blended / norm;
    } else {
      throw input_error("EmbeddingDimMismatch", "cannot fuse features of differing dimension");
    }
  }
  node.instance_count += 1;
  node.class_votes[instance.class_name] += 1;
}

}  // namespace sgforge::objects
