#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/geometry/camera.hpp"
#include "sgforge/geometry/point_cloud.hpp"
#include "sgforge/graph/scene_graph.hpp"

namespace sgforge::objects {

/// One frame-level detection: world-frame points plus the semantic feature
/// carried by the segmentation mask.
struct ObjectInstance {
  geometry::PointCloud cloud;
  Eigen::VectorXd embedding;
  std::string class_name;
  double source_frame = 0.0;
  std::optional<std::string> crop_ref;

  void check() const {
    if (cloud.empty()) throw input_error("EmptyCloud", "instance cloud is empty");
    if (embedding.size() > 0 && std::abs(embedding.norm() - 1.0) > 1e-4) {
      throw input_error("EmbeddingNotUnit", "instance embedding must be unit-norm within 1e-4");
    }
  }
};

/// Fused object: accumulated cloud, running feature mean, caption history.
struct ObjectNode {
  graph::NodeId node_id;
  geometry::PointCloud cloud;
  Eigen::VectorXd feature;
  int instance_count = 0;
  std::map<std::string, int> class_votes;
  std::vector<graph::DescriptionSet> instance_captions;
  graph::DescriptionSet summary;
  geometry::Aabb bbox;

  [[nodiscard]] Eigen::Vector3d centroid() const { return geometry::centroid(cloud); }

  /// Majority class over fused instances, ties broken lexicographically.
  [[nodiscard]] std::string class_name() const {
    std::string best;
    int best_votes = 0;
    for (const auto& [name, votes] : class_votes) {
      if (votes > best_votes) {
        best_votes = votes;
        best = name;
      }
    }
    return best;
  }
};

struct SimilarityScore {
  double geometric = 0.0;
  double semantic = 0.0;
  double combined = 0.0;
};

struct AssociationParams {
  double geometric_weight = 0.5;
  double semantic_weight = 0.5;
  double threshold = 0.55;
  double overlap_radius = 0.05;

  void check() const {
    if (geometric_weight < 0.0 || semantic_weight < 0.0 ||
        std::abs(geometric_weight + semantic_weight - 1.0) > 1e-9) {
      throw input_error("BadWeights", "similarity weights must be non-negative and sum to 1");
    }
    if (threshold <= 0.0 || threshold >= 1.0) {
      throw input_error("BadThreshold", "association threshold must lie in (0,1)");
    }
    if (overlap_radius <= 0.0) throw input_error("BadRadius", "overlap radius must be positive");
  }
};

}  // namespace sgforge::objects
