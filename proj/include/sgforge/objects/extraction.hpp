#pragma once

#include <cstddef>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/frame.hpp"
#include "sgforge/geometry/point_cloud.hpp"
#include "sgforge/objects/object_node.hpp"

namespace sgforge::objects {

struct ExtractionParams {
  std::size_t min_points = 50;
  std::size_t outlier_neighbors = 16;
  double outlier_stddev = 2.0;
};

/// Back-projects the masked depth pixels into a world-frame cloud and strips
/// statistical outliers. The mask must index into the given frame.
inline ObjectInstance extract_instance(const fundamental::FrameObservation& frame,
                                       const fundamental::SegMask& mask,
                                       const ExtractionParams& params = {}) {
  if (mask.width != frame.width || mask.height != frame.height) {
    throw input_error("MaskFrameMismatch", "mask dimensions do not match the frame");
  }

  ObjectInstance instance;
  instance.class_name = mask.class_name;
  instance.source_frame = frame.timestamp;
  instance.crop_ref = mask.crop_ref;
  if (mask.embedding) instance.embedding = *mask.embedding;

  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      if (!mask.at(u, v)) continue;
      const float depth = frame.depth_at(u, v);
      if (depth <= 0.0f) continue;
      const Eigen::Vector3d cam = frame.intrinsics.backproject(
          static_cast<double>(u) + 0.5, static_cast<double>(v) + 0.5, depth);
      instance.cloud.push_back(frame.pose.apply(cam));
    }
  }
  if (instance.cloud.size() < params.min_points) {
    throw input_error("TooFewPoints", "mask covers fewer than " +
                                          std::to_string(params.min_points) +
                                          " valid depth pixels");
  }
  instance.cloud = geometry::remove_statistical_outliers(instance.cloud, params.outlier_neighbors,
                                                         params.outlier_stddev);
  if (instance.cloud.size() < params.min_points) {
    throw input_error("TooFewPoints", "outlier removal left fewer than " +
                                          std::to_string(params.min_points) + " points");
  }
  return instance;
}

inline void require_embedding(const ObjectInstance& instance) {
  if (instance.embedding.size() == 0) {
    throw input_error("MissingEmbedding", "association requires an instance embedding");
  }
}

}  // namespace sgforge::objects
