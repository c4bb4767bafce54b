#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgforge/geometry/camera.hpp"

namespace sgforge::fundamental {

/// Binary pixel mask for one detected instance in a frame.
struct SegMask {
  std::string class_name;
  double confidence = 1.0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, nonzero = inside
  std::optional<Eigen::VectorXd> embedding;
  std::optional<std::string> crop_ref;

  [[nodiscard]] bool at(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(u)] != 0;
  }

  [[nodiscard]] std::size_t pixel_count() const {
    std::size_t n = 0;
    for (auto p : pixels) n += (p != 0);
    return n;
  }
};

/// Posed depth frame with per-instance segmentation, the pipeline input unit.
struct FrameObservation {
  double timestamp = 0.0;
  geometry::Pose pose;  // camera -> world
  geometry::CameraIntrinsics intrinsics;
  int width = 0;
  int height = 0;
  std::vector<float> depth;  // meters, row-major, 0 = invalid
  std::vector<SegMask> masks;

  [[nodiscard]] float depth_at(int u, int v) const {
    return depth[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(u)];
  }

  /// Checks the frame invariants; throws on the first failure.
  void check() const {
    if (!pose.is_orthonormal()) {
      throw input_error("InvalidPose", "rotation is not orthonormal within 1e-6");
    }
    if (depth.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw input_error("SchemaError", "depth buffer size does not match dimensions");
    }
    for (float d : depth) {
      if (!std::isfinite(d) || d < 0.0f) {
        throw input_error("SchemaError", "depth values must be finite and non-negative");
      }
    }
    for (const auto& mask : masks) {
      if (mask.pixel_count() == 0) throw input_error("SchemaError", "empty mask");
      if (mask.confidence < 0.0 || mask.confidence > 1.0) {
        throw input_error("SchemaError", "mask confidence outside [0,1]");
      }
      if (mask.embedding && std::abs(mask.embedding->norm() - 1.0) > 1e-4) {
        throw input_error("SchemaError", "mask embedding must be unit norm");
      }
    }
  }
};

}  // namespace sgforge::fundamental
