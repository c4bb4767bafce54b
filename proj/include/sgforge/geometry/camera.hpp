#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

#include "sgforge/common.hpp"

namespace sgforge::geometry {

/// Rigid camera-to-world transform.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  [[nodiscard]] Eigen::Vector3d apply(const Eigen::Vector3d& p_camera) const {
    return rotation * p_camera + translation;
  }

  [[nodiscard]] bool is_orthonormal(double tol = 1e-6) const {
    Eigen::Matrix3d gram = rotation.transpose() * rotation;
    return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }

  bool operator==(const Pose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Camera-frame point for pixel (u,v) at z-depth `depth` (meters).
  [[nodiscard]] Eigen::Vector3d backproject(double u, double v, double depth) const {
    return {(u - cx) / fx * depth, (v - cy) / fy * depth, depth};
  }

  bool operator==(const CameraIntrinsics&) const = default;
};

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d max = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Eigen::Vector3d& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  [[nodiscard]] bool contains(const Eigen::Vector3d& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }

  [[nodiscard]] bool valid() const { return (min.array() <= max.array()).all(); }
};

/// Pose from yaw (about +z) then pitch (about camera x), positioned at `eye`.
/// Camera convention: +z forward, +x right, +y down.
inline Pose look_pose(const Eigen::Vector3d& eye, double yaw, double pitch) {
  Eigen::Matrix3d cam_to_level;
  // Map camera axes into a level world frame looking along +x at yaw=0.
  cam_to_level << 0, 0, 1,
                 -1, 0, 0,
                  0, -1, 0;
  Eigen::Matrix3d rot = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                         Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()))
                            .toRotationMatrix() *
                        cam_to_level;
  return {rot, eye};
}

}  // namespace sgforge::geometry
