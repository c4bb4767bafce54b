#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/frame.hpp"
#include "sgforge/geometry/camera.hpp"
#include "sgforge/io/frame_log.hpp"
#include "sgforge/io/png_image.hpp"

namespace sgtest {

/// Axis-aligned solid box. Structural boxes (walls, floor) have an empty
/// class name; planted objects carry a class and a mask index.
struct SceneBox {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
  std::string class_name;
  int mask_index = 0;
};

struct Scene {
  std::vector<SceneBox> boxes;
  /// Ground truth room per object class: 'A' is x < 4, 'B' is x > 4.
  std::map<std::string, char> object_room;
};

/// Two 4x4 m rooms side by side, divided at x=4 with a 0.6 m doorway at
/// y in [1.7, 2.3]. Room A holds a stove and a sink, room B a bed and a
/// wardrobe.
inline Scene two_room_scene() {
  Scene scene;
  const double h = 2.5;
  auto wall = [&](double x0, double y0, double x1, double y1) {
    scene.boxes.push_back({{x0, y0, 0.0}, {x1, y1, h}, "", 0});
  };
  scene.boxes.push_back({{-0.1, -0.1, -0.1}, {8.1, 4.1, 0.0}, "", 0});  // floor
  wall(-0.1, -0.1, 8.1, 0.0);                                          // south
  wall(-0.1, 4.0, 8.1, 4.1);                                           // north
  wall(-0.1, 0.0, 0.0, 4.0);                                           // west
  wall(8.0, 0.0, 8.1, 4.0);                                            // east
  wall(3.95, 0.0, 4.05, 1.7);                                          // divider, south of door
  wall(3.95, 2.3, 4.05, 4.0);                                          // divider, north of door

  scene.boxes.push_back({{0.7, 0.7, 0.0}, {1.3, 1.3, 0.9}, "stove", 1});
  scene.boxes.push_back({{2.2, 3.0, 0.0}, {2.7, 3.4, 0.85}, "sink", 2});
  scene.boxes.push_back({{5.2, 0.8, 0.0}, {7.0, 2.2, 0.5}, "bed", 3});
  scene.boxes.push_back({{7.3, 3.0, 0.0}, {7.8, 3.6, 1.9}, "wardrobe", 4});
  scene.object_room = {{"stove", 'A'}, {"sink", 'A'}, {"bed", 'B'}, {"wardrobe", 'B'}};
  return scene;
}

/// Nearest entry parameter of ray origin + t*dir against the box (slab test);
/// nullopt when the ray misses or starts past the box.
inline std::optional<double> ray_box_hit(const Eigen::Vector3d& origin,
                                         const Eigen::Vector3d& dir, const SceneBox& box) {
  double t_near = 1e-9;
  double t_far = 1e30;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-12) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double lo = (box.min[a] - origin[a]) / dir[a];
    double hi = (box.max[a] - origin[a]) / dir[a];
    if (lo > hi) std::swap(lo, hi);
    t_near = std::max(t_near, lo);
    t_far = std::min(t_far, hi);
    if (t_near > t_far) return std::nullopt;
  }
  return t_near;
}

/// Deterministic unit embedding for a class name (seeded off the name).
inline Eigen::VectorXd class_embedding(const std::string& class_name, int dim = 16) {
  std::mt19937_64 rng(sgforge::fnv1a64(class_name));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd e(dim);
  for (int i = 0; i < dim; ++i) e(i) = normal(rng);
  e.normalize();
  return e;
}

struct RenderParams {
  int width = 160;
  int height = 120;
  double fx = 100.0;
  double fy = 100.0;
  double max_range = 12.0;

  [[nodiscard]] sgforge::geometry::CameraIntrinsics intrinsics() const {
    return {fx, fy, width / 2.0, height / 2.0};
  }
};

struct RenderedFrame {
  std::vector<float> depth;            // meters, 0 = miss
  std::vector<std::uint8_t> mask;      // object mask index, 0 = background
};

/// Depth + instance-index render of the scene from one pose. Depth is the
/// camera z-depth of the nearest box hit, matching the pipeline's
/// back-projection convention.
inline RenderedFrame render_scene(const Scene& scene, const sgforge::geometry::Pose& pose,
                                  const RenderParams& params) {
  RenderedFrame out;
  const std::size_t count =
      static_cast<std::size_t>(params.width) * static_cast<std::size_t>(params.height);
  out.depth.assign(count, 0.0f);
  out.mask.assign(count, 0);
  const auto intr = params.intrinsics();
  for (int v = 0; v < params.height; ++v) {
    for (int u = 0; u < params.width; ++u) {
      // Unnormalized camera ray with z=1 so the hit parameter is the z-depth.
      const Eigen::Vector3d dir_cam((u + 0.5 - intr.cx) / intr.fx,
                                    (v + 0.5 - intr.cy) / intr.fy, 1.0);
      const Eigen::Vector3d dir_world = pose.rotation * dir_cam;
      double best = params.max_range;
      int best_index = 0;
      for (const SceneBox& box : scene.boxes) {
        const auto t = ray_box_hit(pose.translation, dir_world, box);
        if (t && *t < best) {
          best = *t;
          best_index = box.mask_index;
        }
      }
      if (best < params.max_range) {
        const std::size_t i =
            static_cast<std::size_t>(v) * static_cast<std::size_t>(params.width) +
            static_cast<std::size_t>(u);
        out.depth[i] = static_cast<float>(best);
        out.mask[i] = static_cast<std::uint8_t>(best_index);
      }
    }
  }
  return out;
}

/// In-memory observation with per-object masks and embeddings attached.
inline sgforge::fundamental::FrameObservation make_observation(
    const Scene& scene, const sgforge::geometry::Pose& pose, const RenderParams& params,
    double timestamp = 0.0) {
  const RenderedFrame rendered = render_scene(scene, pose, params);
  sgforge::fundamental::FrameObservation frame;
  frame.timestamp = timestamp;
  frame.pose = pose;
  frame.intrinsics = params.intrinsics();
  frame.width = params.width;
  frame.height = params.height;
  frame.depth = rendered.depth;
  for (const SceneBox& box : scene.boxes) {
    if (box.mask_index == 0) continue;
    sgforge::fundamental::SegMask mask;
    mask.class_name = box.class_name;
    mask.confidence = 0.9;
    mask.width = params.width;
    mask.height = params.height;
    mask.pixels.assign(rendered.mask.size(), 0);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < rendered.mask.size(); ++i) {
      if (rendered.mask[i] == static_cast<std::uint8_t>(box.mask_index)) {
        mask.pixels[i] = 1;
        ++covered;
      }
    }
    if (covered == 0) continue;
    mask.embedding = class_embedding(box.class_name);
    mask.crop_ref = "crops/" + box.class_name + ".png";
    frame.masks.push_back(std::move(mask));
  }
  return frame;
}

/// Camera sweep covering both rooms: two orbit stations per room plus two
/// doorway views. Eye height 1.4 m, slight downward pitch.
inline std::vector<sgforge::geometry::Pose> two_room_trajectory() {
  using sgforge::geometry::look_pose;
  std::vector<sgforge::geometry::Pose> poses;
  const double pi = 3.14159265358979323846;
  const std::vector<Eigen::Vector3d> stations = {{1.2, 2.0, 1.4},
                                                 {2.8, 2.0, 1.4},
                                                 {5.2, 2.8, 1.4},
                                                 {6.6, 1.4, 1.4}};
  for (const auto& eye : stations) {
    for (int k = 0; k < 8; ++k) {
      poses.push_back(look_pose(eye, k * pi / 4.0, 0.18));
    }
  }
  poses.push_back(look_pose({3.0, 2.0, 1.4}, 0.0, 0.10));
  poses.push_back(look_pose({5.0, 2.0, 1.4}, pi, 0.10));
  return poses;
}

/// Renders the trajectory to depth/mask PNG files plus sidecars and writes a
/// frame log; returns the log path. Layout: <dir>/frames.jsonl, depth/,
/// masks/.
inline std::string write_scene_log(const Scene& scene, const std::filesystem::path& dir,
                                   const RenderParams& params = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "depth");
  fs::create_directories(dir / "masks");

  std::vector<sgforge::io::MaskClassEntry> classes;
  for (const SceneBox& box : scene.boxes) {
    if (box.mask_index == 0) continue;
    sgforge::io::MaskClassEntry entry;
    entry.index = box.mask_index;
    entry.class_name = box.class_name;
    entry.confidence = 0.9;
    const Eigen::VectorXd e = class_embedding(box.class_name);
    entry.embedding.assign(e.data(), e.data() + e.size());
    entry.crop_ref = "crops/" + box.class_name + ".png";
    classes.push_back(std::move(entry));
  }

  const auto trajectory = two_room_trajectory();
  std::vector<sgforge::io::FrameRecord> records;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const RenderedFrame rendered = render_scene(scene, trajectory[i], params);

    sgforge::io::GrayImage16 depth;
    depth.width = params.width;
    depth.height = params.height;
    depth.pixels.resize(rendered.depth.size());
    for (std::size_t p = 0; p < rendered.depth.size(); ++p) {
      depth.pixels[p] = static_cast<std::uint16_t>(std::lround(rendered.depth[p] * 1000.0f));
    }
    const std::string depth_rel = "depth/f" + std::to_string(i) + ".png";
    sgforge::io::write_png_gray16((dir / depth_rel).string(), depth);

    sgforge::io::GrayImage8 mask;
    mask.width = params.width;
    mask.height = params.height;
    mask.pixels = rendered.mask;
    const std::string mask_rel = "masks/f" + std::to_string(i) + ".png";
    sgforge::io::write_png_gray8((dir / mask_rel).string(), mask);
    sgforge::io::write_mask_sidecar((dir / mask_rel).string(), classes);

    sgforge::io::FrameRecord record;
    record.timestamp = 0.1 * static_cast<double>(i);
    record.pose = trajectory[i];
    record.intrinsics = params.intrinsics();
    record.depth_path = depth_rel;
    record.mask_path = mask_rel;
    records.push_back(std::move(record));
  }

  const std::string log_path = (dir / "frames.jsonl").string();
  sgforge::io::write_frame_log(log_path, records);
  return log_path;
}

}  // namespace sgtest
