#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/marching_cubes.hpp"
#include "sgforge/geometry/point_cloud.hpp"

namespace sgforge::io {

namespace detail {

inline std::ofstream open_text_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw input_error("FileWrite", "cannot write: " + path);
  out << std::setprecision(9);
  return out;
}

}  // namespace detail

/// ASCII PLY mesh with a per-vertex `label` string property (written as the
/// trailing token of each vertex line; labels may contain spaces).
inline void write_mesh_ply(const std::string& path, const fundamental::Mesh& mesh) {
  std::ofstream out = detail::open_text_out(path);
  out << "ply\n"
      << "format ascii 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property string label\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\n"
      << "end_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Eigen::Vector3d& v = mesh.vertices[i];
    out << v.x() << " " << v.y() << " " << v.z() << " " << mesh.vertex_labels[i] << "\n";
  }
  for (const auto& tri : mesh.triangles) {
    out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  }
  if (!out) throw input_error("FileWrite", "short write: " + path);
}

inline fundamental::Mesh read_mesh_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("FileMissing", "cannot open: " + path);
  std::string line;
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string word;
    row >> word;
    if (word == "element") {
      std::string what;
      std::size_t count = 0;
      row >> what >> count;
      if (what == "vertex") vertex_count = count;
      if (what == "face") face_count = count;
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw input_error("BadPly", path + " has no end_header");

  fundamental::Mesh mesh;
  mesh.vertices.reserve(vertex_count);
  mesh.vertex_labels.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) throw input_error("BadPly", path + " truncated vertex list");
    std::istringstream row(line);
    Eigen::Vector3d v;
    row >> v.x() >> v.y() >> v.z();
    if (!row) throw input_error("BadPly", path + " has a malformed vertex line");
    std::string label;
    std::getline(row, label);
    mesh.vertices.push_back(v);
    mesh.vertex_labels.push_back(trim(label));
  }
  for (std::size_t i = 0; i < face_count; ++i) {
    if (!std::getline(in, line)) throw input_error("BadPly", path + " truncated face list");
    std::istringstream row(line);
    int arity = 0;
    std::array<std::uint32_t, 3> tri{};
    row >> arity >> tri[0] >> tri[1] >> tri[2];
    if (!row || arity != 3) throw input_error("BadPly", path + " has a non-triangle face");
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

inline void write_cloud_ply(const std::string& path, const geometry::PointCloud& cloud) {
  std::ofstream out = detail::open_text_out(path);
  out << "ply\n"
      << "format ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "end_header\n";
  for (const Eigen::Vector3d& p : cloud) {
    out << p.x() << " " << p.y() << " " << p.z() << "\n";
  }
  if (!out) throw input_error("FileWrite", "short write: " + path);
}

inline geometry::PointCloud read_cloud_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("FileMissing", "cannot open: " + path);
  std::string line;
  std::size_t vertex_count = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string word;
    row >> word;
    if (word == "element") {
      std::string what;
      std::size_t count = 0;
      row >> what >> count;
      if (what == "vertex") vertex_count = count;
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw input_error("BadPly", path + " has no end_header");
  geometry::PointCloud cloud;
  cloud.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) throw input_error("BadPly", path + " truncated vertex list");
    std::istringstream row(line);
    Eigen::Vector3d p;
    row >> p.x() >> p.y() >> p.z();
    if (!row) throw input_error("BadPly", path + " has a malformed vertex line");
    cloud.push_back(p);
  }
  return cloud;
}

}  // namespace sgforge::io
