#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/frame.hpp"
#include "sgforge/geometry/camera.hpp"
#include "sgforge/io/png_image.hpp"

namespace sgforge::io {

/// One frame-log line: pose, intrinsics, and file references. Depth images
/// are 16-bit PNG in millimeters; masks are 8-bit index PNGs whose class
/// table (with embeddings) sits in a sidecar JSON next to the mask image.
struct FrameRecord {
  double timestamp = 0.0;
  geometry::Pose pose;
  geometry::CameraIntrinsics intrinsics;
  std::string depth_path;
  std::string mask_path;
};

inline std::string mask_sidecar_path(const std::string& mask_path) {
  std::filesystem::path p(mask_path);
  p.replace_extension(".json");
  return p.string();
}

namespace detail {

inline double require_number(const nlohmann::json& obj, const char* key, const char* where) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw input_error("SchemaError", std::string(where) + " needs numeric field '" + key + "'");
  }
  return obj[key].get<double>();
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const char* where) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw input_error("SchemaError", std::string(where) + " needs string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const FrameRecord& record) {
  nlohmann::ordered_json pose;
  pose["rotation"] = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) pose["rotation"].push_back(record.pose.rotation(r, c));
  }
  pose["translation"] = {record.pose.translation.x(), record.pose.translation.y(),
                         record.pose.translation.z()};
  return nlohmann::ordered_json{{"timestamp", record.timestamp},
                                {"pose", pose},
                                {"intrinsics",
                                 {{"fx", record.intrinsics.fx},
                                  {"fy", record.intrinsics.fy},
                                  {"cx", record.intrinsics.cx},
                                  {"cy", record.intrinsics.cy}}},
                                {"depth_path", record.depth_path},
                                {"mask_path", record.mask_path}};
}

inline FrameRecord parse_frame_record(const std::string& line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw input_error("ParseError", std::string("frame record is not JSON: ") + e.what());
  }
  FrameRecord record;
  record.timestamp = detail::require_number(doc, "timestamp", "frame record");
  if (!doc.contains("pose") || !doc["pose"].is_object()) {
    throw input_error("SchemaError", "frame record needs a 'pose' object");
  }
  const auto& pose = doc["pose"];
  if (!pose.contains("rotation") || !pose["rotation"].is_array() ||
      pose["rotation"].size() != 9) {
    throw input_error("SchemaError", "pose.rotation must be a 9-element row-major array");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const auto& cell = pose["rotation"][static_cast<std::size_t>(r * 3 + c)];
      if (!cell.is_number()) throw input_error("SchemaError", "pose.rotation entries must be numbers");
      record.pose.rotation(r, c) = cell.get<double>();
    }
  }
  if (!pose.contains("translation") || !pose["translation"].is_array() ||
      pose["translation"].size() != 3) {
    throw input_error("SchemaError", "pose.translation must be a 3-element array");
  }
  for (int i = 0; i < 3; ++i) {
    const auto& cell = pose["translation"][static_cast<std::size_t>(i)];
    if (!cell.is_number()) throw input_error("SchemaError", "pose.translation entries must be numbers");
    record.pose.translation(i) = cell.get<double>();
  }
  if (!doc.contains("intrinsics") || !doc["intrinsics"].is_object()) {
    throw input_error("SchemaError", "frame record needs an 'intrinsics' object");
  }
  const auto& k = doc["intrinsics"];
  record.intrinsics.fx = detail::require_number(k, "fx", "intrinsics");
  record.intrinsics.fy = detail::require_number(k, "fy", "intrinsics");
  record.intrinsics.cx = detail::require_number(k, "cx", "intrinsics");
  record.intrinsics.cy = detail::require_number(k, "cy", "intrinsics");
  record.depth_path = detail::require_string(doc, "depth_path", "frame record");
  record.mask_path = detail::require_string(doc, "mask_path", "frame record");
  return record;
}

inline std::vector<FrameRecord> load_frame_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("FileMissing", "cannot open frame log: " + path);
  std::vector<FrameRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      records.push_back(parse_frame_record(line));
    } catch (const Error& e) {
      throw input_error(e.code(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

inline void write_frame_log(const std::string& path, const std::vector<FrameRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw input_error("FileWrite", "cannot write frame log: " + path);
  for (const FrameRecord& record : records) out << to_json(record).dump() << "\n";
}

/// Loads the referenced depth and mask files and assembles the in-memory
/// frame. Relative paths resolve against base_dir (normally the log's
/// directory). Depth millimeters become meters; mask index 0 is background.
inline fundamental::FrameObservation load_frame(const FrameRecord& record,
                                                const std::string& base_dir) {
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || base_dir.empty()) return path.string();
    return (std::filesystem::path(base_dir) / path).string();
  };

  fundamental::FrameObservation frame;
  frame.timestamp = record.timestamp;
  frame.pose = record.pose;
  frame.intrinsics = record.intrinsics;

  const GrayImage16 depth = read_png_gray16(resolve(record.depth_path));
  frame.width = depth.width;
  frame.height = depth.height;
  frame.depth.resize(depth.pixels.size());
  for (std::size_t i = 0; i < depth.pixels.size(); ++i) {
    frame.depth[i] = static_cast<float>(depth.pixels[i]) / 1000.0f;
  }

  const std::string mask_file = resolve(record.mask_path);
  const GrayImage8 indices = read_png_gray8(mask_file);
  if (indices.width != depth.width || indices.height != depth.height) {
    throw input_error("SchemaError", "mask and depth dimensions differ for " + record.mask_path);
  }

  const std::string sidecar = mask_sidecar_path(mask_file);
  std::ifstream meta_in(sidecar);
  if (!meta_in) throw input_error("FileMissing", "cannot open mask sidecar: " + sidecar);
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("ParseError", sidecar + ": " + e.what());
  }
  if (!meta.contains("classes") || !meta["classes"].is_array()) {
    throw input_error("SchemaError", sidecar + " needs a 'classes' array");
  }

  for (const auto& entry : meta["classes"]) {
    if (!entry.contains("index") || !entry["index"].is_number_integer()) {
      throw input_error("SchemaError", sidecar + " class entries need integer 'index'");
    }
    const int index = entry["index"].get<int>();
    if (index <= 0 || index > 255) {
      throw input_error("SchemaError", sidecar + " class index must be in [1,255]");
    }
    fundamental::SegMask mask;
    mask.class_name = detail::require_string(entry, "class_name", "mask class entry");
    mask.confidence = detail::require_number(entry, "confidence", "mask class entry");
    mask.width = indices.width;
    mask.height = indices.height;
    mask.pixels.assign(indices.pixels.size(), 0);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < indices.pixels.size(); ++i) {
      if (indices.pixels[i] == static_cast<std::uint8_t>(index)) {
        mask.pixels[i] = 1;
        ++covered;
      }
    }
    if (covered == 0) continue;
    if (entry.contains("embedding")) {
      if (!entry["embedding"].is_array()) {
        throw input_error("SchemaError", sidecar + " embeddings must be arrays");
      }
      Eigen::VectorXd embedding(entry["embedding"].size());
      for (std::size_t i = 0; i < entry["embedding"].size(); ++i) {
        const auto& cell = entry["embedding"][i];
        if (!cell.is_number()) {
          throw input_error("SchemaError", sidecar + " embedding entries must be numbers");
        }
        embedding(static_cast<Eigen::Index>(i)) = cell.get<double>();
      }
      mask.embedding = embedding;
    }
    if (entry.contains("crop_ref") && entry["crop_ref"].is_string()) {
      mask.crop_ref = entry["crop_ref"].get<std::string>();
    }
    frame.masks.push_back(std::move(mask));
  }
  return frame;
}

/// Sidecar document for a mask image, given per-class metadata.
struct MaskClassEntry {
  int index = 0;
  std::string class_name;
  double confidence = 1.0;
  std::vector<double> embedding;
  std::string crop_ref;
};

inline void write_mask_sidecar(const std::string& mask_file,
                               const std::vector<MaskClassEntry>& classes) {
  nlohmann::ordered_json doc;
  doc["classes"] = nlohmann::ordered_json::array();
  for (const MaskClassEntry& entry : classes) {
    nlohmann::ordered_json item{{"index", entry.index},
                                {"class_name", entry.class_name},
                                {"confidence", entry.confidence}};
    if (!entry.embedding.empty()) item["embedding"] = entry.embedding;
    if (!entry.crop_ref.empty()) item["crop_ref"] = entry.crop_ref;
    doc["classes"].push_back(item);
  }
  const std::string sidecar = mask_sidecar_path(mask_file);
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw input_error("FileWrite", "cannot write mask sidecar: " + sidecar);
  out << doc.dump(2) << "\n";
}

}  // namespace sgforge::io
