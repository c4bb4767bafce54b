#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/graph/scene_graph.hpp"
#include "sgforge/graph/serialization.hpp"
#include "sgforge/io/ply.hpp"

namespace sgforge::pipeline {

enum class ExportFormat { json, prompt, ply_bundle };

inline ExportFormat parse_export_format(std::string_view text) {
  if (text == "json") return ExportFormat::json;
  if (text == "prompt") return ExportFormat::prompt;
  if (text == "ply-bundle") return ExportFormat::ply_bundle;
  throw input_error("UnknownFormat", "unknown export format: " + std::string(text));
}

inline graph::SceneGraph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("FileMissing", "cannot open graph file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return graph::deserialize(text.str());
}

namespace detail {

/// Orders "L3_2" before "L3_10" (prefix, then numeric suffix).
inline bool node_id_less(const graph::NodeId& a, const graph::NodeId& b) {
  const auto rank = [](const graph::NodeId& id) -> long {
    const auto sep = id.rfind('_');
    if (sep == std::string::npos || sep + 1 >= id.size()) return -1;
    long value = 0;
    for (std::size_t i = sep + 1; i < id.size(); ++i) {
      const char c = id[i];
      if (c < '0' || c > '9') return -1;
      value = value * 10 + (c - '0');
    }
    return value;
  };
  const auto prefix = [](const graph::NodeId& id) {
    const auto sep = id.rfind('_');
    return sep == std::string::npos ? id : id.substr(0, sep);
  };
  const std::string pa = prefix(a);
  const std::string pb = prefix(b);
  if (pa != pb) return pa < pb;
  const long ra = rank(a);
  const long rb = rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

inline std::vector<const graph::GraphNode*> kind_nodes_sorted(const graph::SceneGraph& g,
                                                              graph::NodeKind kind) {
  std::vector<const graph::GraphNode*> out;
  for (const auto& node : g.nodes()) {
    if (node.kind == kind) out.push_back(&node);
  }
  std::sort(out.begin(), out.end(), [](const graph::GraphNode* a, const graph::GraphNode* b) {
    return node_id_less(a->id, b->id);
  });
  return out;
}

inline std::string object_line(const graph::GraphNode& node) {
  std::string line = "  - " + node.id + " " + node.label.value_or("object");
  const std::string text = node.descriptions.joined_text();
  if (!text.empty()) line += ": " + text;
  return line;
}

}  // namespace detail

/// Flattens the graph into per-room text blocks (room line plus one line per
/// member object) suitable for direct use as LLM context. A non-zero
/// `max_chars` budget truncates at block boundaries and appends a marker.
inline std::string render_prompt_form(const graph::SceneGraph& g, std::size_t max_chars = 0) {
  const auto rooms = detail::kind_nodes_sorted(g, graph::NodeKind::room);
  const auto objects = detail::kind_nodes_sorted(g, graph::NodeKind::object);

  std::set<graph::NodeId> assigned;
  std::vector<std::string> blocks;
  for (const graph::GraphNode* room : rooms) {
    std::string block = "Room " + room->id + " (" + room->label.value_or("unlabeled") + ")";
    const std::string text = room->descriptions.joined_text();
    if (!text.empty()) block += ": " + text;
    for (const graph::GraphNode* object : objects) {
      if (!g.has_edge(object->id, room->id)) continue;
      assigned.insert(object->id);
      block += "\n" + detail::object_line(*object);
    }
    blocks.push_back(std::move(block));
  }
  std::string loose;
  for (const graph::GraphNode* object : objects) {
    if (assigned.contains(object->id)) continue;
    if (loose.empty()) loose = "Unassigned objects:";
    loose += "\n" + detail::object_line(*object);
  }
  if (!loose.empty()) blocks.push_back(std::move(loose));
  if (blocks.empty()) blocks.push_back("(empty graph)");

  std::string out;
  bool truncated = false;
  for (const std::string& block : blocks) {
    const std::size_t addition = block.size() + (out.empty() ? 0 : 1);
    if (max_chars > 0 && !out.empty() && out.size() + addition > max_chars) {
      truncated = true;
      break;
    }
    if (!out.empty()) out += "\n";
    out += block;
  }
  if (truncated) out += "\n...(truncated)";
  return out;
}

/// Renders a loaded graph in the requested format. `json` re-emits the
/// canonical serialization, `prompt` the flattened text form, `ply-bundle` a
/// listing of the mesh and object geometries after verifying each file.
inline std::string run_export(const std::string& graph_path, ExportFormat format) {
  const graph::SceneGraph g = load_graph_file(graph_path);
  switch (format) {
    case ExportFormat::json:
      return graph::serialize(g);
    case ExportFormat::prompt:
      return render_prompt_form(g) + "\n";
    case ExportFormat::ply_bundle: {
      const std::filesystem::path base = std::filesystem::path(graph_path).parent_path();
      std::string listing;
      const auto& metadata = g.metadata();
      if (auto it = metadata.find("mesh_ref"); it != metadata.end()) {
        const std::filesystem::path mesh_path = base / it->second;
        if (!std::filesystem::exists(mesh_path)) {
          throw input_error("BundleFileMissing", "mesh file missing: " + mesh_path.string());
        }
        const fundamental::Mesh mesh = io::read_mesh_ply(mesh_path.string());
        listing += it->second + ": " + std::to_string(mesh.vertices.size()) + " vertices, " +
                   std::to_string(mesh.triangles.size()) + " faces\n";
      }
      std::size_t verified = 0;
      for (const graph::GraphNode* object :
           detail::kind_nodes_sorted(g, graph::NodeKind::object)) {
        if (!object->geometry_ref) continue;
        const std::filesystem::path cloud_path = base / *object->geometry_ref;
        if (!std::filesystem::exists(cloud_path)) {
          throw input_error("BundleFileMissing",
                            "geometry for " + object->id + " missing: " + cloud_path.string());
        }
        const geometry::PointCloud cloud = io::read_cloud_ply(cloud_path.string());
        listing += *object->geometry_ref + ": " + std::to_string(cloud.size()) + " points\n";
        ++verified;
      }
      listing += std::to_string(verified) + " object geometries verified\n";
      return listing;
    }
  }
  throw Error("Internal", "unreachable export format", ErrorCategory::internal);
}

}  // namespace sgforge::pipeline
