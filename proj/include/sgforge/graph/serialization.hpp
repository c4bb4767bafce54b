#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "sgforge/graph/scene_graph.hpp"

namespace sgforge::graph {

namespace detail {

inline std::string violations_text(const std::vector<Violation>& violations) {
  std::string msg;
  for (const auto& v : violations) {
    if (!msg.empty()) msg += "; ";
    msg += v.code + "(" + v.detail + ")";
  }
  return msg;
}

}  // namespace detail

/// Node-link JSON text form. Deterministic: nodes sorted by id ascending,
/// edges lexicographic, metadata keys sorted. Output is byte-stable for
/// identical graphs (UTF-8, LF, trailing newline).
inline std::string serialize(const SceneGraph& graph) {
  auto violations = graph.validate();
  if (!violations.empty()) {
    throw invariant_error("InvariantViolation", detail::violations_text(violations));
  }

  nlohmann::ordered_json doc;
  doc["layers"] = nlohmann::json::array();
  for (int k = 1; k <= graph.layer_count(); ++k) doc["layers"].push_back(k);

  std::vector<const GraphNode*> ordered;
  ordered.reserve(graph.nodes().size());
  for (const auto& node : graph.nodes()) ordered.push_back(&node);
  std::sort(ordered.begin(), ordered.end(),
            [](const GraphNode* a, const GraphNode* b) { return a->id < b->id; });

  doc["nodes"] = nlohmann::json::array();
  for (const GraphNode* node : ordered) {
    nlohmann::ordered_json jn;
    jn["id"] = node->id;
    jn["layer"] = node->layer;
    jn["kind"] = to_string(node->kind);
    jn["label"] = node->label ? nlohmann::json(*node->label) : nlohmann::json(nullptr);
    jn["centroid"] = {node->centroid.x(), node->centroid.y(), node->centroid.z()};
    jn["descriptions"] = nlohmann::json::array();
    for (const auto& attr : node->descriptions.attributes()) {
      jn["descriptions"].push_back({{"key", attr.key}, {"text", attr.text}});
    }
    jn["geometry"] =
        node->geometry_ref ? nlohmann::json(*node->geometry_ref) : nlohmann::json(nullptr);
    doc["nodes"].push_back(std::move(jn));
  }

  doc["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : graph.edges()) {
    doc["edges"].push_back({u, v});
  }

  doc["metadata"] = nlohmann::json::object();
  for (const auto& [key, value] : graph.metadata()) doc["metadata"][key] = value;

  return doc.dump(2) + "\n";
}

inline SceneGraph deserialize(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error("ParseError", e.what());
  }

  auto require = [&](const char* key, nlohmann::json::value_t type) -> const nlohmann::json& {
    if (!doc.contains(key)) throw input_error("SchemaError", std::string("missing key: ") + key);
    const auto& v = doc.at(key);
    bool ok = v.type() == type ||
              (type == nlohmann::json::value_t::object && v.is_object()) ||
              (type == nlohmann::json::value_t::array && v.is_array());
    if (!ok) throw input_error("SchemaError", std::string("wrong type for key: ") + key);
    return v;
  };

  const auto& layers = require("layers", nlohmann::json::value_t::array);
  const auto& nodes = require("nodes", nlohmann::json::value_t::array);
  const auto& edges = require("edges", nlohmann::json::value_t::array);
  const auto& metadata = require("metadata", nlohmann::json::value_t::object);

  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!layers[i].is_number_integer() || layers[i].get<int>() != static_cast<int>(i) + 1) {
      throw input_error("SchemaError", "layers must be contiguous integers starting at 1");
    }
  }

  SceneGraph graph;
  if (!layers.empty()) graph.set_layer_count(static_cast<int>(layers.size()));

  try {
    for (const auto& jn : nodes) {
      GraphNode node;
      node.id = jn.at("id").get<std::string>();
      node.layer = jn.at("layer").get<int>();
      auto kind = kind_from_string(jn.at("kind").get<std::string>());
      if (!kind) throw input_error("SchemaError", "unknown node kind");
      node.kind = *kind;
      if (!jn.at("label").is_null()) node.label = jn.at("label").get<std::string>();
      const auto& c = jn.at("centroid");
      if (!c.is_array() || c.size() != 3) {
        throw input_error("SchemaError", "centroid must be [x,y,z]");
      }
      node.centroid = Eigen::Vector3d(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
      for (const auto& jd : jn.at("descriptions")) {
        node.descriptions.add(jd.at("key").get<std::string>(), jd.at("text").get<std::string>());
      }
      if (!jn.at("geometry").is_null()) node.geometry_ref = jn.at("geometry").get<std::string>();
      graph.raw_nodes().push_back(std::move(node));
    }
    for (const auto& je : edges) {
      if (!je.is_array() || je.size() != 2) {
        throw input_error("SchemaError", "edge must be a [id,id] pair");
      }
      auto u = je[0].get<std::string>();
      auto v = je[1].get<std::string>();
      graph.raw_edges().insert(u <= v ? std::make_pair(u, v) : std::make_pair(v, u));
    }
    for (const auto& [key, value] : metadata.items()) {
      if (!value.is_string()) throw input_error("SchemaError", "metadata values must be strings");
      graph.metadata()[key] = value.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error("SchemaError", e.what());
  }

  graph.reindex();
  auto violations = graph.validate();
  if (!violations.empty()) {
    throw invariant_error("InvariantViolation", detail::violations_text(violations));
  }
  return graph;
}

}  // namespace sgforge::graph
