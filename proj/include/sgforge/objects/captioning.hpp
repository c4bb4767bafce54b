#pragma once

#include <map>
#include <sstream>
#include <string>

#include "sgforge/common.hpp"
#include "sgforge/graph/scene_graph.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/llm/prompt_template.hpp"
#include "sgforge/objects/object_node.hpp"

namespace sgforge::objects {

namespace detail {

/// Accepted caption keys, each normalized to its singular form.
inline std::optional<std::string> normalize_caption_key(const std::string& raw) {
  const std::string key = to_lower(trim(raw));
  if (key == "state") return "state";
  if (key == "predicate" || key == "predicates") return "predicate";
  if (key == "affordance" || key == "affordances") return "affordance";
  if (key == "other") return "other";
  return std::nullopt;
}

}  // namespace detail

/// Parses `Key: text` lines into a DescriptionSet; lines without a recognized
/// key land under fallback_key.
inline graph::DescriptionSet parse_caption(const std::string& text,
                                           const std::string& fallback_key = "other") {
  graph::DescriptionSet set;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto colon = stripped.find(':');
    if (colon != std::string::npos) {
      if (const auto key = detail::normalize_caption_key(stripped.substr(0, colon))) {
        set.add(*key, trim(stripped.substr(colon + 1)));
        continue;
      }
    }
    set.add(fallback_key, stripped);
  }
  return set;
}

inline std::string instance_info_text(const ObjectInstance& instance) {
  const Eigen::Vector3d c = geometry::centroid(instance.cloud);
  std::ostringstream info;
  info << "Detected class: " << instance.class_name << ". Observed points: "
       << instance.cloud.size() << ". Approximate position (meters): [" << c.x() << ", " << c.y()
       << ", " << c.z() << "].";
  return info.str();
}

/// One LVLM round for a single detection crop.
inline graph::DescriptionSet caption_instance(const llm::ChatClient& client,
                                              const ObjectInstance& instance,
                                              const llm::PromptTemplate& tmpl,
                                              const std::string& extra_instructions = "") {
  if (!instance.crop_ref) {
    throw input_error("MissingCropRef", "instance captioning requires a crop reference");
  }
  const std::string prompt = tmpl.render({{"node_info", instance_info_text(instance)},
                                          {"label_set", ""},
                                          {"instructions", extra_instructions}});
  const std::string response = client.chat(prompt, 0, instance.crop_ref);
  if (trim(response).empty()) {
    throw backend_error("EmptyResponse", "captioning backend returned empty text");
  }
  return parse_caption(response);
}

/// Condenses all instance captions of a node into its summary description.
/// Labeled lines keep their caption keys; free prose lands under "summary".
inline graph::DescriptionSet summarize_node(const llm::ChatClient& client, const ObjectNode& node,
                                            const llm::PromptTemplate& tmpl,
                                            const std::string& extra_instructions = "") {
  if (node.instance_captions.empty()) {
    throw input_error("NoCaptions", "node " + node.node_id + " has no instance captions");
  }
  std::string node_info;
  for (const graph::DescriptionSet& caption : node.instance_captions) {
    if (!node_info.empty()) node_info += "\n\n";
    node_info += caption.keyed_lines();
  }
  const std::string prompt = tmpl.render(
      {{"node_info", node_info}, {"label_set", ""}, {"instructions", extra_instructions}});
  const std::string response = client.chat(prompt, 0);
  if (trim(response).empty()) {
    throw backend_error("EmptyResponse", "summary backend returned empty text");
  }
  return parse_caption(response, "summary");
}

}  // namespace sgforge::objects
