#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/places.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/objects/extraction.hpp"
#include "sgforge/objects/object_node.hpp"
#include "sgforge/rooms/types.hpp"

namespace sgforge::pipeline {

/// Every tunable the pipeline consumes, collected in one auditable place.
/// Loaded from flat `key = value` text (TOML-style scalars, `#` comments).
struct PipelineConfig {
  std::string dataset_name = "unnamed";

  double voxel_size = 0.05;
  double truncation = 0.15;
  double agent_height = 1.6;
  int pixel_stride = 1;

  std::size_t min_points = 50;
  double association_threshold = 0.55;
  double geometric_weight = 0.5;
  double semantic_weight = 0.5;

  std::vector<std::string> typical_labels = {"kitchen",     "bathroom",    "bedroom",
                                             "living_room", "dining_room", "home_office",
                                             "corridor",    "other room"};
  int poll_rounds = 10;
  double persistence_min = 0.3;
  double floor_gap = 1.5;

  bool captioning = true;
  bool floors = true;
  std::string template_dir;
  std::string extra_instructions;

  llm::ChatClientConfig client;

  void check() const {
    if (voxel_size <= 0.0) throw input_error("BadConfig", "voxel_size must be positive");
    if (truncation < voxel_size) {
      throw input_error("BadConfig", "truncation must be at least voxel_size");
    }
    if (agent_height <= 0.0) throw input_error("BadConfig", "agent_height must be positive");
    if (pixel_stride < 1) throw input_error("BadConfig", "pixel_stride must be >= 1");
    if (min_points == 0) throw input_error("BadConfig", "min_points must be positive");
    if (association_threshold <= 0.0 || association_threshold >= 1.0) {
      throw input_error("BadConfig", "association_threshold must lie in (0,1)");
    }
    if (geometric_weight < 0.0 || semantic_weight < 0.0 ||
        std::abs(geometric_weight + semantic_weight - 1.0) > 1e-9) {
      throw input_error("BadConfig", "similarity weights must be non-negative and sum to 1");
    }
    if (poll_rounds < 1) throw input_error("BadConfig", "poll_rounds must be >= 1");
    if (persistence_min <= 0.0) throw input_error("BadConfig", "persistence_min must be positive");
    if (floor_gap <= 0.0) throw input_error("BadConfig", "floor_gap must be positive");
    rooms::TypicalLabels{typical_labels};
    client.check();
  }

  [[nodiscard]] objects::AssociationParams association_params() const {
    objects::AssociationParams params;
    params.geometric_weight = geometric_weight;
    params.semantic_weight = semantic_weight;
    params.threshold = association_threshold;
    params.overlap_radius = voxel_size;
    return params;
  }

  [[nodiscard]] objects::ExtractionParams extraction_params() const {
    objects::ExtractionParams params;
    params.min_points = min_points;
    return params;
  }

  [[nodiscard]] fundamental::PlacesParams places_params() const {
    fundamental::PlacesParams params;
    params.agent_height = agent_height;
    return params;
  }

  /// Stable key=value rendering of every field; hashing this is what makes
  /// builds attributable to an exact configuration.
  [[nodiscard]] std::string canonical_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "agent_height=" << agent_height << "\n";
    out << "association_threshold=" << association_threshold << "\n";
    out << "captioning=" << (captioning ? "true" : "false") << "\n";
    out << "client.backend=" << (client.backend == llm::ChatBackend::mock ? "mock" : "http")
        << "\n";
    out << "client.backoff_base_ms=" << client.backoff_base_ms << "\n";
    out << "client.default_text=" << client.default_text << "\n";
    out << "client.endpoint=" << client.endpoint << "\n";
    out << "client.fixture_path=" << client.fixture_path << "\n";
    out << "client.max_parallel=" << client.max_parallel << "\n";
    out << "client.max_retries=" << client.max_retries << "\n";
    out << "client.mock_mode=";
    switch (client.mock_mode) {
      case llm::MockMode::strict: out << "strict"; break;
      case llm::MockMode::default_text: out << "default_text"; break;
      case llm::MockMode::sequence: out << "sequence"; break;
      case llm::MockMode::echo: out << "echo"; break;
    }
    out << "\n";
    out << "client.mock_sequence=";
    for (std::size_t i = 0; i < client.mock_sequence.size(); ++i) {
      if (i > 0) out << ",";
      out << client.mock_sequence[i];
    }
    out << "\n";
    out << "client.model_name=" << client.model_name << "\n";
    out << "client.temperature=" << client.temperature << "\n";
    out << "client.timeout_seconds=" << client.timeout_seconds << "\n";
    out << "dataset_name=" << dataset_name << "\n";
    out << "extra_instructions=" << extra_instructions << "\n";
    out << "floor_gap=" << floor_gap << "\n";
    out << "floors=" << (floors ? "true" : "false") << "\n";
    out << "geometric_weight=" << geometric_weight << "\n";
    out << "min_points=" << min_points << "\n";
    out << "persistence_min=" << persistence_min << "\n";
    out << "pixel_stride=" << pixel_stride << "\n";
    out << "poll_rounds=" << poll_rounds << "\n";
    out << "semantic_weight=" << semantic_weight << "\n";
    out << "template_dir=" << template_dir << "\n";
    out << "truncation=" << truncation << "\n";
    out << "typical_labels=";
    for (std::size_t i = 0; i < typical_labels.size(); ++i) {
      if (i > 0) out << ",";
      out << typical_labels[i];
    }
    out << "\n";
    out << "voxel_size=" << voxel_size << "\n";
    return out.str();
  }

  [[nodiscard]] std::string config_hash() const { return to_hex(fnv1a64(canonical_text())); }
};

namespace detail {

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(const std::string& value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    return value.substr(1, value.size() - 2);
  }
  return value;
}

inline std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> items;
  for (const std::string& item : split(value, ',')) {
    const std::string cleaned = unquote(trim(item));
    if (!cleaned.empty()) items.push_back(cleaned);
  }
  return items;
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw input_error("BadConfig", "key '" + key + "' needs a number, got: " + value);
  }
}

inline long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw input_error("BadConfig", "key '" + key + "' needs an integer, got: " + value);
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw input_error("BadConfig", "key '" + key + "' needs true or false, got: " + value);
}

}  // namespace detail

inline PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream stream(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw input_error("BadConfig",
                        "line " + std::to_string(line_no) + " is not `key = value`: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = detail::unquote(trim(line.substr(eq + 1)));

    if (key == "dataset_name") cfg.dataset_name = value;
    else if (key == "voxel_size") cfg.voxel_size = detail::parse_double(key, value);
    else if (key == "truncation") cfg.truncation = detail::parse_double(key, value);
    else if (key == "agent_height") cfg.agent_height = detail::parse_double(key, value);
    else if (key == "pixel_stride") cfg.pixel_stride = static_cast<int>(detail::parse_int(key, value));
    else if (key == "min_points") cfg.min_points = static_cast<std::size_t>(detail::parse_int(key, value));
    else if (key == "association_threshold") cfg.association_threshold = detail::parse_double(key, value);
    else if (key == "geometric_weight") cfg.geometric_weight = detail::parse_double(key, value);
    else if (key == "semantic_weight") cfg.semantic_weight = detail::parse_double(key, value);
    else if (key == "typical_labels") cfg.typical_labels = detail::parse_list(value);
    else if (key == "poll_rounds") cfg.poll_rounds = static_cast<int>(detail::parse_int(key, value));
    else if (key == "persistence_min") cfg.persistence_min = detail::parse_double(key, value);
    else if (key == "floor_gap") cfg.floor_gap = detail::parse_double(key, value);
    else if (key == "captioning") cfg.captioning = detail::parse_bool(key, value);
    else if (key == "floors") cfg.floors = detail::parse_bool(key, value);
    else if (key == "template_dir") cfg.template_dir = value;
    else if (key == "extra_instructions") cfg.extra_instructions = value;
    else if (key == "client.backend") {
      if (value == "mock") cfg.client.backend = llm::ChatBackend::mock;
      else if (value == "http") cfg.client.backend = llm::ChatBackend::http;
      else throw input_error("BadConfig", "client.backend must be mock or http");
    } else if (key == "client.endpoint") cfg.client.endpoint = value;
    else if (key == "client.model_name") cfg.client.model_name = value;
    else if (key == "client.temperature") cfg.client.temperature = detail::parse_double(key, value);
    else if (key == "client.max_retries") cfg.client.max_retries = static_cast<int>(detail::parse_int(key, value));
    else if (key == "client.timeout_seconds") cfg.client.timeout_seconds = detail::parse_double(key, value);
    else if (key == "client.backoff_base_ms") cfg.client.backoff_base_ms = static_cast<int>(detail::parse_int(key, value));
    else if (key == "client.auth_header") cfg.client.auth_header = value;
    else if (key == "client.auth_prefix") cfg.client.auth_prefix = value;
    else if (key == "client.api_key_env") cfg.client.api_key_env = value;
    else if (key == "client.max_parallel") cfg.client.max_parallel = static_cast<int>(detail::parse_int(key, value));
    else if (key == "client.mock_mode") {
      if (value == "strict") cfg.client.mock_mode = llm::MockMode::strict;
      else if (value == "default_text") cfg.client.mock_mode = llm::MockMode::default_text;
      else if (value == "sequence") cfg.client.mock_mode = llm::MockMode::sequence;
      else if (value == "echo") cfg.client.mock_mode = llm::MockMode::echo;
      else throw input_error("BadConfig", "client.mock_mode must be strict, default_text, sequence, or echo");
    } else if (key == "client.fixture_path") cfg.client.fixture_path = value;
    else if (key == "client.default_text") cfg.client.default_text = value;
    else if (key == "client.mock_sequence") cfg.client.mock_sequence = detail::parse_list(value);
    else if (key == "client.audit_path") cfg.client.audit_path = value;
    else {
      throw input_error("BadConfig", "unknown config key: " + key);
    }
  }
  cfg.check();
  return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("FileMissing", "cannot open config: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what(), e.category());
  }
}

}  // namespace sgforge::pipeline
