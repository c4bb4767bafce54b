#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgforge/common.hpp"
#include "sgforge/graph/scene_graph.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/llm/templates.hpp"
#include "sgforge/pipeline/export.hpp"

namespace sgforge::pipeline {

struct QueryMatch {
  graph::NodeId node_id;
  double score = 0.0;
  std::string rationale;
};

struct QueryResult {
  std::string query;
  std::string mode;
  std::vector<QueryMatch> matches;
  std::vector<std::string> notes;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc{{"query", query}, {"mode", mode}};
    doc["matches"] = nlohmann::json::array();
    for (const auto& m : matches) {
      doc["matches"].push_back(nlohmann::ordered_json{
          {"node_id", m.node_id}, {"score", m.score}, {"rationale", m.rationale}});
    }
    doc["notes"] = notes;
    return doc;
  }
};

namespace detail {

inline std::vector<std::string> query_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) != 0) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::set<std::string> node_token_set(const graph::GraphNode& node) {
  std::string text = to_string(node.kind);
  if (node.label) text += " " + *node.label;
  for (const auto& attr : node.descriptions.attributes()) {
    text += " " + attr.key + " " + attr.text;
  }
  const auto tokens = query_tokens(text);
  return {tokens.begin(), tokens.end()};
}

}  // namespace detail

/// Case-insensitive token overlap between the query and each node's label,
/// kind, and description text. Score is the matched fraction of the query's
/// distinct tokens; zero-score nodes are dropped, ties rank by id.
inline QueryResult lexical_query(const graph::SceneGraph& g, const std::string& text) {
  const auto raw = detail::query_tokens(text);
  if (raw.empty()) throw input_error("EmptyQuery", "query text holds no searchable tokens");
  const std::set<std::string> wanted(raw.begin(), raw.end());

  QueryResult result;
  result.query = text;
  result.mode = "lexical";
  for (const auto& node : g.nodes()) {
    const std::set<std::string> have = detail::node_token_set(node);
    std::vector<std::string> hits;
    for (const std::string& token : wanted) {
      if (have.contains(token)) hits.push_back(token);
    }
    if (hits.empty()) continue;
    QueryMatch match;
    match.node_id = node.id;
    match.score = static_cast<double>(hits.size()) / static_cast<double>(wanted.size());
    match.rationale = "matched tokens: " + join(hits, ", ");
    result.matches.push_back(std::move(match));
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const QueryMatch& a, const QueryMatch& b) {
              if (a.score != b.score) return a.score > b.score;
              return detail::node_id_less(a.node_id, b.node_id);
            });
  return result;
}

/// Hands the flattened graph plus the question to the chat backend and reads
/// node ids back out of the completion, best match first. Ids the model
/// invents are dropped and recorded in `notes`.
inline QueryResult llm_query(const llm::ChatClient& client, const llm::PromptTemplate& tmpl,
                             const graph::SceneGraph& g, const std::string& text,
                             std::size_t max_prompt_chars = 12000) {
  if (trim(text).empty()) throw input_error("EmptyQuery", "query text must be non-empty");
  const std::string info = render_prompt_form(g, max_prompt_chars);
  const std::string prompt = tmpl.render({{"node_info", info}, {"instructions", text}});
  const std::string response = client.chat(prompt);

  QueryResult result;
  result.query = text;
  result.mode = "llm";

  static const std::regex id_pattern(R"(L\d+_\d+)");
  std::set<graph::NodeId> seen;
  std::vector<graph::NodeId> unknown;
  auto begin = std::sregex_iterator(response.begin(), response.end(), id_pattern);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const graph::NodeId id = it->str();
    if (!seen.insert(id).second) continue;
    if (g.find(id) == nullptr) {
      unknown.push_back(id);
      continue;
    }
    const std::size_t rank = result.matches.size();
    QueryMatch match;
    match.node_id = id;
    match.score = 1.0 / static_cast<double>(rank + 1);
    match.rationale = "rank " + std::to_string(rank + 1) + " in model response";
    result.matches.push_back(std::move(match));
  }
  if (!unknown.empty()) {
    result.notes.push_back("UnknownNodeInResponse: ignored ids not present in graph: " +
                           join(unknown, ", "));
  }
  if (result.matches.empty() && unknown.empty()) {
    result.notes.push_back("model response carried no node ids");
  }
  return result;
}

/// Client settings for standalone query runs: a live HTTP backend when
/// SGFORGE_LLM_ENDPOINT is set, otherwise the echo mock (the echoed prompt
/// contains the real node ids, so offline runs stay deterministic).
inline llm::ChatClientConfig default_query_client_config() {
  llm::ChatClientConfig cfg;
  if (const char* endpoint = std::getenv("SGFORGE_LLM_ENDPOINT")) {
    cfg.backend = llm::ChatBackend::http;
    cfg.endpoint = endpoint;
    if (const char* model = std::getenv("SGFORGE_LLM_MODEL")) cfg.model_name = model;
  } else {
    cfg.backend = llm::ChatBackend::mock;
    cfg.mock_mode = llm::MockMode::echo;
  }
  return cfg;
}

inline QueryResult run_query(const std::string& graph_path, const std::string& text,
                             const std::string& mode) {
  const graph::SceneGraph g = load_graph_file(graph_path);
  if (mode == "lexical") return lexical_query(g, text);
  if (mode == "llm") {
    const llm::ChatClient client(default_query_client_config());
    const llm::PromptLibrary prompts = llm::default_prompt_library();
    return llm_query(client, prompts.query, g, text);
  }
  throw input_error("UnknownMode", "query mode must be 'llm' or 'lexical', got: " + mode);
}

}  // namespace sgforge::pipeline
