#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sgforge/common.hpp"
#include "sgforge/llm/prompt_template.hpp"

namespace sgforge::llm {

/// The prompt set consumed by the captioning, polling, and query passes.
/// Defaults are built in; any of them can be overridden by a file named
/// `<template_id>.txt` inside a template directory.
struct PromptLibrary {
  PromptTemplate object_caption;
  PromptTemplate object_summary;
  PromptTemplate room_poll;
  PromptTemplate room_caption;
  PromptTemplate floor_caption;
  PromptTemplate query;
};

inline PromptLibrary default_prompt_library() {
  PromptLibrary lib;
  lib.object_caption = PromptTemplate(
      "object_caption",
      "You are describing one object observed by an indoor robot.\n"
      "{node_info}\n"
      "{instructions}\n"
      "Respond with four lines, exactly in this form:\n"
      "State: <the object's current physical state>\n"
      "Predicates: <spatial or functional relations to nearby objects>\n"
      "Affordances: <actions the robot could perform with it>\n"
      "Other: <any other notable attributes>\n");
  lib.object_summary = PromptTemplate(
      "object_summary",
      "The lines below describe the same physical object, observed several times.\n"
      "{node_info}\n"
      "{instructions}\n"
      "Merge them into one consistent description. Respond with lines of the form\n"
      "`Key: text` using the keys State, Predicates, Affordances, Other.\n");
  lib.room_poll = PromptTemplate(
      "room_poll",
      "You are classifying a room for an indoor robot's semantic map.\n"
      "The room contains the following objects:\n"
      "{node_info}\n"
      "Select exactly one label from this list: {label_set}.\n"
      "{instructions}\n"
      "Answer with the chosen label only, nothing else.\n");
  lib.room_caption = PromptTemplate(
      "room_caption",
      "Write one concise sentence describing the room below for a robot's semantic map.\n"
      "The room contains the following objects:\n"
      "{node_info}\n"
      "{instructions}\n");
  lib.floor_caption = PromptTemplate(
      "floor_caption",
      "Write one concise sentence describing this floor of a building.\n"
      "The floor contains the following rooms:\n"
      "{node_info}\n"
      "{instructions}\n");
  lib.query = PromptTemplate(
      "query",
      "You are searching a building's scene graph for an indoor robot.\n"
      "Graph contents:\n"
      "{node_info}\n"
      "Task: {instructions}\n"
      "Reply with the ids of the most relevant nodes, one id per line, best match first.\n");
  return lib;
}

namespace detail {

inline void maybe_override(PromptTemplate& slot, const std::filesystem::path& dir,
                           const std::string& template_id) {
  const std::filesystem::path file = dir / (template_id + ".txt");
  if (!std::filesystem::exists(file)) return;
  std::ifstream in(file);
  if (!in) throw input_error("TemplateFileUnreadable", "cannot open " + file.string());
  std::ostringstream body;
  body << in.rdbuf();
  slot = PromptTemplate(template_id, body.str());
}

}  // namespace detail

inline PromptLibrary load_prompt_library(const std::string& dir) {
  PromptLibrary lib = default_prompt_library();
  if (dir.empty()) return lib;
  if (!std::filesystem::is_directory(dir)) {
    throw input_error("TemplateDirMissing", "template directory not found: " + dir);
  }
  detail::maybe_override(lib.object_caption, dir, "object_caption");
  detail::maybe_override(lib.object_summary, dir, "object_summary");
  detail::maybe_override(lib.room_poll, dir, "room_poll");
  detail::maybe_override(lib.room_caption, dir, "room_caption");
  detail::maybe_override(lib.floor_caption, dir, "floor_caption");
  detail::maybe_override(lib.query, dir, "query");
  return lib;
}

}  // namespace sgforge::llm
