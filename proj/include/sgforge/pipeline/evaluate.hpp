#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgforge/common.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/llm/templates.hpp"
#include "sgforge/pipeline/config.hpp"
#include "sgforge/rooms/polling.hpp"
#include "sgforge/rooms/types.hpp"

namespace sgforge::pipeline {

/// One room-classification benchmark record.
struct EvalRecord {
  std::string room_id;
  std::string ground_truth_label;
  /// Pairs of (class name, optional description text).
  std::vector<std::pair<std::string, std::string>> objects;
};

struct EvalOutcome {
  std::string room_id;
  std::string ground_truth_label;
  std::optional<std::string> label;
  bool poll_complete = true;
};

struct CategoryStats {
  std::size_t total = 0;
  std::size_t annotated = 0;
  std::size_t correct = 0;
};

struct EvalReport {
  std::size_t records_total = 0;
  std::size_t records_malformed = 0;
  std::size_t rooms_evaluated = 0;
  std::size_t rooms_annotated = 0;
  std::size_t rooms_correct = 0;
  std::size_t polls_incomplete = 0;
  std::optional<double> accuracy;
  std::vector<std::string> abstentions;
  std::map<std::string, CategoryStats> per_room_category;
  std::map<std::string, CategoryStats> per_object_category;
  std::vector<EvalOutcome> outcomes;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc{{"records_total", records_total},
                               {"records_malformed", records_malformed},
                               {"rooms_evaluated", rooms_evaluated},
                               {"rooms_annotated", rooms_annotated},
                               {"rooms_correct", rooms_correct},
                               {"polls_incomplete", polls_incomplete}};
    if (accuracy) {
      doc["accuracy"] = *accuracy;
    } else {
      doc["accuracy"] = "n/a";
    }
    doc["abstentions"] = abstentions;
    const auto stats_json = [](const std::map<std::string, CategoryStats>& stats) {
      nlohmann::ordered_json out;
      for (const auto& [name, s] : stats) {
        nlohmann::ordered_json entry{
            {"total", s.total}, {"annotated", s.annotated}, {"correct", s.correct}};
        if (s.annotated > 0) {
          entry["accuracy"] = static_cast<double>(s.correct) / static_cast<double>(s.annotated);
        } else {
          entry["accuracy"] = "n/a";
        }
        out[name] = entry;
      }
      return out;
    };
    doc["per_room_category"] = stats_json(per_room_category);
    doc["per_object_category"] = stats_json(per_object_category);
    return doc;
  }
};

inline EvalRecord parse_eval_record(const std::string& line) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw input_error("MalformedRecord", std::string("record is not JSON: ") + e.what());
  }
  EvalRecord record;
  if (!doc.contains("room_id") || !doc["room_id"].is_string()) {
    throw input_error("MalformedRecord", "record needs string 'room_id'");
  }
  record.room_id = doc["room_id"].get<std::string>();
  if (!doc.contains("ground_truth_label") || !doc["ground_truth_label"].is_string()) {
    throw input_error("MalformedRecord", "record needs string 'ground_truth_label'");
  }
  record.ground_truth_label = doc["ground_truth_label"].get<std::string>();
  if (!doc.contains("objects") || !doc["objects"].is_array()) {
    throw input_error("MalformedRecord", "record needs an 'objects' array");
  }
  for (const auto& entry : doc["objects"]) {
    if (entry.is_string()) {
      record.objects.emplace_back(entry.get<std::string>(), "");
    } else if (entry.is_object() && entry.contains("class_name") &&
               entry["class_name"].is_string()) {
      std::string description;
      if (entry.contains("description") && entry["description"].is_string()) {
        description = entry["description"].get<std::string>();
      }
      record.objects.emplace_back(entry["class_name"].get<std::string>(), description);
    } else {
      throw input_error("MalformedRecord", "object entries must be strings or objects");
    }
  }
  return record;
}

/// The poll prompt's object block for a benchmark record; shared with tests
/// so fixtures can be keyed on the exact prompt digest.
inline std::string eval_record_info(const EvalRecord& record) {
  std::string info = "Room id: " + record.room_id;
  for (const auto& [class_name, description] : record.objects) {
    info += "\n- " + class_name;
    if (!description.empty()) info += ": " + description;
  }
  return info;
}

/// Polls every record through the configured client and scores the decisions
/// against ground truth. Malformed lines are skipped and counted.
inline EvalReport evaluate_rooms(const PipelineConfig& cfg, const std::string& records_path) {
  cfg.check();
  std::ifstream in(records_path);
  if (!in) throw input_error("FileMissing", "cannot open records: " + records_path);

  const llm::ChatClient client(cfg.client);
  const llm::PromptLibrary prompts = llm::load_prompt_library(cfg.template_dir);
  const rooms::TypicalLabels labels(cfg.typical_labels);

  EvalReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++report.records_total;
    EvalRecord record;
    try {
      record = parse_eval_record(line);
    } catch (const Error&) {
      ++report.records_malformed;
      continue;
    }
    ++report.rooms_evaluated;

    const std::string prompt = rooms::render_poll_prompt(eval_record_info(record), labels,
                                                         prompts.room_poll,
                                                         cfg.extra_instructions);
    const rooms::PollResult poll = rooms::run_poll(client, prompt, labels, cfg.poll_rounds);

    EvalOutcome outcome;
    outcome.room_id = record.room_id;
    outcome.ground_truth_label = record.ground_truth_label;
    outcome.poll_complete = poll.complete;
    if (!poll.complete) {
      ++report.polls_incomplete;
      report.outcomes.push_back(outcome);
      continue;
    }
    outcome.label = rooms::decide_label(poll, labels);

    CategoryStats& room_stats = report.per_room_category[record.ground_truth_label];
    ++room_stats.total;
    std::set<std::string> classes;
    for (const auto& [class_name, description] : record.objects) classes.insert(class_name);
    for (const std::string& class_name : classes) ++report.per_object_category[class_name].total;

    if (outcome.label) {
      ++report.rooms_annotated;
      ++room_stats.annotated;
      for (const std::string& class_name : classes) {
        ++report.per_object_category[class_name].annotated;
      }
      const bool correct = *outcome.label == record.ground_truth_label;
      if (correct) {
        ++report.rooms_correct;
        ++room_stats.correct;
        for (const std::string& class_name : classes) {
          ++report.per_object_category[class_name].correct;
        }
      }
    } else {
      report.abstentions.push_back(record.room_id);
    }
    report.outcomes.push_back(outcome);
  }

  if (report.rooms_annotated > 0) {
    report.accuracy =
        static_cast<double>(report.rooms_correct) / static_cast<double>(report.rooms_annotated);
  }
  return report;
}

}  // namespace sgforge::pipeline
