#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/graph/scene_graph.hpp"

namespace sgforge::rooms {

/// Closed label set offered to the classifier, including the mandatory
/// "other room" abstention entry.
class TypicalLabels {
 public:
  TypicalLabels() = default;

  explicit TypicalLabels(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) throw input_error("TooFewLabels", "need at least 2 labels");
    std::set<std::string> seen;
    for (const std::string& label : labels_) {
      if (label.empty()) throw input_error("EmptyLabel", "labels must be non-empty");
      if (!seen.insert(label).second) {
        throw input_error("DuplicateLabel", "label '" + label + "' appears twice");
      }
    }
    const auto it = std::find(labels_.begin(), labels_.end(), other_label());
    if (it == labels_.end()) {
      throw input_error("MissingOtherLabel", "label set must include '" + other_label() + "'");
    }
    other_index_ = static_cast<std::size_t>(it - labels_.begin());
  }

  static std::string other_label() { return "other room"; }

  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] std::size_t other_index() const { return other_index_; }
  [[nodiscard]] const std::string& at(std::size_t n) const { return labels_[n]; }

  [[nodiscard]] std::optional<std::size_t> index_of(const std::string& label) const {
    for (std::size_t n = 0; n < labels_.size(); ++n) {
      if (labels_[n] == label) return n;
    }
    return std::nullopt;
  }

  [[nodiscard]] std::string joined(const std::string& sep = ", ") const {
    std::string out;
    for (const std::string& label : labels_) {
      if (!out.empty()) out += sep;
      out += label;
    }
    return out;
  }

 private:
  std::vector<std::string> labels_;
  std::size_t other_index_ = 0;
};

inline TypicalLabels default_typical_labels() {
  return TypicalLabels({"kitchen", "bathroom", "bedroom", "living_room", "dining_room",
                        "home_office", "corridor", "other room"});
}

/// Aggregated outcome of the L classification rounds for one room.
struct PollResult {
  std::vector<int> counts;
  int rounds = 0;
  std::vector<std::string> transcripts;
  bool complete = false;
};

struct RoomNode {
  graph::NodeId node_id;
  std::set<std::size_t> place_members;
  std::set<graph::NodeId> object_members;
  std::optional<std::string> label;
  graph::DescriptionSet description;
  std::optional<PollResult> poll;
};

struct FloorNode {
  graph::NodeId node_id;
  std::vector<std::size_t> room_members;
  double height = 0.0;
  graph::DescriptionSet description;
};

}  // namespace sgforge::rooms
