#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/llm/prompt_template.hpp"
#include "sgforge/objects/object_node.hpp"
#include "sgforge/rooms/types.hpp"

namespace sgforge::rooms {

/// Maps one raw response to a label index: earliest case-insensitive
/// occurrence wins, longer labels win at equal position, no occurrence at all
/// counts as "other room".
inline std::size_t parse_label(const std::string& response, const TypicalLabels& labels) {
  const std::string haystack = to_lower(response);
  std::size_t best = labels.other_index();
  std::size_t best_pos = std::string::npos;
  std::size_t best_len = 0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const std::string needle = to_lower(labels.at(n));
    const std::size_t pos = haystack.find(needle);
    if (pos == std::string::npos) continue;
    if (pos < best_pos || (pos == best_pos && needle.size() > best_len)) {
      best = n;
      best_pos = pos;
      best_len = needle.size();
    }
  }
  return best;
}

/// Text block describing a room's member objects, fed to poll and caption
/// prompts. Objects appear in ascending node-id order.
inline std::string room_info_text(const RoomNode& room,
                                  const std::map<graph::NodeId, const objects::ObjectNode*>& by_id) {
  std::string info;
  for (const graph::NodeId& id : room.object_members) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    const objects::ObjectNode& node = *it->second;
    std::string line = "- " + node.class_name();
    std::string detail = node.summary.joined_text();
    if (detail.empty() && !node.instance_captions.empty()) {
      detail = node.instance_captions.front().joined_text();
    }
    if (!detail.empty()) line += ": " + detail;
    if (!info.empty()) info += "\n";
    info += line;
  }
  return info;
}

inline std::string render_poll_prompt(const std::string& node_info, const TypicalLabels& labels,
                                      const llm::PromptTemplate& tmpl,
                                      const std::string& extra_instructions = "") {
  return tmpl.render({{"node_info", node_info},
                      {"label_set", labels.joined()},
                      {"instructions", extra_instructions}});
}

/// Issues `rounds` independent classification queries for one prompt and
/// accumulates the parsed labels into a count vector. Backend failures leave
/// the poll incomplete with the successful transcripts preserved.
inline PollResult run_poll(const llm::ChatClient& client, const std::string& prompt,
                           const TypicalLabels& labels, int rounds) {
  if (rounds < 1) throw input_error("BadRounds", "poll needs at least one round");
  PollResult result;
  result.rounds = rounds;
  result.counts.assign(labels.size(), 0);

  std::vector<std::optional<std::string>> responses(static_cast<std::size_t>(rounds));
  const std::size_t parallel =
      static_cast<std::size_t>(std::max(1, client.config().max_parallel));
  try {
    parallel_for(static_cast<std::size_t>(rounds), parallel, [&](std::size_t round) {
      responses[round] = client.chat(prompt, static_cast<int>(round));
    });
  } catch (const Error&) {
    // Incomplete poll: keep whatever rounds finished.
  }

  for (const auto& response : responses) {
    if (!response) continue;
    result.transcripts.push_back(*response);
    result.counts[parse_label(*response, labels)] += 1;
  }
  result.complete =
      result.transcripts.size() == static_cast<std::size_t>(rounds);
  return result;
}

inline PollResult poll_room(const llm::ChatClient& client, const RoomNode& room,
                            const std::map<graph::NodeId, const objects::ObjectNode*>& objects,
                            const TypicalLabels& labels, int rounds,
                            const llm::PromptTemplate& tmpl,
                            const std::string& extra_instructions = "") {
  const std::string info = room_info_text(room, objects);
  const std::string prompt = render_poll_prompt(
      info.empty() ? "(no observed objects)" : info, labels, tmpl, extra_instructions);
  return run_poll(client, prompt, labels, rounds);
}

/// Full-score rule: a label is assigned only when it won every round, and the
/// abstention entry never becomes a label.
inline std::optional<std::string> decide_label(const PollResult& poll,
                                               const TypicalLabels& labels) {
  if (!poll.complete) throw input_error("IncompletePoll", "poll did not finish all rounds");
  int total = 0;
  for (const int c : poll.counts) {
    if (c < 0) throw input_error("IncompletePoll", "negative count");
    total += c;
  }
  if (poll.counts.size() != labels.size() || total != poll.rounds) {
    throw input_error("IncompletePoll", "counts do not sum to the round total");
  }
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (poll.counts[n] == poll.rounds && n != labels.other_index()) return labels.at(n);
  }
  return std::nullopt;
}

}  // namespace sgforge::rooms
