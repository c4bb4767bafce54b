#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/places.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/llm/prompt_template.hpp"
#include "sgforge/objects/captioning.hpp"
#include "sgforge/rooms/polling.hpp"
#include "sgforge/rooms/types.hpp"

namespace sgforge::rooms {

inline const char* kUnobservedSentinel = "unobserved area";

/// Concise room description from member-object summaries. Rooms without any
/// observed object get the sentinel text without a backend call.
inline graph::DescriptionSet caption_room(
    const llm::ChatClient& client, const RoomNode& room,
    const std::map<graph::NodeId, const objects::ObjectNode*>& objects,
    const llm::PromptTemplate& tmpl, const std::string& extra_instructions = "") {
  graph::DescriptionSet set;
  if (room.object_members.empty()) {
    set.add("description", kUnobservedSentinel);
    return set;
  }
  const std::string prompt = tmpl.render({{"node_info", room_info_text(room, objects)},
                                          {"label_set", ""},
                                          {"instructions", extra_instructions}});
  const std::string response = client.chat(prompt, 0);
  if (trim(response).empty()) {
    throw backend_error("EmptyResponse", "room caption backend returned empty text");
  }
  return objects::parse_caption(response, "description");
}

/// Median z of the room's member-object centroids; places are the fallback
/// when a room holds no objects.
inline double room_height(const RoomNode& room,
                          const std::map<graph::NodeId, const objects::ObjectNode*>& objects,
                          const fundamental::PlacesGraph& places) {
  std::vector<double> heights;
  for (const graph::NodeId& id : room.object_members) {
    const auto it = objects.find(id);
    if (it != objects.end()) heights.push_back(it->second->centroid().z());
  }
  if (heights.empty()) {
    for (const std::size_t p : room.place_members) {
      heights.push_back(places.places[p].position.z());
    }
  }
  if (heights.empty()) throw input_error("NoHeightEvidence", "room has no objects or places");
  std::sort(heights.begin(), heights.end());
  const std::size_t n = heights.size();
  if (n % 2 == 1) return heights[n / 2];
  return 0.5 * (heights[n / 2 - 1] + heights[n / 2]);
}

}  // namespace sgforge::rooms
