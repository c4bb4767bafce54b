#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/places.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/llm/prompt_template.hpp"
#include "sgforge/objects/captioning.hpp"
#include "sgforge/rooms/captioning.hpp"
#include "sgforge/rooms/types.hpp"

namespace sgforge::rooms {

/// 1D single-linkage clustering: sorted heights split wherever the gap
/// between neighbours exceeds the threshold. Returns a cluster index per
/// input height; clusters are numbered bottom-up.
inline std::vector<std::size_t> cluster_heights(const std::vector<double>& heights, double gap) {
  if (gap < 0.0) throw input_error("BadGap", "floor gap must be non-negative");
  std::vector<std::size_t> order(heights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (heights[a] != heights[b]) return heights[a] < heights[b];
    return a < b;
  });

  std::vector<std::size_t> cluster(heights.size(), 0);
  std::size_t current = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && heights[order[i]] - heights[order[i - 1]] > gap) ++current;
    cluster[order[i]] = current;
  }
  return cluster;
}

/// Groups rooms into floors by height and captions each floor from its room
/// descriptions. Floors come back ordered bottom-up; node ids are assigned by
/// the caller when the floors enter the graph.
inline std::vector<FloorNode> cluster_floors(
    const std::vector<RoomNode>& rooms,
    const std::map<graph::NodeId, const objects::ObjectNode*>& objects,
    const fundamental::PlacesGraph& places, double gap = 1.5) {
  if (rooms.empty()) return {};
  std::vector<double> heights;
  heights.reserve(rooms.size());
  for (const RoomNode& room : rooms) heights.push_back(room_height(room, objects, places));

  const std::vector<std::size_t> cluster = cluster_heights(heights, gap);
  const std::size_t floor_count = *std::max_element(cluster.begin(), cluster.end()) + 1;

  std::vector<FloorNode> floors(floor_count);
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    floors[cluster[r]].room_members.push_back(r);
  }
  for (FloorNode& floor : floors) {
    std::vector<double> member_heights;
    for (const std::size_t r : floor.room_members) member_heights.push_back(heights[r]);
    std::sort(member_heights.begin(), member_heights.end());
    const std::size_t n = member_heights.size();
    floor.height = (n % 2 == 1) ? member_heights[n / 2]
                                : 0.5 * (member_heights[n / 2 - 1] + member_heights[n / 2]);
  }
  return floors;
}

/// Text block describing a floor's rooms, fed to the floor caption prompt.
inline std::string floor_info_text(const FloorNode& floor, const std::vector<RoomNode>& rooms) {
  std::string info;
  for (const std::size_t r : floor.room_members) {
    const RoomNode& room = rooms[r];
    std::string line = "- " + (room.label ? *room.label : std::string("unlabeled room"));
    const std::string detail = room.description.joined_text();
    if (!detail.empty()) line += ": " + detail;
    if (!info.empty()) info += "\n";
    info += line;
  }
  return info.empty() ? "(no rooms)" : info;
}

inline graph::DescriptionSet caption_floor(const llm::ChatClient& client, const FloorNode& floor,
                                           const std::vector<RoomNode>& rooms,
                                           const llm::PromptTemplate& tmpl,
                                           const std::string& extra_instructions = "") {
  const std::string prompt = tmpl.render({{"node_info", floor_info_text(floor, rooms)},
                                          {"label_set", ""},
                                          {"instructions", extra_instructions}});
  const std::string response = client.chat(prompt, 0);
  if (trim(response).empty()) {
    throw backend_error("EmptyResponse", "floor caption backend returned empty text");
  }
  return objects::parse_caption(response, "description");
}

}  // namespace sgforge::rooms
