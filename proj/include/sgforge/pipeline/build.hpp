#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgforge/common.hpp"
#include "sgforge/fundamental/marching_cubes.hpp"
#include "sgforge/fundamental/places.hpp"
#include "sgforge/fundamental/tsdf.hpp"
#include "sgforge/graph/scene_graph.hpp"
#include "sgforge/graph/serialization.hpp"
#include "sgforge/io/frame_log.hpp"
#include "sgforge/io/ply.hpp"
#include "sgforge/llm/chat_client.hpp"
#include "sgforge/llm/templates.hpp"
#include "sgforge/objects/association.hpp"
#include "sgforge/objects/captioning.hpp"
#include "sgforge/objects/extraction.hpp"
#include "sgforge/pipeline/config.hpp"
#include "sgforge/rooms/captioning.hpp"
#include "sgforge/rooms/floors.hpp"
#include "sgforge/rooms/polling.hpp"
#include "sgforge/rooms/segmentation.hpp"

namespace sgforge::pipeline {

struct BuildResult {
  graph::SceneGraph graph;
  fundamental::Mesh mesh;
  fundamental::PlacesGraph places;
  std::vector<objects::ObjectNode> object_nodes;
  std::vector<rooms::RoomNode> room_nodes;
  std::vector<rooms::FloorNode> floor_nodes;
  std::vector<std::size_t> object_room;
  nlohmann::ordered_json report;
  std::string graph_path;
};

namespace detail {

/// One build at a time per output directory.
class LockFile {
 public:
  explicit LockFile(const std::filesystem::path& dir) : path_(dir / ".sgforge.lock") {
    if (std::filesystem::exists(path_)) {
      throw input_error("OutputLocked",
                        "another build owns " + dir.string() + " (stale lock? remove " +
                            path_.string() + ")");
    }
    std::ofstream out(path_);
    out << "locked\n";
  }

  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

  ~LockFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

 private:
  std::filesystem::path path_;
};

struct CaptionJob {
  std::size_t node_index = 0;
  std::string info_text;
  std::string crop_ref;
};

inline std::string caption_prompt_info(const std::string& class_name, std::size_t points,
                                       const Eigen::Vector3d& centroid) {
  std::ostringstream info;
  info << "Detected class: " << class_name << ". Observed points: " << points
       << ". Approximate position (meters): [" << centroid.x() << ", " << centroid.y() << ", "
       << centroid.z() << "].";
  return info.str();
}

inline Eigen::Vector3d mean_position(const std::vector<Eigen::Vector3d>& positions) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : positions) sum += p;
  return positions.empty() ? sum : Eigen::Vector3d(sum / static_cast<double>(positions.size()));
}

}  // namespace detail

namespace detail {

inline BuildResult build_locked(const PipelineConfig& cfg,
                                const std::vector<io::FrameRecord>& records,
                                const std::string& base_dir, const std::filesystem::path& out) {
  const auto t_start = std::chrono::steady_clock::now();
  const llm::ChatClient client(cfg.client);
  const llm::PromptLibrary prompts = llm::load_prompt_library(cfg.template_dir);
  const rooms::TypicalLabels labels(cfg.typical_labels);

  BuildResult result;
  fundamental::TsdfGrid grid(cfg.voxel_size, cfg.truncation);
  std::vector<detail::CaptionJob> caption_jobs;
  std::size_t instance_count = 0;
  std::size_t skipped_small = 0;
  std::size_t skipped_no_embedding = 0;

  // Pass 1: sequential fusion + instance association (single-writer stores).
  for (std::size_t fi = 0; fi < records.size(); ++fi) {
    fundamental::FrameObservation frame;
    try {
      frame = io::load_frame(records[fi], base_dir);
      fundamental::integrate_frame(grid, frame, cfg.pixel_stride);
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(fi) + ": " + e.what(), e.category());
    }

    for (const fundamental::SegMask& mask : frame.masks) {
      objects::ObjectInstance instance;
      try {
        instance = objects::extract_instance(frame, mask, cfg.extraction_params());
      } catch (const Error& e) {
        if (e.code() == "TooFewPoints") {
          ++skipped_small;
          continue;
        }
        throw Error(e.code(), "frame " + std::to_string(fi) + ": " + e.what(), e.category());
      }
      if (instance.embedding.size() == 0) {
        ++skipped_no_embedding;
        continue;
      }
      ++instance_count;

      const auto hit = objects::associate(instance, result.object_nodes, cfg.association_params());
      std::size_t node_index = 0;
      if (hit) {
        node_index = *hit;
        objects::fuse(result.object_nodes[node_index], instance, cfg.voxel_size / 2.0);
      } else {
        node_index = result.object_nodes.size();
        result.object_nodes.push_back(objects::make_node(
            instance, "L2_" + std::to_string(node_index), cfg.voxel_size / 2.0));
      }
      if (cfg.captioning && instance.crop_ref) {
        caption_jobs.push_back({node_index,
                                detail::caption_prompt_info(instance.class_name,
                                                            instance.cloud.size(),
                                                            geometry::centroid(instance.cloud)),
                                *instance.crop_ref});
      }
    }
  }
  const auto t_fused = std::chrono::steady_clock::now();

  // Pass 2: captioning (bounded parallel, deterministic slot assignment).
  if (cfg.captioning && !caption_jobs.empty()) {
    std::vector<graph::DescriptionSet> captions(caption_jobs.size());
    parallel_for(caption_jobs.size(), static_cast<std::size_t>(cfg.client.max_parallel),
                 [&](std::size_t i) {
                   const detail::CaptionJob& job = caption_jobs[i];
                   const std::string prompt = prompts.object_caption.render(
                       {{"node_info", job.info_text},
                        {"label_set", ""},
                        {"instructions", cfg.extra_instructions}});
                   const std::string response = client.chat(prompt, 0, job.crop_ref);
                   if (trim(response).empty()) {
                     throw backend_error("EmptyResponse", "empty caption for " + job.crop_ref);
                   }
                   captions[i] = objects::parse_caption(response);
                 });
    for (std::size_t i = 0; i < caption_jobs.size(); ++i) {
      result.object_nodes[caption_jobs[i].node_index].instance_captions.push_back(captions[i]);
    }
    std::vector<std::size_t> summary_targets;
    for (std::size_t n = 0; n < result.object_nodes.size(); ++n) {
      if (!result.object_nodes[n].instance_captions.empty()) summary_targets.push_back(n);
    }
    parallel_for(summary_targets.size(), static_cast<std::size_t>(cfg.client.max_parallel),
                 [&](std::size_t i) {
                   objects::ObjectNode& node = result.object_nodes[summary_targets[i]];
                   node.summary = objects::summarize_node(client, node, prompts.object_summary,
                                                          cfg.extra_instructions);
                 });
  }

  // Pass 3: geometry layers.
  result.mesh = fundamental::extract_mesh(grid);
  result.places = fundamental::build_places_graph(grid, cfg.places_params());
  const auto t_geometry = std::chrono::steady_clock::now();

  // Pass 4: rooms.
  result.room_nodes = rooms::segment_rooms(result.places, cfg.persistence_min);
  for (std::size_t r = 0; r < result.room_nodes.size(); ++r) {
    result.room_nodes[r].node_id = "L3_" + std::to_string(r);
  }
  result.object_room =
      rooms::assign_objects(result.room_nodes, result.object_nodes, result.places);

  std::map<graph::NodeId, const objects::ObjectNode*> objects_by_id;
  for (const objects::ObjectNode& node : result.object_nodes) {
    objects_by_id.emplace(node.node_id, &node);
  }

  struct PollRecord {
    std::string room_id;
    std::string prompt;
    rooms::PollResult poll;
  };
  std::vector<PollRecord> poll_records;

  if (cfg.captioning) {
    for (rooms::RoomNode& room : result.room_nodes) {
      if (!room.object_members.empty()) {
        const std::string info = rooms::room_info_text(room, objects_by_id);
        const std::string prompt =
            rooms::render_poll_prompt(info, labels, prompts.room_poll, cfg.extra_instructions);
        rooms::PollResult poll = rooms::run_poll(client, prompt, labels, cfg.poll_rounds);
        if (poll.complete) room.label = rooms::decide_label(poll, labels);
        room.poll = poll;
        poll_records.push_back({room.node_id, prompt, poll});
      }
      room.description =
          rooms::caption_room(client, room, objects_by_id, prompts.room_caption,
                              cfg.extra_instructions);
    }
  }

  // Pass 5: floors and the building root.
  if (cfg.floors) {
    result.floor_nodes =
        rooms::cluster_floors(result.room_nodes, objects_by_id, result.places, cfg.floor_gap);
    for (std::size_t f = 0; f < result.floor_nodes.size(); ++f) {
      result.floor_nodes[f].node_id = "L4_" + std::to_string(f);
      if (cfg.captioning) {
        result.floor_nodes[f].description =
            rooms::caption_floor(client, result.floor_nodes[f], result.room_nodes,
                                 prompts.floor_caption, cfg.extra_instructions);
      }
    }
  }
  const auto t_semantic = std::chrono::steady_clock::now();

  // Graph assembly. Explicit ids keep every cross-reference checkable.
  graph::SceneGraph g(cfg.floors ? 5 : 3);
  for (std::size_t p = 0; p < result.places.places.size(); ++p) {
    graph::GraphNode node;
    node.id = "L1_" + std::to_string(p);
    node.layer = 1;
    node.kind = graph::NodeKind::place;
    node.centroid = result.places.places[p].position;
    g.add_node(std::move(node));
  }
  for (const auto& [a, b] : result.places.edges) {
    g.add_edge("L1_" + std::to_string(a), "L1_" + std::to_string(b));
  }
  for (const objects::ObjectNode& obj : result.object_nodes) {
    graph::GraphNode node;
    node.id = obj.node_id;
    node.layer = 2;
    node.kind = graph::NodeKind::object;
    node.centroid = obj.centroid();
    node.label = obj.class_name();
    node.descriptions = obj.summary;
    node.geometry_ref = "objects/" + obj.node_id + ".ply";
    g.add_node(std::move(node));
  }
  for (std::size_t r = 0; r < result.room_nodes.size(); ++r) {
    const rooms::RoomNode& room = result.room_nodes[r];
    std::vector<Eigen::Vector3d> member_positions;
    for (const std::size_t p : room.place_members) {
      member_positions.push_back(result.places.places[p].position);
    }
    graph::GraphNode node;
    node.id = room.node_id;
    node.layer = 3;
    node.kind = graph::NodeKind::room;
    node.centroid = detail::mean_position(member_positions);
    node.label = room.label;
    node.descriptions = room.description;
    g.add_node(std::move(node));
  }
  for (std::size_t o = 0; o < result.object_nodes.size(); ++o) {
    g.add_edge(result.object_nodes[o].node_id, result.room_nodes[result.object_room[o]].node_id);
  }
  if (cfg.floors) {
    for (const rooms::FloorNode& floor : result.floor_nodes) {
      std::vector<Eigen::Vector3d> member_positions;
      for (const std::size_t r : floor.room_members) {
        member_positions.push_back(g.find(result.room_nodes[r].node_id)->centroid);
      }
      graph::GraphNode node;
      node.id = floor.node_id;
      node.layer = 4;
      node.kind = graph::NodeKind::floor;
      node.centroid = detail::mean_position(member_positions);
      node.descriptions = floor.description;
      g.add_node(std::move(node));
      for (const std::size_t r : floor.room_members) {
        g.add_edge(result.room_nodes[r].node_id, floor.node_id);
      }
    }
    std::vector<Eigen::Vector3d> floor_positions;
    for (const rooms::FloorNode& floor : result.floor_nodes) {
      floor_positions.push_back(g.find(floor.node_id)->centroid);
    }
    graph::GraphNode building;
    building.id = "L5_0";
    building.layer = 5;
    building.kind = graph::NodeKind::building;
    building.centroid = detail::mean_position(floor_positions);
    g.add_node(std::move(building));
    for (const rooms::FloorNode& floor : result.floor_nodes) {
      g.add_edge(floor.node_id, "L5_0");
    }
  }

  const std::string deviations =
      "room clustering uses a 0-dim persistence sweep over the clearance filtration; "
      "places-graph edges are capped at 6*voxel_size so low-clearance doorways stay separable";
  g.metadata()["dataset"] = cfg.dataset_name;
  g.metadata()["config_hash"] = cfg.config_hash();
  g.metadata()["mesh_ref"] = "mesh.ply";
  g.metadata()["deviations"] = deviations;
  result.graph = std::move(g);

  // Artifacts.
  const std::string graph_json = graph::serialize(result.graph);
  result.graph_path = (out / "graph.json").string();
  {
    std::ofstream fout(result.graph_path, std::ios::trunc | std::ios::binary);
    if (!fout) throw input_error("FileWrite", "cannot write " + result.graph_path);
    fout << graph_json;
  }
  io::write_mesh_ply((out / "mesh.ply").string(), result.mesh);
  std::filesystem::create_directories(out / "objects");
  for (const objects::ObjectNode& obj : result.object_nodes) {
    io::write_cloud_ply((out / "objects" / (obj.node_id + ".ply")).string(), obj.cloud);
  }
  if (!poll_records.empty()) {
    std::filesystem::create_directories(out / "polls");
    for (const PollRecord& rec : poll_records) {
      std::ofstream fout((out / "polls" / (rec.room_id + ".jsonl")).string(), std::ios::trunc);
      for (std::size_t round = 0; round < rec.poll.transcripts.size(); ++round) {
        const std::string& response = rec.poll.transcripts[round];
        nlohmann::ordered_json line{
            {"room_id", rec.room_id},
            {"round", round},
            {"prompt_hash", llm::request_digest(rec.prompt, "", static_cast<int>(round))},
            {"response", response},
            {"parsed_label", labels.at(rooms::parse_label(response, labels))}};
        fout << line.dump() << "\n";
      }
    }
  }
  if (cfg.captioning) {
    std::ofstream fout((out / "captions.jsonl").string(), std::ios::trunc);
    for (const objects::ObjectNode& obj : result.object_nodes) {
      for (std::size_t i = 0; i < obj.instance_captions.size(); ++i) {
        nlohmann::ordered_json entries = nlohmann::ordered_json::array();
        for (const auto& d : obj.instance_captions[i].attributes()) {
          entries.push_back({{"key", d.key}, {"text", d.text}});
        }
        nlohmann::ordered_json line{
            {"node_id", obj.node_id}, {"instance", i}, {"entries", entries}};
        fout << line.dump() << "\n";
      }
    }
  }

  const auto t_end = std::chrono::steady_clock::now();
  const auto ms = [](auto a, auto b) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
  };

  nlohmann::ordered_json layer_counts;
  for (int layer = 1; layer <= result.graph.layer_count(); ++layer) {
    layer_counts[std::to_string(layer)] = result.graph.layer_size(layer);
  }
  std::size_t labeled_rooms = 0;
  for (const rooms::RoomNode& room : result.room_nodes) {
    if (room.label) ++labeled_rooms;
  }
  result.report = nlohmann::ordered_json{
      {"dataset", cfg.dataset_name},
      {"config_hash", cfg.config_hash()},
      {"frame_count", records.size()},
      {"layer_counts", layer_counts},
      {"object_instances", instance_count},
      {"instances_skipped_too_few_points", skipped_small},
      {"instances_skipped_no_embedding", skipped_no_embedding},
      {"rooms_labeled", labeled_rooms},
      {"deviations", deviations},
      {"timings_ms",
       {{"fuse_and_associate", ms(t_start, t_fused)},
        {"mesh_and_places", ms(t_fused, t_geometry)},
        {"rooms_and_floors", ms(t_geometry, t_semantic)},
        {"total", ms(t_start, t_end)}}},
      {"built_at_unix_ms",
       std::chrono::duration_cast<std::chrono::milliseconds>(
           std::chrono::system_clock::now().time_since_epoch())
           .count()}};
  {
    std::ofstream fout((out / "report.json").string(), std::ios::trunc);
    fout << result.report.dump(2) << "\n";
  }
  return result;
}

}  // namespace detail

/// Full layer-construction pass: TSDF fusion, mesh, places, objects, rooms,
/// floors, building, then artifact export into out_dir. Failures still flush
/// a report with the error context.
inline BuildResult run_build(const PipelineConfig& cfg, const std::string& frames_path,
                             const std::string& out_dir) {
  cfg.check();
  const std::vector<io::FrameRecord> records = io::load_frame_log(frames_path);
  if (records.empty()) throw input_error("EmptyInput", "frame log has no records: " + frames_path);

  const std::filesystem::path out(out_dir);
  std::filesystem::create_directories(out);
  detail::LockFile lock(out);
  const std::string base_dir = std::filesystem::path(frames_path).parent_path().string();
  try {
    return detail::build_locked(cfg, records, base_dir, out);
  } catch (const Error& e) {
    nlohmann::ordered_json failure{{"dataset", cfg.dataset_name},
                                   {"config_hash", cfg.config_hash()},
                                   {"error_code", e.code()},
                                   {"error", e.what()}};
    std::ofstream fout((out / "report.json").string(), std::ios::trunc);
    if (fout) fout << failure.dump(2) << "\n";
    throw;
  }
}

}  // namespace sgforge::pipeline
