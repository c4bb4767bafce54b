#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sgforge/pipeline/build.hpp"
#include "sgforge/pipeline/evaluate.hpp"
#include "sgforge/pipeline/export.hpp"
#include "sgforge/pipeline/query.hpp"
#include "support/synthetic_scene.hpp"
#include "support/temp_dir.hpp"

using namespace sgforge;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

pipeline::PipelineConfig quiet_config() {
  pipeline::PipelineConfig cfg;
  cfg.dataset_name = "two_room_demo";
  cfg.captioning = false;
  cfg.pixel_stride = 2;
  // Strict mock with no fixtures: any backend call would throw, proving the
  // captioning-off path performs zero LLM traffic.
  cfg.client.mock_mode = llm::MockMode::strict;
  return cfg;
}

pipeline::PipelineConfig chatty_config() {
  pipeline::PipelineConfig cfg;
  cfg.dataset_name = "two_room_demo";
  cfg.captioning = true;
  cfg.pixel_stride = 2;
  cfg.poll_rounds = 2;
  cfg.client.mock_mode = llm::MockMode::default_text;
  cfg.client.default_text = "other room";
  return cfg;
}

/// One shared captioning-free build; several tests inspect its artifacts.
struct BuiltScene {
  sgtest::TempDir dir;
  pipeline::PipelineConfig cfg;
  pipeline::BuildResult result;
  std::string out_dir;
};

const BuiltScene& built_scene() {
  static const BuiltScene* cached = [] {
    setenv("SGFORGE_LLM_API_KEY", "super-secret-key-value", 1);
    auto* built = new BuiltScene();
    const std::string log =
        sgtest::write_scene_log(sgtest::two_room_scene(), built->dir.path() / "scene");
    built->cfg = quiet_config();
    built->out_dir = built->dir.str("out");
    built->result = pipeline::run_build(built->cfg, log, built->out_dir);
    return built;
  }();
  return *cached;
}

graph::SceneGraph tiny_graph() {
  graph::SceneGraph g(5);
  graph::GraphNode chair;
  chair.id = "L2_0";
  chair.layer = 2;
  chair.kind = graph::NodeKind::object;
  chair.label = "chair";
  chair.descriptions.add("state", "wooden");
  g.add_node(std::move(chair));

  graph::GraphNode table;
  table.id = "L2_1";
  table.layer = 2;
  table.kind = graph::NodeKind::object;
  table.label = "table";
  g.add_node(std::move(table));

  graph::GraphNode room;
  room.id = "L3_0";
  room.layer = 3;
  room.kind = graph::NodeKind::room;
  room.label = "kitchen";
  g.add_node(std::move(room));

  g.add_edge("L2_0", "L3_0");
  g.add_edge("L2_1", "L3_0");
  return g;
}

}  // namespace

TEST(BuildTest, TwoRoomSceneProducesEveryLayer) {
  const BuiltScene& built = built_scene();
  const pipeline::BuildResult& result = built.result;

  ASSERT_EQ(result.graph.layer_count(), 5);
  EXPECT_GT(result.graph.layer_size(1), 4u);
  EXPECT_GE(result.graph.layer_size(2), 4u);
  EXPECT_EQ(result.graph.layer_size(3), 2u);
  EXPECT_EQ(result.graph.layer_size(4), 1u);
  EXPECT_EQ(result.graph.layer_size(5), 1u);

  EXPECT_EQ(result.graph.layer_size(1), result.places.places.size());
  EXPECT_EQ(result.graph.layer_size(2), result.object_nodes.size());
  EXPECT_EQ(result.room_nodes.size(), 2u);
  EXPECT_EQ(result.floor_nodes.size(), 1u);

  // Every extracted object carries one of the scene's classes, and each
  // class shows up somewhere.
  const std::set<std::string> expected{"stove", "sink", "bed", "wardrobe"};
  std::set<std::string> seen;
  for (const auto& node : result.object_nodes) {
    ASSERT_TRUE(expected.count(node.class_name())) << node.class_name();
    seen.insert(node.class_name());
  }
  EXPECT_EQ(seen, expected);

  // Objects land in the room on their side of the dividing wall (x = 4).
  ASSERT_EQ(result.object_room.size(), result.object_nodes.size());
  for (std::size_t i = 0; i < result.object_nodes.size(); ++i) {
    const double x = result.object_nodes[i].centroid().x();
    const std::size_t room = result.object_room[i];
    double room_x = 0.0;
    for (const std::size_t p : result.room_nodes[room].place_members) {
      room_x += result.places.places[p].position.x();
    }
    room_x /= static_cast<double>(result.room_nodes[room].place_members.size());
    EXPECT_EQ(x < 4.0, room_x < 4.0) << result.object_nodes[i].node_id;
    EXPECT_TRUE(result.room_nodes[room].object_members.count(result.object_nodes[i].node_id));
  }
}

TEST(BuildTest, QuietBuildSkipsAllSemanticCalls) {
  const BuiltScene& built = built_scene();
  for (const auto& room : built.result.room_nodes) {
    EXPECT_FALSE(room.label.has_value());
    EXPECT_TRUE(room.description.empty());
    EXPECT_FALSE(room.poll.has_value());
  }
  for (const auto& node : built.result.object_nodes) {
    EXPECT_TRUE(node.instance_captions.empty());
    EXPECT_TRUE(node.summary.empty());
  }
  EXPECT_FALSE(fs::exists(fs::path(built.out_dir) / "captions.jsonl"));
  EXPECT_FALSE(fs::exists(fs::path(built.out_dir) / "polls"));
}

TEST(BuildTest, ArtifactsAreWrittenAndReloadable) {
  const BuiltScene& built = built_scene();
  const fs::path out(built.out_dir);
  ASSERT_TRUE(fs::exists(out / "graph.json"));
  ASSERT_TRUE(fs::exists(out / "mesh.ply"));
  ASSERT_TRUE(fs::exists(out / "report.json"));
  EXPECT_FALSE(fs::exists(out / ".sgforge.lock"));

  const graph::SceneGraph loaded = pipeline::load_graph_file(built.result.graph_path);
  EXPECT_EQ(graph::serialize(loaded), graph::serialize(built.result.graph));
  EXPECT_EQ(loaded.metadata().at("dataset"), "two_room_demo");
  EXPECT_EQ(loaded.metadata().at("config_hash"), built.cfg.config_hash());
  EXPECT_EQ(loaded.metadata().at("mesh_ref"), "mesh.ply");

  for (const auto& node : built.result.object_nodes) {
    const fs::path cloud = out / "objects" / (node.node_id + ".ply");
    ASSERT_TRUE(fs::exists(cloud)) << cloud;
    EXPECT_EQ(io::read_cloud_ply(cloud.string()).size(), node.cloud.size());
  }

  const auto report = nlohmann::json::parse(slurp((out / "report.json").string()));
  EXPECT_EQ(report["dataset"], "two_room_demo");
  EXPECT_EQ(report["layer_counts"]["1"], built.result.places.places.size());
  EXPECT_EQ(report["layer_counts"]["2"], built.result.object_nodes.size());
  EXPECT_EQ(report["layer_counts"]["3"], 2);
  EXPECT_EQ(report["layer_counts"]["5"], 1);
  EXPECT_EQ(report["rooms_labeled"], 0);
  EXPECT_GE(report["object_instances"].get<std::size_t>(),
            built.result.object_nodes.size());
}

TEST(BuildTest, CredentialsNeverReachArtifacts) {
  const BuiltScene& built = built_scene();
  const std::string graph_text = slurp(built.result.graph_path);
  const std::string report_text = slurp((fs::path(built.out_dir) / "report.json").string());
  EXPECT_EQ(graph_text.find("super-secret-key-value"), std::string::npos);
  EXPECT_EQ(report_text.find("super-secret-key-value"), std::string::npos);
  EXPECT_EQ(graph_text.find("SGFORGE_LLM_API_KEY"), std::string::npos);
}

TEST(BuildTest, CaptionedBuildWritesTranscripts) {
  sgtest::TempDir dir;
  const std::string log = sgtest::write_scene_log(sgtest::two_room_scene(), dir.path() / "scene");
  const pipeline::PipelineConfig cfg = chatty_config();
  const auto result = pipeline::run_build(cfg, log, dir.str("out"));

  // The scripted backend answers "other room" everywhere: polls complete,
  // but a full-score abstention label never materializes.
  ASSERT_EQ(result.room_nodes.size(), 2u);
  for (const auto& room : result.room_nodes) {
    ASSERT_TRUE(room.poll.has_value());
    EXPECT_TRUE(room.poll->complete);
    EXPECT_FALSE(room.label.has_value());
    EXPECT_FALSE(room.description.empty());

    const fs::path poll_file = fs::path(dir.str("out")) / "polls" / (room.node_id + ".jsonl");
    ASSERT_TRUE(fs::exists(poll_file));
    std::ifstream in(poll_file);
    std::string line;
    std::size_t rounds = 0;
    while (std::getline(in, line)) {
      const auto doc = nlohmann::json::parse(line);
      EXPECT_EQ(doc["room_id"], room.node_id);
      EXPECT_EQ(doc["parsed_label"], "other room");
      ++rounds;
    }
    EXPECT_EQ(rounds, 2u);
  }

  for (const auto& node : result.object_nodes) {
    EXPECT_FALSE(node.instance_captions.empty()) << node.node_id;
    EXPECT_FALSE(node.summary.empty()) << node.node_id;
  }
  ASSERT_EQ(result.floor_nodes.size(), 1u);
  EXPECT_FALSE(result.floor_nodes[0].description.empty());
  EXPECT_TRUE(fs::exists(fs::path(dir.str("out")) / "captions.jsonl"));
}

TEST(BuildTest, RepeatBuildsAreByteIdentical) {
  sgtest::TempDir dir;
  const std::string log = sgtest::write_scene_log(sgtest::two_room_scene(), dir.path() / "scene");
  const pipeline::PipelineConfig cfg = chatty_config();
  const auto first = pipeline::run_build(cfg, log, dir.str("out_a"));
  const auto second = pipeline::run_build(cfg, log, dir.str("out_b"));
  const std::string bytes_a = slurp(first.graph_path);
  const std::string bytes_b = slurp(second.graph_path);
  ASSERT_FALSE(bytes_a.empty());
  EXPECT_EQ(bytes_a, bytes_b);
}

TEST(BuildTest, InputAndLockFailures) {
  sgtest::TempDir dir;
  const pipeline::PipelineConfig cfg = quiet_config();

  try {
    pipeline::run_build(cfg, dir.str("absent.jsonl"), dir.str("out"));
    FAIL() << "expected FileMissing";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "FileMissing");
  }

  std::ofstream(dir.str("empty.jsonl")) << "";
  try {
    pipeline::run_build(cfg, dir.str("empty.jsonl"), dir.str("out"));
    FAIL() << "expected EmptyInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "EmptyInput");
  }

  // A pre-existing lock blocks the build.
  fs::create_directories(dir.path() / "locked");
  std::ofstream(dir.str("locked/.sgforge.lock")) << "locked\n";
  io::FrameRecord record;
  record.depth_path = "depth.png";
  record.mask_path = "mask.png";
  io::write_frame_log(dir.str("frames.jsonl"), {record});
  try {
    pipeline::run_build(cfg, dir.str("frames.jsonl"), dir.str("locked"));
    FAIL() << "expected OutputLocked";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "OutputLocked");
  }

  // A mid-build failure still flushes a report naming the failed frame.
  try {
    pipeline::run_build(cfg, dir.str("frames.jsonl"), dir.str("broken"));
    FAIL() << "expected FileMissing for the frame's depth image";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "FileMissing");
    EXPECT_NE(std::string(e.what()).find("frame 0"), std::string::npos);
  }
  const auto report = nlohmann::json::parse(slurp(dir.str("broken/report.json")));
  EXPECT_EQ(report["error_code"], "FileMissing");
  EXPECT_FALSE(fs::exists(fs::path(dir.str("broken")) / ".sgforge.lock"));
}

TEST(EvalTest, UnanimousFixturesScorePerfectly) {
  sgtest::TempDir dir;
  pipeline::PipelineConfig cfg;
  cfg.poll_rounds = 3;
  cfg.client.mock_mode = llm::MockMode::strict;
  cfg.client.fixture_path = dir.str("fixtures.json");

  const std::vector<std::pair<std::string, std::string>> lines{
      {R"({"room_id":"r_kitchen","ground_truth_label":"kitchen","objects":[{"class_name":"stove"},{"class_name":"sink","description":"steel basin"}]})",
       "kitchen"},
      {R"({"room_id":"r_bedroom","ground_truth_label":"bedroom","objects":["bed","wardrobe"]})",
       "bedroom"}};

  const auto prompts = llm::default_prompt_library();
  const rooms::TypicalLabels labels(cfg.typical_labels);
  llm::MockFixtureStore store;
  std::ofstream records(dir.str("records.jsonl"));
  for (const auto& [line, answer] : lines) {
    records << line << "\n";
    const auto record = pipeline::parse_eval_record(line);
    const std::string prompt = rooms::render_poll_prompt(
        pipeline::eval_record_info(record), labels, prompts.room_poll, cfg.extra_instructions);
    for (int round = 0; round < cfg.poll_rounds; ++round) {
      store.set(llm::request_digest(prompt, "", round), answer);
    }
  }
  records.close();
  store.save(cfg.client.fixture_path);

  const auto report = pipeline::evaluate_rooms(cfg, dir.str("records.jsonl"));
  EXPECT_EQ(report.records_total, 2u);
  EXPECT_EQ(report.records_malformed, 0u);
  EXPECT_EQ(report.rooms_evaluated, 2u);
  EXPECT_EQ(report.rooms_annotated, 2u);
  EXPECT_EQ(report.rooms_correct, 2u);
  ASSERT_TRUE(report.accuracy.has_value());
  EXPECT_DOUBLE_EQ(*report.accuracy, 1.0);
  EXPECT_TRUE(report.abstentions.empty());
  EXPECT_EQ(report.per_room_category.at("kitchen").correct, 1u);
  EXPECT_EQ(report.per_object_category.at("bed").annotated, 1u);
  EXPECT_EQ(report.to_json()["accuracy"], 1.0);
}

TEST(EvalTest, SplitPollsAbstainAndMalformedLinesAreCounted) {
  sgtest::TempDir dir;
  pipeline::PipelineConfig cfg;
  cfg.poll_rounds = 3;
  cfg.client.mock_mode = llm::MockMode::strict;
  cfg.client.fixture_path = dir.str("fixtures.json");

  const std::string line =
      R"({"room_id":"r_mixed","ground_truth_label":"kitchen","objects":["stove","bed"]})";
  const auto record = pipeline::parse_eval_record(line);
  const auto prompts = llm::default_prompt_library();
  const rooms::TypicalLabels labels(cfg.typical_labels);
  const std::string prompt = rooms::render_poll_prompt(
      pipeline::eval_record_info(record), labels, prompts.room_poll, cfg.extra_instructions);

  llm::MockFixtureStore store;
  store.set(llm::request_digest(prompt, "", 0), "kitchen");
  store.set(llm::request_digest(prompt, "", 1), "bedroom");
  store.set(llm::request_digest(prompt, "", 2), "kitchen");
  store.save(cfg.client.fixture_path);

  std::ofstream(dir.str("records.jsonl")) << line << "\n\nnot json at all\n";

  const auto report = pipeline::evaluate_rooms(cfg, dir.str("records.jsonl"));
  EXPECT_EQ(report.records_total, 2u);
  EXPECT_EQ(report.records_malformed, 1u);
  EXPECT_EQ(report.rooms_evaluated, 1u);
  EXPECT_EQ(report.rooms_annotated, 0u);
  EXPECT_FALSE(report.accuracy.has_value());
  EXPECT_EQ(report.to_json()["accuracy"], "n/a");
  ASSERT_EQ(report.abstentions.size(), 1u);
  EXPECT_EQ(report.abstentions[0], "r_mixed");
}

TEST(QueryTest, LexicalRanksByTokenOverlap) {
  const graph::SceneGraph g = tiny_graph();

  const auto exact = pipeline::lexical_query(g, "wooden chair");
  ASSERT_FALSE(exact.matches.empty());
  EXPECT_EQ(exact.matches[0].node_id, "L2_0");
  EXPECT_DOUBLE_EQ(exact.matches[0].score, 1.0);
  EXPECT_NE(exact.matches[0].rationale.find("chair"), std::string::npos);

  const auto cased = pipeline::lexical_query(g, "KITCHEN!");
  ASSERT_EQ(cased.matches.size(), 1u);
  EXPECT_EQ(cased.matches[0].node_id, "L3_0");

  EXPECT_TRUE(pipeline::lexical_query(g, "spaceship").matches.empty());
  EXPECT_THROW(pipeline::lexical_query(g, "!!!"), Error);

  // Equal scores rank by numeric id order, not string order.
  graph::SceneGraph many(5);
  for (const int idx : {0, 10, 2}) {
    graph::GraphNode node;
    node.id = "L2_" + std::to_string(idx);
    node.layer = 2;
    node.kind = graph::NodeKind::object;
    node.label = "chair";
    many.add_node(std::move(node));
  }
  const auto tied = pipeline::lexical_query(many, "chair");
  ASSERT_EQ(tied.matches.size(), 3u);
  EXPECT_EQ(tied.matches[0].node_id, "L2_0");
  EXPECT_EQ(tied.matches[1].node_id, "L2_2");
  EXPECT_EQ(tied.matches[2].node_id, "L2_10");
}

TEST(QueryTest, LlmModeReadsIdsFromTheResponse) {
  const graph::SceneGraph g = tiny_graph();
  const auto prompts = llm::default_prompt_library();

  llm::ChatClientConfig scripted;
  scripted.mock_mode = llm::MockMode::sequence;
  scripted.mock_sequence = {"Use L2_1 first, then L3_0; L2_1 repeats and L9_9 is bogus."};
  const llm::ChatClient client(scripted);

  const auto result = pipeline::llm_query(client, prompts.query, g, "where do I eat?");
  ASSERT_EQ(result.matches.size(), 2u);
  EXPECT_EQ(result.matches[0].node_id, "L2_1");
  EXPECT_DOUBLE_EQ(result.matches[0].score, 1.0);
  EXPECT_EQ(result.matches[1].node_id, "L3_0");
  EXPECT_DOUBLE_EQ(result.matches[1].score, 0.5);
  ASSERT_EQ(result.notes.size(), 1u);
  EXPECT_NE(result.notes[0].find("UnknownNodeInResponse"), std::string::npos);
  EXPECT_NE(result.notes[0].find("L9_9"), std::string::npos);

  llm::ChatClientConfig silent;
  silent.mock_mode = llm::MockMode::sequence;
  silent.mock_sequence = {"no ids in this answer"};
  const auto empty = pipeline::llm_query(llm::ChatClient(silent), prompts.query, g, "anything");
  EXPECT_TRUE(empty.matches.empty());
  ASSERT_EQ(empty.notes.size(), 1u);

  EXPECT_THROW(pipeline::llm_query(client, prompts.query, g, "   "), Error);
}

TEST(QueryTest, PromptFormGroupsRoomsAndTruncatesWholeBlocks) {
  graph::SceneGraph g = tiny_graph();
  graph::GraphNode spare;
  spare.id = "L2_7";
  spare.layer = 2;
  spare.kind = graph::NodeKind::object;
  spare.label = "plant";
  g.add_node(std::move(spare));

  const std::string full = pipeline::render_prompt_form(g);
  EXPECT_NE(full.find("Room L3_0 (kitchen)"), std::string::npos);
  EXPECT_NE(full.find("- L2_0 chair: wooden"), std::string::npos);
  EXPECT_NE(full.find("Unassigned objects:"), std::string::npos);
  EXPECT_NE(full.find("L2_7 plant"), std::string::npos);
  EXPECT_LT(full.find("L3_0"), full.find("L2_7"));

  const std::size_t first_block = full.find("Unassigned");
  const std::string cut = pipeline::render_prompt_form(g, first_block);
  EXPECT_NE(cut.find("L3_0"), std::string::npos);
  EXPECT_EQ(cut.find("L2_7"), std::string::npos);
  EXPECT_NE(cut.find("...(truncated)"), std::string::npos);

  EXPECT_EQ(pipeline::render_prompt_form(graph::SceneGraph(5)), "(empty graph)");
}

TEST(QueryTest, RunQueryOnBuiltArtifacts) {
  const BuiltScene& built = built_scene();

  const auto lexical = pipeline::run_query(built.result.graph_path, "bed", "lexical");
  ASSERT_FALSE(lexical.matches.empty());
  const auto* hit = built.result.graph.find(lexical.matches[0].node_id);
  ASSERT_NE(hit, nullptr);
  EXPECT_EQ(hit->label.value_or(""), "bed");

  unsetenv("SGFORGE_LLM_ENDPOINT");
  const auto echoed = pipeline::run_query(built.result.graph_path, "find the bed", "llm");
  EXPECT_EQ(echoed.mode, "llm");
  ASSERT_FALSE(echoed.matches.empty());
  EXPECT_TRUE(echoed.notes.empty());
  for (const auto& match : echoed.matches) {
    EXPECT_NE(built.result.graph.find(match.node_id), nullptr) << match.node_id;
  }

  EXPECT_THROW(pipeline::run_query(built.result.graph_path, "bed", "fuzzy"), Error);
}

TEST(ExportTest, FormatsRoundTripTheGraph) {
  const BuiltScene& built = built_scene();

  const std::string original = slurp(built.result.graph_path);
  EXPECT_EQ(pipeline::run_export(built.result.graph_path, pipeline::ExportFormat::json),
            original);

  const std::string prompt =
      pipeline::run_export(built.result.graph_path, pipeline::ExportFormat::prompt);
  EXPECT_NE(prompt.find("Room L3_0"), std::string::npos);
  EXPECT_EQ(prompt.back(), '\n');

  const std::string bundle =
      pipeline::run_export(built.result.graph_path, pipeline::ExportFormat::ply_bundle);
  EXPECT_NE(bundle.find("mesh.ply: "), std::string::npos);
  EXPECT_NE(bundle.find(std::to_string(built.result.object_nodes.size()) +
                        " object geometries verified"),
            std::string::npos);
  for (const auto& node : built.result.object_nodes) {
    EXPECT_NE(bundle.find("objects/" + node.node_id + ".ply"), std::string::npos);
  }
}

TEST(ExportTest, BundleFailsOnMissingGeometry) {
  const BuiltScene& built = built_scene();
  sgtest::TempDir dir;

  // Copy the artifacts, then delete one object cloud.
  fs::copy(built.out_dir, dir.path() / "copy", fs::copy_options::recursive);
  const std::string graph_path = (dir.path() / "copy" / "graph.json").string();
  fs::remove(dir.path() / "copy" / "objects" /
             (built.result.object_nodes.front().node_id + ".ply"));
  try {
    pipeline::run_export(graph_path, pipeline::ExportFormat::ply_bundle);
    FAIL() << "expected BundleFileMissing";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "BundleFileMissing");
  }

  // A graph without artifact references exports an empty listing instead.
  const std::string bare_path = dir.str("bare.json");
  std::ofstream(bare_path) << graph::serialize(tiny_graph());
  const std::string listing =
      pipeline::run_export(bare_path, pipeline::ExportFormat::ply_bundle);
  EXPECT_NE(listing.find("0 object geometries verified"), std::string::npos);
}

TEST(ExportTest, FormatParsingAndMissingFiles) {
  EXPECT_EQ(pipeline::parse_export_format("json"), pipeline::ExportFormat::json);
  EXPECT_EQ(pipeline::parse_export_format("prompt"), pipeline::ExportFormat::prompt);
  EXPECT_EQ(pipeline::parse_export_format("ply-bundle"), pipeline::ExportFormat::ply_bundle);
  try {
    pipeline::parse_export_format("yaml");
    FAIL() << "expected UnknownFormat";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "UnknownFormat");
  }
  EXPECT_THROW(pipeline::load_graph_file("/nonexistent/graph.json"), Error);
}
