#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "support/synthetic_scene.hpp"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(SGFORGE_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return {};
  RunResult result;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const std::string kQuietConfig =
    "dataset_name = cli_demo\n"
    "captioning = false\n"
    "pixel_stride = 2\n"
    "client.mock_mode = strict\n";

}  // namespace

TEST(CliTest, HelpAndParseErrors) {
  const RunResult help = run_cli("--help");
  EXPECT_EQ(help.exit_code, 0);
  EXPECT_NE(help.output.find("build"), std::string::npos);
  EXPECT_NE(help.output.find("evaluate-rooms"), std::string::npos);
  EXPECT_NE(help.output.find("query"), std::string::npos);
  EXPECT_NE(help.output.find("export"), std::string::npos);

  EXPECT_EQ(run_cli("frobnicate").exit_code, 1);
  EXPECT_EQ(run_cli("build --config only.cfg").exit_code, 1);          // missing options
  EXPECT_EQ(run_cli("query --graph g --text t --mode fuzzy").exit_code, 1);
}

TEST(CliTest, BuildThenQueryThenExport) {
  sgtest::TempDir dir;
  sgtest::write_scene_log(sgtest::two_room_scene(), dir.path() / "scene");
  write_file(dir.str("pipeline.cfg"), kQuietConfig);

  const RunResult build = run_cli("build --config " + dir.str("pipeline.cfg") + " --frames " +
                                  dir.str("scene/frames.jsonl") + " --out " + dir.str("out"));
  ASSERT_EQ(build.exit_code, 0) << build.output;
  EXPECT_NE(build.output.find("graph: "), std::string::npos);
  EXPECT_NE(build.output.find("L3=2"), std::string::npos);
  EXPECT_NE(build.output.find("L5=1"), std::string::npos);
  EXPECT_NE(build.output.find("rooms labeled: 0/2"), std::string::npos);
  ASSERT_TRUE(fs::exists(fs::path(dir.str("out")) / "graph.json"));

  const std::string graph_arg = " --graph " + dir.str("out/graph.json");
  const RunResult query = run_cli("query" + graph_arg + " --text bed --mode lexical");
  ASSERT_EQ(query.exit_code, 0) << query.output;
  const auto parsed = nlohmann::json::parse(query.output);
  EXPECT_EQ(parsed["mode"], "lexical");
  ASSERT_FALSE(parsed["matches"].empty());
  EXPECT_EQ(parsed["matches"][0]["score"], 1.0);

  const RunResult prompt = run_cli("export" + graph_arg + " --format prompt");
  ASSERT_EQ(prompt.exit_code, 0);
  EXPECT_NE(prompt.output.find("Room L3_0"), std::string::npos);

  const RunResult json_out = run_cli("export" + graph_arg + " --format json");
  ASSERT_EQ(json_out.exit_code, 0);
  std::ifstream in(dir.str("out/graph.json"), std::ios::binary);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  EXPECT_EQ(json_out.output, bytes.str());

  const RunResult bundle = run_cli("export" + graph_arg + " --format ply-bundle");
  ASSERT_EQ(bundle.exit_code, 0);
  EXPECT_NE(bundle.output.find("mesh.ply: "), std::string::npos);
  EXPECT_NE(bundle.output.find("geometries verified"), std::string::npos);
}

TEST(CliTest, EvaluateRoomsPrintsAReport) {
  sgtest::TempDir dir;
  write_file(dir.str("eval.cfg"),
             "poll_rounds = 3\n"
             "client.mock_mode = sequence\n"
             "client.mock_sequence = kitchen, kitchen, kitchen\n");
  write_file(dir.str("records.jsonl"),
             R"({"room_id":"r0","ground_truth_label":"kitchen","objects":["stove"]})"
             "\n");

  const RunResult result =
      run_cli("evaluate-rooms --config " + dir.str("eval.cfg") + " --records " +
              dir.str("records.jsonl"));
  ASSERT_EQ(result.exit_code, 0) << result.output;
  const auto report = nlohmann::json::parse(result.output);
  EXPECT_EQ(report["rooms_evaluated"], 1);
  EXPECT_EQ(report["rooms_correct"], 1);
  EXPECT_EQ(report["accuracy"], 1.0);
}

TEST(CliTest, ExitCodesTrackErrorCategories) {
  sgtest::TempDir dir;

  // Input errors exit 1.
  const RunResult missing = run_cli("build --config " + dir.str("none.cfg") + " --frames x --out " +
                                    dir.str("out"));
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_NE(missing.output.find("error:"), std::string::npos);
  EXPECT_EQ(run_cli("query --graph " + dir.str("none.json") + " --text bed --mode lexical")
                .exit_code,
            1);

  // Backend failures exit 2: captioning against a strict mock with no
  // fixtures fails at the first caption call.
  sgtest::write_scene_log(sgtest::two_room_scene(), dir.path() / "scene");
  write_file(dir.str("chatty.cfg"),
             "captioning = true\npixel_stride = 2\nclient.mock_mode = strict\n");
  const RunResult backend =
      run_cli("build --config " + dir.str("chatty.cfg") + " --frames " +
              dir.str("scene/frames.jsonl") + " --out " + dir.str("out2"));
  EXPECT_EQ(backend.exit_code, 2) << backend.output;
  const auto report =
      nlohmann::json::parse(std::ifstream(dir.str("out2/report.json")), nullptr, true);
  EXPECT_EQ(report["error_code"], "FixtureMiss");

  // Invariant violations exit 3: an edge that skips a layer.
  write_file(dir.str("broken.json"), R"({
  "layers": [1, 2, 3],
  "nodes": [
    {"id": "L1_0", "layer": 1, "kind": "place", "label": null,
     "centroid": [0, 0, 0], "descriptions": [], "geometry": null},
    {"id": "L3_0", "layer": 3, "kind": "room", "label": null,
     "centroid": [1, 1, 1], "descriptions": [], "geometry": null}
  ],
  "edges": [["L1_0", "L3_0"]],
  "metadata": {}
})");
  const RunResult invariant =
      run_cli("query --graph " + dir.str("broken.json") + " --text bed --mode lexical");
  EXPECT_EQ(invariant.exit_code, 3) << invariant.output;
}
