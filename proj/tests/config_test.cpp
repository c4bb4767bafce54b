#include <gtest/gtest.h>

#include <fstream>
#include <string>
#include <vector>

#include "sgforge/pipeline/config.hpp"
#include "support/temp_dir.hpp"

using namespace sgforge;
using pipeline::PipelineConfig;

namespace {

std::string code_of(const std::string& text) {
  try {
    pipeline::parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(ConfigTest, DefaultsAreValid) {
  const PipelineConfig cfg;
  EXPECT_NO_THROW(cfg.check());
  EXPECT_EQ(cfg.config_hash().size(), 16u);
  EXPECT_EQ(pipeline::parse_config("").config_hash(), cfg.config_hash());
}

TEST(ConfigTest, ParsesEveryKeyKind) {
  const std::string text = R"(
# full configuration exercise
dataset_name = "office # 3"   # quoted hash is not a comment
voxel_size = 0.04
truncation = 0.2
agent_height = 1.5
pixel_stride = 2
min_points = 30
association_threshold = 0.6
geometric_weight = 0.25
semantic_weight = 0.75
typical_labels = kitchen, "meeting room", other room
poll_rounds = 5
persistence_min = 0.4
floor_gap = 2.5
captioning = false
floors = true
template_dir = tmpl
extra_instructions = "be brief"

client.backend = http
client.endpoint = http://127.0.0.1:9/v1/chat
client.model_name = test-model
client.temperature = 0.0
client.max_retries = 1
client.timeout_seconds = 5.5
client.backoff_base_ms = 10
client.auth_header = X-Api-Key
client.auth_prefix = ""
client.api_key_env = MY_KEY
client.max_parallel = 2
client.mock_mode = sequence
client.fixture_path = fixtures.json
client.default_text = hallway
client.mock_sequence = a, b, "c d"
client.audit_path = audit.jsonl
)";
  const PipelineConfig cfg = pipeline::parse_config(text);
  EXPECT_EQ(cfg.dataset_name, "office # 3");
  EXPECT_DOUBLE_EQ(cfg.voxel_size, 0.04);
  EXPECT_DOUBLE_EQ(cfg.truncation, 0.2);
  EXPECT_DOUBLE_EQ(cfg.agent_height, 1.5);
  EXPECT_EQ(cfg.pixel_stride, 2);
  EXPECT_EQ(cfg.min_points, 30u);
  EXPECT_DOUBLE_EQ(cfg.association_threshold, 0.6);
  EXPECT_DOUBLE_EQ(cfg.geometric_weight, 0.25);
  EXPECT_DOUBLE_EQ(cfg.semantic_weight, 0.75);
  EXPECT_EQ(cfg.typical_labels,
            (std::vector<std::string>{"kitchen", "meeting room", "other room"}));
  EXPECT_EQ(cfg.poll_rounds, 5);
  EXPECT_DOUBLE_EQ(cfg.persistence_min, 0.4);
  EXPECT_DOUBLE_EQ(cfg.floor_gap, 2.5);
  EXPECT_FALSE(cfg.captioning);
  EXPECT_TRUE(cfg.floors);
  EXPECT_EQ(cfg.template_dir, "tmpl");
  EXPECT_EQ(cfg.extra_instructions, "be brief");
  EXPECT_EQ(cfg.client.backend, llm::ChatBackend::http);
  EXPECT_EQ(cfg.client.endpoint, "http://127.0.0.1:9/v1/chat");
  EXPECT_EQ(cfg.client.model_name, "test-model");
  EXPECT_DOUBLE_EQ(cfg.client.temperature, 0.0);
  EXPECT_EQ(cfg.client.max_retries, 1);
  EXPECT_DOUBLE_EQ(cfg.client.timeout_seconds, 5.5);
  EXPECT_EQ(cfg.client.backoff_base_ms, 10);
  EXPECT_EQ(cfg.client.auth_header, "X-Api-Key");
  EXPECT_EQ(cfg.client.auth_prefix, "");
  EXPECT_EQ(cfg.client.api_key_env, "MY_KEY");
  EXPECT_EQ(cfg.client.max_parallel, 2);
  EXPECT_EQ(cfg.client.mock_mode, llm::MockMode::sequence);
  EXPECT_EQ(cfg.client.fixture_path, "fixtures.json");
  EXPECT_EQ(cfg.client.default_text, "hallway");
  EXPECT_EQ(cfg.client.mock_sequence, (std::vector<std::string>{"a", "b", "c d"}));
  EXPECT_EQ(cfg.client.audit_path, "audit.jsonl");
}

TEST(ConfigTest, MalformedInputIsRejected) {
  EXPECT_EQ(code_of("bogus_key = 1\n"), "BadConfig");
  try {
    pipeline::parse_config("bogus_key = 1\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
  }

  try {
    pipeline::parse_config("voxel_size = 0.05\n\nthis line has no equals\n");
    FAIL() << "expected BadConfig";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }

  EXPECT_EQ(code_of("voxel_size = fast\n"), "BadConfig");
  EXPECT_EQ(code_of("poll_rounds = 2.5\n"), "BadConfig");
  EXPECT_EQ(code_of("captioning = yes\n"), "BadConfig");
  EXPECT_EQ(code_of("client.backend = carrier_pigeon\n"), "BadConfig");
  EXPECT_EQ(code_of("client.mock_mode = random\n"), "BadConfig");
}

TEST(ConfigTest, SemanticValidation) {
  EXPECT_EQ(code_of("voxel_size = 0.1\ntruncation = 0.05\n"), "BadConfig");
  EXPECT_EQ(code_of("geometric_weight = 0.7\nsemantic_weight = 0.7\n"), "BadConfig");
  EXPECT_EQ(code_of("association_threshold = 1.0\n"), "BadConfig");
  EXPECT_EQ(code_of("poll_rounds = 0\n"), "BadConfig");
  EXPECT_EQ(code_of("persistence_min = 0\n"), "BadConfig");
  EXPECT_EQ(code_of("min_points = 0\n"), "BadConfig");
  EXPECT_EQ(code_of("typical_labels = kitchen, bedroom\n"), "MissingOtherLabel");
  EXPECT_EQ(code_of("client.temperature = -0.5\n"), "BadTemperature");
  EXPECT_EQ(code_of("client.backend = http\n"), "MissingEndpoint");
}

TEST(ConfigTest, HashTracksEveryField) {
  const std::string base_hash = PipelineConfig{}.config_hash();

  const std::vector<std::string> single_edits = {
      "dataset_name = other\n",
      "voxel_size = 0.051\n",
      "captioning = false\n",
      "typical_labels = kitchen, bathroom, bedroom, other room\n",
      "client.model_name = different\n",
      "client.mock_sequence = x\n",
      "extra_instructions = hi\n",
  };
  for (const std::string& edit : single_edits) {
    EXPECT_NE(pipeline::parse_config(edit).config_hash(), base_hash) << edit;
  }

  // Stable across construction and across key order in the source text.
  EXPECT_EQ(PipelineConfig{}.config_hash(), base_hash);
  const std::string a = "voxel_size = 0.06\ndataset_name = lab\ntruncation = 0.2\n";
  const std::string b = "truncation = 0.2\ndataset_name = lab\nvoxel_size = 0.06\n";
  EXPECT_EQ(pipeline::parse_config(a).config_hash(), pipeline::parse_config(b).config_hash());
}

TEST(ConfigTest, LoadAddsFileContext) {
  sgtest::TempDir dir;
  EXPECT_THROW(pipeline::load_config(dir.str("none.cfg")), Error);

  std::ofstream(dir.str("bad.cfg")) << "mystery = 1\n";
  try {
    pipeline::load_config(dir.str("bad.cfg"));
    FAIL() << "expected BadConfig";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "BadConfig");
    EXPECT_NE(std::string(e.what()).find("bad.cfg"), std::string::npos);
  }

  std::ofstream(dir.str("good.cfg")) << "dataset_name = demo\n";
  EXPECT_EQ(pipeline::load_config(dir.str("good.cfg")).dataset_name, "demo");
}
