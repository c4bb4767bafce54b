#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sgforge/pipeline/build.hpp"
#include "sgforge/pipeline/config.hpp"
#include "sgforge/pipeline/evaluate.hpp"
#include "sgforge/pipeline/export.hpp"
#include "sgforge/pipeline/query.hpp"

namespace {

int exit_code_for(sgforge::ErrorCategory category) {
  switch (category) {
    case sgforge::ErrorCategory::input: return 1;
    case sgforge::ErrorCategory::backend: return 2;
    case sgforge::ErrorCategory::invariant:
    case sgforge::ErrorCategory::internal: return 3;
  }
  return 3;
}

void run_build_command(const std::string& config_path, const std::string& frames_path,
                       const std::string& out_dir) {
  const sgforge::pipeline::PipelineConfig cfg = sgforge::pipeline::load_config(config_path);
  const sgforge::pipeline::BuildResult result =
      sgforge::pipeline::run_build(cfg, frames_path, out_dir);
  std::cout << "graph: " << result.graph_path << "\n";
  std::cout << "layers:";
  for (int layer = 1; layer <= result.graph.layer_count(); ++layer) {
    std::cout << " L" << layer << "=" << result.graph.layer_size(layer);
  }
  std::cout << "\n";
  std::size_t labeled = 0;
  for (const auto& room : result.room_nodes) {
    if (room.label) ++labeled;
  }
  std::cout << "rooms labeled: " << labeled << "/" << result.room_nodes.size() << "\n";
}

void run_evaluate_command(const std::string& config_path, const std::string& records_path) {
  const sgforge::pipeline::PipelineConfig cfg = sgforge::pipeline::load_config(config_path);
  const sgforge::pipeline::EvalReport report =
      sgforge::pipeline::evaluate_rooms(cfg, records_path);
  std::cout << report.to_json().dump(2) << "\n";
}

void run_query_command(const std::string& graph_path, const std::string& text,
                       const std::string& mode) {
  const sgforge::pipeline::QueryResult result =
      sgforge::pipeline::run_query(graph_path, text, mode);
  std::cout << result.to_json().dump(2) << "\n";
}

void run_export_command(const std::string& graph_path, const std::string& format) {
  const sgforge::pipeline::ExportFormat parsed = sgforge::pipeline::parse_export_format(format);
  std::cout << sgforge::pipeline::run_export(graph_path, parsed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sgforge: hierarchical 3D scene graphs from posed RGB-D logs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string frames_path;
  std::string out_dir;
  std::string records_path;
  std::string graph_path;
  std::string query_text;
  std::string query_mode;
  std::string export_format;

  CLI::App* build = app.add_subcommand("build", "Build a scene graph from a frame log");
  build->add_option("--config", config_path, "pipeline config file")->required();
  build->add_option("--frames", frames_path, "frame log (JSON Lines)")->required();
  build->add_option("--out", out_dir, "output directory")->required();

  CLI::App* evaluate =
      app.add_subcommand("evaluate-rooms", "Score room classification against ground truth");
  evaluate->add_option("--config", config_path, "pipeline config file")->required();
  evaluate->add_option("--records", records_path, "benchmark records (JSON Lines)")->required();

  CLI::App* query = app.add_subcommand("query", "Search a built graph");
  query->add_option("--graph", graph_path, "graph JSON file")->required();
  query->add_option("--text", query_text, "query text")->required();
  query->add_option("--mode", query_mode, "llm or lexical")
      ->required()
      ->check(CLI::IsMember({"llm", "lexical"}));

  CLI::App* exporter = app.add_subcommand("export", "Re-emit a built graph");
  exporter->add_option("--graph", graph_path, "graph JSON file")->required();
  exporter->add_option("--format", export_format, "json, prompt, or ply-bundle")
      ->required()
      ->check(CLI::IsMember({"json", "prompt", "ply-bundle"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) {
      run_build_command(config_path, frames_path, out_dir);
    } else if (evaluate->parsed()) {
      run_evaluate_command(config_path, records_path);
    } else if (query->parsed()) {
      run_query_command(graph_path, query_text, query_mode);
    } else if (exporter->parsed()) {
      run_export_command(graph_path, export_format);
    }
  } catch (const sgforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
