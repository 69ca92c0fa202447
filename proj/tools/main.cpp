#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "traffic/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

traffic::ExperimentConfig load_config(const std::string& path,
                                      std::optional<std::uint64_t> seed,
                                      std::optional<std::string> out) {
  auto cfg = traffic::ExperimentConfig::from_json(slurp(path));
  if (seed) {
    cfg.seed = *seed;
    cfg.city.seed = *seed;
  }
  if (out) cfg.output_dir = *out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust multi-objective traffic signal optimization harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config JSON")
        ->required();
    cmd->add_option("--seed", seed_override, "Master seed override");
    cmd->add_option("--out", out_override, "Output path override");
  };

  auto* build_city_cmd =
      app.add_subcommand("build-city", "Generate a city network JSON");
  add_common(build_city_cmd);
  auto* run_cmd = app.add_subcommand("run", "Run the configured experiment");
  add_common(run_cmd);
  auto* merge_cmd = app.add_subcommand(
      "merge-fronts", "Merge per-run fronts into the global Pareto table");
  add_common(merge_cmd);
  auto* heatmap_cmd = app.add_subcommand(
      "export-heatmap", "Export the uniform-signal baseline delay heatmap");
  add_common(heatmap_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (build_city_cmd->parsed()) {
      auto cfg = load_config(config_path, seed_override, {});
      const auto network = traffic::build_city(cfg.city);
      const std::string out = out_override.value_or("network.json");
      std::ofstream(out, std::ios::binary) << network.to_json();
      std::cout << "wrote " << out << " (" << network.size()
                << " intersections, " << network.edges().size() << " edges)\n";
    } else if (run_cmd->parsed()) {
      auto cfg = load_config(config_path, seed_override, out_override);
      const auto manifest = traffic::run_experiment(cfg);
      std::cout << "wrote " << manifest.files.size() << " artifacts, manifest "
                << manifest.manifest_path << "\n";
    } else if (merge_cmd->parsed()) {
      auto cfg = load_config(config_path, seed_override, {});
      const auto manifest_text =
          slurp((std::filesystem::path(cfg.output_dir) / "manifest.json")
                    .string());
      const auto meta = nlohmann::json::parse(manifest_text);
      std::vector<std::pair<std::string, std::vector<traffic::Solution>>> runs;
      for (const auto& run : meta.at("runs")) {
        std::string algorithm;
        auto front = traffic::front_from_json(
            slurp(run.at("front").get<std::string>()), &algorithm);
        runs.emplace_back(std::move(algorithm), std::move(front));
      }
      const auto merged = traffic::merge_global_front(runs);
      const std::string out = out_override.value_or(
          (std::filesystem::path(cfg.output_dir) / "global_front.csv")
              .string());
      std::ofstream(out, std::ios::binary)
          << traffic::front_records_to_csv(merged);
      std::cout << "wrote " << out << " (" << merged.size() << " records)\n";
    } else if (heatmap_cmd->parsed()) {
      auto cfg = load_config(config_path, seed_override, {});
      const auto network = traffic::build_city(cfg.city);
      std::size_t rows = cfg.city.arterial_count;
      std::size_t cols = cfg.city.collector_count;
      if (cfg.heatmap_layout) {
        rows = cfg.heatmap_layout->first;
        cols = cfg.heatmap_layout->second;
      } else if (rows * cols != network.size()) {
        rows = network.size();
        cols = 1;
      }
      const traffic::LambdaVector uniform_half(network.size(), 0.5);
      const auto delay = traffic::mean_delay_per_intersection(
          uniform_half, network, cfg.demand, cfg.seed, cfg.optimizer.n_e,
          cfg.optimizer.memory_depth);
      const std::string out = out_override.value_or("heatmap.csv");
      traffic::export_heatmap(delay, rows, cols, out);
      std::cout << "wrote " << out << " (" << rows << "x" << cols << ")\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
