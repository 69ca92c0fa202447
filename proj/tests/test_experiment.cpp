#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "traffic/experiment.hpp"

using namespace traffic;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Solution make_sol(double f1, double f2, double r) {
  Solution s;
  s.lambda = {0.5, 0.5};
  s.objectives = {f1, f2, r};
  return s;
}

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.city.archetype = CityArchetype::Grid;
  cfg.city.arterial_count = 4;
  cfg.city.collector_count = 4;
  cfg.city.seed = 3;
  cfg.city.label = "tiny";
  cfg.demand = demand_for_city(cfg.city);
  cfg.algorithms = {"ahmoa"};
  cfg.optimizer.population_size = 16;
  cfg.optimizer.max_generations = 5;
  cfg.optimizer.n_e = 2;
  cfg.optimizer.memory_depth = 3;
  cfg.repetitions = 1;
  cfg.seed = 21;
  cfg.output_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("log transform") {
  CHECK(log_round4(1.0) == 0.0);
  CHECK(log_round4(std::exp(2.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isinf(log_round4(0.0)));
  CHECK(log_round4(0.0) < 0.0);
  CHECK_THROWS(log_round4(-1.0));

  CHECK(format_log_value(log_round4(0.0)) == "-Inf");
  CHECK(format_log_value(0.0) == "0.0000");
  CHECK(format_log_value(2.0) == "2.0000");
  CHECK(format_log_value(-7.8175) == "-7.8175");

  auto logs = log_transform({1.0, std::exp(1.0), 0.0});
  CHECK(logs[0] == 0.0);
  CHECK(logs[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isinf(logs[2]));
}

TEST_CASE("merge global front") {
  // every point of run B dominated by a point of run A
  std::vector<std::pair<std::string, std::vector<Solution>>> runs;
  runs.emplace_back("A", std::vector<Solution>{make_sol(1, 1, 1),
                                               make_sol(2, 0.5, 1)});
  runs.emplace_back("B", std::vector<Solution>{make_sol(3, 3, 3),
                                               make_sol(2, 2, 2)});
  auto merged = merge_global_front(runs);
  REQUIRE(merged.size() == 2);
  for (const auto& rec : merged) CHECK(rec.algorithm == "A");

  // duplicates collapse to one record
  runs.clear();
  runs.emplace_back("A", std::vector<Solution>{make_sol(1, 1, 1),
                                               make_sol(1, 1, 1)});
  merged = merge_global_front(runs);
  CHECK(merged.size() == 1);

  // random fronts: pairwise oracle confirms mutual non-dominance and sorting
  RngStream rng(8);
  runs.clear();
  for (int run = 0; run < 3; ++run) {
    std::vector<Solution> front;
    for (int k = 0; k < 15; ++k)
      front.push_back(make_sol(rng.uniform(1, 10), rng.uniform(1, 10),
                               rng.uniform(1, 10)));
    runs.emplace_back("alg" + std::to_string(run), std::move(front));
  }
  merged = merge_global_front(runs);
  CHECK(!merged.empty());
  for (const auto& a : merged)
    for (const auto& b : merged)
      if (&a != &b) CHECK(!dominates(a.raw_objectives, b.raw_objectives));
  for (std::size_t i = 1; i < merged.size(); ++i)
    CHECK(merged[i - 1].log_objectives[0] <= merged[i].log_objectives[0]);

  CHECK(merge_global_front({}).empty());
}

TEST_CASE("heatmap export") {
  auto net = build_grid_city(2, 2, 5);
  DemandProfile profile;
  LambdaVector lambda(4, 0.5);
  auto delay = mean_delay_per_intersection(lambda, net, profile, 9, 2, 3);
  REQUIRE(delay.size() == 4);

  // hand check one cell against the objective pipeline
  MemoryBuffer memory(3);
  Matrix mem;
  for (std::uint64_t j = 1; j <= 2; ++j)
    mem = memory.push(generate_volumes(net, profile, 9, j));
  auto res = average_delay(lambda, mem, net);
  double mean0 = 0.0;
  for (std::size_t t = 0; t < kHoursPerDay; ++t)
    mean0 += res.per_intersection_hour.at(0, t);
  mean0 /= static_cast<double>(kHoursPerDay);
  CHECK(delay[0] == doctest::Approx(mean0).epsilon(1e-12));

  const std::string path = "test_heatmap.csv";
  export_heatmap(delay, 2, 2, path);
  const auto text = slurp(path);
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 5);  // header + 4 cells
  fs::remove(path);

  CHECK_THROWS(export_heatmap(delay, 3, 2, "nope.csv"));
}

TEST_CASE("config parsing") {
  const std::string good = R"({
    "city": {"preset": "manhattan"},
    "algorithms": ["ahmoa", "moead"],
    "optimizer": {"population_size": 16, "max_generations": 3, "n_e": 1},
    "repetitions": 2,
    "seed": 7,
    "output_dir": "out"
  })";
  auto cfg = ExperimentConfig::from_json(good);
  CHECK(cfg.city.arterial_count == 22);
  CHECK(cfg.city.collector_count == 120);
  CHECK(cfg.optimizer.population_size == 16);
  CHECK(cfg.repetitions == 2);

  // unknown keys rejected at every level
  CHECK_THROWS(ExperimentConfig::from_json(R"({"bogus": 1})"));
  CHECK_THROWS(ExperimentConfig::from_json(
      R"({"city": {"preset": "manhattan", "bogus": 1}})"));
  CHECK_THROWS(ExperimentConfig::from_json(
      R"({"optimizer": {"bogus": 1}})"));
  CHECK_THROWS(ExperimentConfig::from_json(
      R"({"city": {"preset": "atlantis"}})"));
  CHECK_THROWS(ExperimentConfig::from_json(
      R"({"algorithms": ["simulated_annealing"]})"));

  // istanbul preset carries its uplift into the demand profile
  auto ist = ExperimentConfig::from_json(
      R"({"city": {"preset": "istanbul"}})");
  CHECK(ist.demand.city_uplift == doctest::Approx(0.25));
  CHECK(ist.city.peak_windows.size() == 2);
}

TEST_CASE("front json round trip") {
  std::vector<Solution> front = {make_sol(1.5, 2.5, 0.25),
                                 make_sol(3.5, 0.5, 0.0)};
  front[0].lambda = {0.1, 0.9, 0.5};
  std::string algorithm;
  auto restored = front_from_json(front_to_json("ahmoa", front), &algorithm);
  CHECK(algorithm == "ahmoa");
  REQUIRE(restored.size() == 2);
  CHECK(restored[0].lambda == front[0].lambda);
  CHECK(restored[0].objectives == front[0].objectives);
  CHECK(restored[1].objectives == front[1].objectives);
}

TEST_CASE("run experiment round trip and determinism") {
  const std::string dir_a = "test_out_a";
  const std::string dir_b = "test_out_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  auto cfg = tiny_config(dir_a);
  auto manifest = run_experiment(cfg);
  CHECK(manifest.files.size() >= 4);
  for (const auto& f : manifest.files) {
    CHECK(fs::exists(f));
    CHECK(fs::file_size(f) > 0);
  }

  // front file parses back
  auto front = front_from_json(slurp(dir_a + "/ahmoa_rep0/front.json"));
  CHECK(!front.empty());

  // identical config, different directory: byte-identical fronts
  auto cfg_b = tiny_config(dir_b);
  run_experiment(cfg_b);
  CHECK(slurp(dir_a + "/ahmoa_rep0/front.csv") ==
        slurp(dir_b + "/ahmoa_rep0/front.csv"));
  CHECK(slurp(dir_a + "/ahmoa_rep0/telemetry.jsonl") ==
        slurp(dir_b + "/ahmoa_rep0/telemetry.jsonl"));
  CHECK(slurp(dir_a + "/global_front.csv") == slurp(dir_b + "/global_front.csv"));

  // merged table only references configured algorithms
  const auto merged = slurp(dir_a + "/global_front.csv");
  std::istringstream lines(merged);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line))
    CHECK(line.rfind("ahmoa,", 0) == 0);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("derived run seeds are distinct") {
  CHECK(derive_run_seed(1, 0, 0) != derive_run_seed(1, 0, 1));
  CHECK(derive_run_seed(1, 0, 0) != derive_run_seed(1, 1, 0));
  CHECK(derive_run_seed(1, 0, 0) == derive_run_seed(1, 0, 0));
}
