#include "traffic/experiment.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace traffic {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kTagRunSeed = 41;
constexpr std::uint64_t kTagHeatmap = 42;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument(std::string("unknown key '") + it.key() +
                                  "' in " + where);
  }
}

HourWindow window_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("hour window must be a [start, end] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

std::vector<HourWindow> windows_from_json(const json& j) {
  std::vector<HourWindow> out;
  for (const auto& w : j) out.push_back(window_from_json(w));
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<FrontRecord> solutions_to_records(
    const std::string& algorithm, const std::vector<Solution>& front) {
  std::vector<FrontRecord> records;
  for (const auto& sol : front) {
    FrontRecord rec;
    rec.algorithm = algorithm;
    rec.raw_objectives = sol.objectives;
    rec.log_objectives = log_transform(sol.objectives);
    rec.lambda = sol.lambda;
    records.push_back(std::move(rec));
  }
  return records;
}

void sort_records(std::vector<FrontRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const FrontRecord& a, const FrontRecord& b) {
                     if (a.log_objectives[0] != b.log_objectives[0])
                       return a.log_objectives[0] < b.log_objectives[0];
                     if (a.log_objectives[1] != b.log_objectives[1])
                       return a.log_objectives[1] < b.log_objectives[1];
                     if (a.log_objectives[2] != b.log_objectives[2])
                       return a.log_objectives[2] < b.log_objectives[2];
                     return a.algorithm < b.algorithm;
                   });
}

std::string telemetry_to_jsonl(const std::vector<GenerationStats>& history) {
  std::string out;
  for (const auto& s : history) {
    json line;
    line["generation"] = s.generation;
    line["p"] = s.probabilities;
    line["front_size"] = s.front_size;
    line["best_f1"] = s.best_f1;
    line["best_f2"] = s.best_f2;
    line["best_r"] = s.best_r;
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

void CityConfig::validate() const {
  if (peak_windows.empty())
    throw std::invalid_argument("city needs at least one peak window");
  for (const auto& [start, end] : peak_windows)
    if (start < 0.0 || start >= 24.0 || end < 0.0 || end > 24.0 || start >= end)
      throw std::invalid_argument("peak window hours must lie in [0, 24)");
  switch (archetype) {
    case CityArchetype::Grid:
      if (arterial_count < 2 || collector_count < 2)
        throw std::invalid_argument("grid city needs dimensions >= 2");
      break;
    case CityArchetype::RadialConcentric:
      if (arterial_count < 3 || collector_count < 1)
        throw std::invalid_argument("radial city needs >= 3 radials, >= 1 ring");
      break;
    case CityArchetype::IrregularMesh:
      if (arterial_count < 1 || collector_count < 1 ||
          arterial_count * collector_count < 2)
        throw std::invalid_argument("irregular city needs >= 2 intersections");
      break;
  }
}

CityConfig city_preset(const std::string& name, std::uint64_t seed) {
  CityConfig cfg;
  cfg.seed = seed;
  cfg.label = name;
  if (name == "manhattan") {
    cfg.archetype = CityArchetype::Grid;
    cfg.arterial_count = 22;
    cfg.collector_count = 120;
    cfg.peak_windows = {{7.0, 9.0}, {17.0, 19.0}};
  } else if (name == "istanbul") {
    cfg.archetype = CityArchetype::IrregularMesh;
    cfg.arterial_count = 30;
    cfg.collector_count = 50;
    cfg.peak_windows = {{7.0, 10.0}, {16.0, 20.0}};
    cfg.peak_uplift = 0.25;
  } else if (name == "paris") {
    cfg.archetype = CityArchetype::RadialConcentric;
    cfg.arterial_count = 20;
    cfg.collector_count = 60;
    cfg.peak_windows = {{7.0, 9.0}, {17.0, 19.0}};
  } else if (name == "sao_paulo") {
    cfg.archetype = CityArchetype::IrregularMesh;
    cfg.arterial_count = 30;
    cfg.collector_count = 50;
    cfg.peak_windows = {{6.0, 10.0}, {16.0, 21.0}};
  } else {
    throw std::invalid_argument("unknown city preset: " + name);
  }
  return cfg;
}

TrafficNetwork build_city(const CityConfig& cfg) {
  cfg.validate();
  switch (cfg.archetype) {
    case CityArchetype::Grid:
      return build_grid_city(cfg.arterial_count, cfg.collector_count, cfg.seed);
    case CityArchetype::RadialConcentric:
      return build_radial_city(cfg.arterial_count, cfg.collector_count,
                               cfg.seed);
    case CityArchetype::IrregularMesh:
      return build_irregular_city(cfg.arterial_count, cfg.collector_count,
                                  cfg.seed);
  }
  throw std::logic_error("unreachable");
}

DemandProfile demand_for_city(const CityConfig& cfg) {
  DemandProfile profile;
  profile.peak_windows = cfg.peak_windows;
  profile.city_uplift = cfg.peak_uplift;
  return profile;
}

void ExperimentConfig::validate() const {
  city.validate();
  demand.validate();
  optimizer.validate();
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (algorithms.empty())
    throw std::invalid_argument("algorithm list must be non-empty");
  for (const auto& a : algorithms)
    if (a != "ahmoa" && a != "nsga3_style" && a != "nsde3" && a != "moead")
      throw std::invalid_argument("unknown algorithm: " + a);
  if (output_dir.empty())
    throw std::invalid_argument("output directory must be set");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  check_keys(j,
             {"city", "demand", "algorithms", "optimizer", "repetitions",
              "seed", "output_dir", "heatmap_layout"},
             "experiment config");
  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("city")) {
    const json& c = j["city"];
    check_keys(c,
               {"preset", "archetype", "arterial_count", "collector_count",
                "seed", "peak_windows", "peak_uplift", "label"},
               "city config");
    if (c.contains("preset")) {
      cfg.city = city_preset(c["preset"].get<std::string>(), cfg.seed);
    } else {
      const std::string arch = c.at("archetype").get<std::string>();
      if (arch == "grid")
        cfg.city.archetype = CityArchetype::Grid;
      else if (arch == "radial")
        cfg.city.archetype = CityArchetype::RadialConcentric;
      else if (arch == "irregular")
        cfg.city.archetype = CityArchetype::IrregularMesh;
      else
        throw std::invalid_argument("unknown archetype: " + arch);
      cfg.city.label = arch;
    }
    if (c.contains("arterial_count"))
      cfg.city.arterial_count = c["arterial_count"].get<std::size_t>();
    if (c.contains("collector_count"))
      cfg.city.collector_count = c["collector_count"].get<std::size_t>();
    if (c.contains("seed")) cfg.city.seed = c["seed"].get<std::uint64_t>();
    else if (!c.contains("preset")) cfg.city.seed = cfg.seed;
    if (c.contains("peak_windows"))
      cfg.city.peak_windows = windows_from_json(c["peak_windows"]);
    if (c.contains("peak_uplift"))
      cfg.city.peak_uplift = c["peak_uplift"].get<double>();
    if (c.contains("label")) cfg.city.label = c["label"].get<std::string>();
  }

  cfg.demand = demand_for_city(cfg.city);
  if (j.contains("demand")) {
    const json& d = j["demand"];
    check_keys(d,
               {"peak_windows", "lunch_window", "midnight_window",
                "peak_base_factor", "peak_jitter", "offpeak_range",
                "lunch_base_factor", "lunch_jitter", "midnight_factor",
                "city_uplift"},
               "demand profile");
    if (d.contains("peak_windows"))
      cfg.demand.peak_windows = windows_from_json(d["peak_windows"]);
    if (d.contains("lunch_window"))
      cfg.demand.lunch_window = window_from_json(d["lunch_window"]);
    if (d.contains("midnight_window"))
      cfg.demand.midnight_window = window_from_json(d["midnight_window"]);
    if (d.contains("peak_base_factor"))
      cfg.demand.peak_base_factor = d["peak_base_factor"].get<double>();
    if (d.contains("peak_jitter"))
      cfg.demand.peak_jitter = window_from_json(d["peak_jitter"]);
    if (d.contains("offpeak_range"))
      cfg.demand.offpeak_range = window_from_json(d["offpeak_range"]);
    if (d.contains("lunch_base_factor"))
      cfg.demand.lunch_base_factor = d["lunch_base_factor"].get<double>();
    if (d.contains("lunch_jitter"))
      cfg.demand.lunch_jitter = window_from_json(d["lunch_jitter"]);
    if (d.contains("midnight_factor"))
      cfg.demand.midnight_factor = d["midnight_factor"].get<double>();
    if (d.contains("city_uplift"))
      cfg.demand.city_uplift = d["city_uplift"].get<double>();
  }

  if (j.contains("algorithms"))
    cfg.algorithms = j["algorithms"].get<std::vector<std::string>>();

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    check_keys(o,
               {"population_size", "max_generations", "n_e", "alpha", "p_floor",
                "success_denominator", "sbx_eta", "mutation_eta",
                "mutation_prob", "de_weight", "de_crossover", "pso_inertia",
                "pso_cognitive", "pso_social", "pso_vmax", "ls_radius",
                "memory_depth", "robustness_mode"},
               "optimizer config");
    auto& opt = cfg.optimizer;
    if (o.contains("population_size"))
      opt.population_size = o["population_size"].get<std::size_t>();
    if (o.contains("max_generations"))
      opt.max_generations = o["max_generations"].get<std::size_t>();
    if (o.contains("n_e")) opt.n_e = o["n_e"].get<std::size_t>();
    if (o.contains("alpha")) opt.alpha = o["alpha"].get<double>();
    if (o.contains("p_floor")) opt.p_floor = o["p_floor"].get<double>();
    if (o.contains("success_denominator")) {
      const std::string d = o["success_denominator"].get<std::string>();
      if (d == "per_strategy")
        opt.denominator = SuccessDenominator::PerStrategy;
      else if (d == "grand_total")
        opt.denominator = SuccessDenominator::GrandTotal;
      else
        throw std::invalid_argument("unknown success denominator: " + d);
    }
    if (o.contains("sbx_eta")) opt.sbx_eta = o["sbx_eta"].get<double>();
    if (o.contains("mutation_eta"))
      opt.mutation_eta = o["mutation_eta"].get<double>();
    if (o.contains("mutation_prob"))
      opt.mutation_prob = o["mutation_prob"].get<double>();
    if (o.contains("de_weight")) opt.de_weight = o["de_weight"].get<double>();
    if (o.contains("de_crossover"))
      opt.de_crossover = o["de_crossover"].get<double>();
    if (o.contains("pso_inertia"))
      opt.pso_inertia = o["pso_inertia"].get<double>();
    if (o.contains("pso_cognitive"))
      opt.pso_cognitive = o["pso_cognitive"].get<double>();
    if (o.contains("pso_social"))
      opt.pso_social = o["pso_social"].get<double>();
    if (o.contains("pso_vmax")) opt.pso_vmax = o["pso_vmax"].get<double>();
    if (o.contains("ls_radius")) opt.ls_radius = o["ls_radius"].get<double>();
    if (o.contains("memory_depth"))
      opt.memory_depth = o["memory_depth"].get<std::size_t>();
    if (o.contains("robustness_mode")) {
      const std::string m = o["robustness_mode"].get<std::string>();
      if (m == "mean_table")
        opt.robustness_mode = RobustnessMode::MeanTableThenScore;
      else if (m == "mean_of_scores")
        opt.robustness_mode = RobustnessMode::MeanOfPerDrawScores;
      else
        throw std::invalid_argument("unknown robustness mode: " + m);
    }
  }

  if (j.contains("repetitions"))
    cfg.repetitions = j["repetitions"].get<std::size_t>();
  if (j.contains("output_dir"))
    cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("heatmap_layout")) {
    const json& l = j["heatmap_layout"];
    if (!l.is_array() || l.size() != 2)
      throw std::invalid_argument("heatmap_layout must be [rows, cols]");
    cfg.heatmap_layout = {l.at(0).get<std::size_t>(),
                          l.at(1).get<std::size_t>()};
  }
  cfg.validate();
  return cfg;
}

double log_round4(double raw) {
  if (raw < 0.0) throw std::invalid_argument("log transform of negative value");
  if (raw == 0.0) return -std::numeric_limits<double>::infinity();
  const double v = std::nearbyint(std::log(raw) * 1e4) / 1e4;
  return v == 0.0 ? 0.0 : v;  // normalize -0
}

std::array<double, 3> log_transform(const ObjectiveVector& raw) {
  return {log_round4(raw.f1), log_round4(raw.f2), log_round4(raw.r)};
}

std::string format_log_value(double v) {
  if (std::isinf(v)) return v < 0.0 ? "-Inf" : "Inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::vector<FrontRecord> merge_global_front(
    const std::vector<std::pair<std::string, std::vector<Solution>>>& runs) {
  std::vector<FrontRecord> pool;
  for (const auto& [alg, front] : runs) {
    auto records = solutions_to_records(alg, front);
    pool.insert(pool.end(), std::make_move_iterator(records.begin()),
                std::make_move_iterator(records.end()));
  }

  std::vector<FrontRecord> survivors;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pool.size() && !dominated; ++j)
      if (i != j &&
          dominates(pool[j].raw_objectives, pool[i].raw_objectives))
        dominated = true;
    if (dominated) continue;
    bool duplicate = false;
    for (const auto& kept : survivors)
      if (kept.log_objectives == pool[i].log_objectives) {
        duplicate = true;
        break;
      }
    if (!duplicate) survivors.push_back(std::move(pool[i]));
  }
  sort_records(survivors);
  return survivors;
}

std::string front_records_to_csv(const std::vector<FrontRecord>& records) {
  std::string out = "algorithm,log_f1,log_f2,log_r,raw_f1,raw_f2,raw_r\n";
  char buf[256];
  for (const auto& rec : records) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%.17g,%.17g,%.17g\n",
                  rec.algorithm.c_str(),
                  format_log_value(rec.log_objectives[0]).c_str(),
                  format_log_value(rec.log_objectives[1]).c_str(),
                  format_log_value(rec.log_objectives[2]).c_str(),
                  rec.raw_objectives.f1, rec.raw_objectives.f2,
                  rec.raw_objectives.r);
    out += buf;
  }
  return out;
}

std::vector<double> mean_delay_per_intersection(const LambdaVector& lambda,
                                                const TrafficNetwork& network,
                                                const DemandProfile& profile,
                                                std::uint64_t seed,
                                                std::size_t n_e,
                                                std::size_t memory_depth) {
  MemoryBuffer memory(memory_depth);
  Matrix mem;
  for (std::size_t j = 1; j <= n_e; ++j)
    mem = memory.push(generate_volumes(network, profile, seed, j));
  const DelayResult delay = average_delay(lambda, mem, network);
  std::vector<double> out(network.size(), 0.0);
  const std::size_t hours = delay.per_intersection_hour.cols();
  for (std::size_t i = 0; i < network.size(); ++i) {
    double sum = 0.0;
    for (std::size_t t = 0; t < hours; ++t)
      sum += delay.per_intersection_hour.at(i, t);
    out[i] = sum / static_cast<double>(hours);
  }
  return out;
}

void export_heatmap(const std::vector<double>& mean_delay, std::size_t rows,
                    std::size_t cols, const std::string& path) {
  if (rows * cols != mean_delay.size())
    throw std::invalid_argument("heatmap layout does not cover the network");
  std::string out = "row,col,mean_delay_seconds\n";
  char buf[96];
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g\n", r, c,
                    mean_delay[r * cols + c]);
      out += buf;
    }
  write_file(path, out);
}

std::uint64_t derive_run_seed(std::uint64_t master, std::size_t algorithm_index,
                              std::size_t repetition) {
  return hash_keys({master, kTagRunSeed, algorithm_index, repetition});
}

std::string front_to_json(const std::string& algorithm,
                          const std::vector<Solution>& front) {
  json j;
  j["algorithm"] = algorithm;
  j["solutions"] = json::array();
  for (const auto& sol : front) {
    json s;
    s["lambda"] = sol.lambda;
    s["objectives"] = {{"f1", sol.objectives.f1},
                       {"f2", sol.objectives.f2},
                       {"r", sol.objectives.r}};
    j["solutions"].push_back(std::move(s));
  }
  return j.dump(2);
}

std::vector<Solution> front_from_json(const std::string& text,
                                      std::string* algorithm) {
  json j = json::parse(text);
  if (algorithm) *algorithm = j.at("algorithm").get<std::string>();
  std::vector<Solution> front;
  for (const auto& s : j.at("solutions")) {
    Solution sol;
    sol.lambda = s.at("lambda").get<std::vector<double>>();
    sol.objectives.f1 = s.at("objectives").at("f1").get<double>();
    sol.objectives.f2 = s.at("objectives").at("f2").get<double>();
    sol.objectives.r = s.at("objectives").at("r").get<double>();
    sol.velocity.assign(sol.lambda.size(), 0.0);
    sol.pbest_lambda = sol.lambda;
    sol.pbest_objectives = sol.objectives;
    front.push_back(std::move(sol));
  }
  return front;
}

RunManifest run_experiment(const ExperimentConfig& config) {
  config.validate();
  fs::path out_dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " +
                                   config.output_dir);

  const TrafficNetwork network = build_city(config.city);

  RunManifest manifest;
  manifest.master_seed = config.seed;
  json meta;
  meta["master_seed"] = config.seed;
  meta["city"] = config.city.label;
  meta["runs"] = json::array();

  auto add_file = [&](const fs::path& p) {
    manifest.files.push_back(p.string());
  };

  const fs::path network_path = out_dir / "network.json";
  write_file(network_path.string(), network.to_json());
  add_file(network_path);

  std::vector<std::pair<std::string, std::vector<Solution>>> all_runs;
  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    const std::string& alg = config.algorithms[ai];
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      AhmoaConfig run_cfg = config.optimizer;
      run_cfg.seed = derive_run_seed(config.seed, ai, rep);

      std::vector<Solution> front;
      std::vector<GenerationStats> history;
      if (alg == "ahmoa") {
        auto res = run_ahmoa(network, config.demand, run_cfg);
        front = std::move(res.front);
        history = std::move(res.history);
      } else if (alg == "nsga3_style") {
        auto res = run_nsga3_style(network, config.demand, run_cfg);
        front = std::move(res.front);
        history = std::move(res.history);
      } else if (alg == "nsde3") {
        auto res = run_nsde3(network, config.demand, run_cfg);
        front = std::move(res.front);
        history = std::move(res.history);
      } else {  // moead
        auto res = run_moead(network, config.demand, run_cfg);
        front = std::move(res.archive);
        history = std::move(res.history);
      }

      const fs::path run_dir =
          out_dir / (alg + "_rep" + std::to_string(rep));
      fs::create_directories(run_dir);

      auto records = solutions_to_records(alg, front);
      sort_records(records);
      const fs::path csv_path = run_dir / "front.csv";
      write_file(csv_path.string(), front_records_to_csv(records));
      add_file(csv_path);

      const fs::path json_path = run_dir / "front.json";
      write_file(json_path.string(), front_to_json(alg, front));
      add_file(json_path);

      const fs::path telemetry_path = run_dir / "telemetry.jsonl";
      write_file(telemetry_path.string(), telemetry_to_jsonl(history));
      add_file(telemetry_path);

      meta["runs"].push_back({{"algorithm", alg},
                              {"repetition", rep},
                              {"seed", run_cfg.seed},
                              {"front", json_path.string()},
                              {"front_csv", csv_path.string()},
                              {"telemetry", telemetry_path.string()}});
      all_runs.emplace_back(alg, std::move(front));
    }
  }

  const auto merged = merge_global_front(all_runs);
  const fs::path merged_path = out_dir / "global_front.csv";
  write_file(merged_path.string(), front_records_to_csv(merged));
  add_file(merged_path);

  // Heatmap layout: explicit, or the generator grid when it covers the
  // network, else a single row.
  std::size_t rows = config.city.arterial_count;
  std::size_t cols = config.city.collector_count;
  if (config.heatmap_layout) {
    rows = config.heatmap_layout->first;
    cols = config.heatmap_layout->second;
  } else if (rows * cols != network.size()) {
    rows = network.size();
    cols = 1;
  }

  const std::uint64_t heatmap_seed = hash_keys({config.seed, kTagHeatmap});
  const LambdaVector uniform_half(network.size(), 0.5);
  auto baseline_delay = mean_delay_per_intersection(
      uniform_half, network, config.demand, heatmap_seed,
      config.optimizer.n_e, config.optimizer.memory_depth);
  const fs::path baseline_path = out_dir / "heatmap_baseline.csv";
  export_heatmap(baseline_delay, rows, cols, baseline_path.string());
  add_file(baseline_path);

  for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
    const std::string& alg = config.algorithms[ai];
    const Solution* best = nullptr;
    for (const auto& [name, front] : all_runs) {
      if (name != alg) continue;
      for (const auto& sol : front)
        if (!best || sol.objectives.f1 < best->objectives.f1) best = &sol;
    }
    if (!best) continue;
    auto delay = mean_delay_per_intersection(
        best->lambda, network, config.demand, heatmap_seed,
        config.optimizer.n_e, config.optimizer.memory_depth);
    const fs::path path = out_dir / ("heatmap_" + alg + ".csv");
    export_heatmap(delay, rows, cols, path.string());
    add_file(path);
  }

  meta["files"] = manifest.files;
  const fs::path manifest_path = out_dir / "manifest.json";
  write_file(manifest_path.string(), meta.dump(2));
  manifest.manifest_path = manifest_path.string();
  return manifest;
}

}  // namespace traffic
