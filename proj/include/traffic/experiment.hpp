#ifndef TRAFFIC_EXPERIMENT_HPP
#define TRAFFIC_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "traffic/baselines.hpp"
#include "traffic/moea.hpp"

namespace traffic {

enum class CityArchetype { Grid, RadialConcentric, IrregularMesh };

struct CityConfig {
  CityArchetype archetype = CityArchetype::Grid;
  std::size_t arterial_count = 10;   // avenues / radials / arterials
  std::size_t collector_count = 10;  // streets / rings / collectors
  std::uint64_t seed = 1;
  std::vector<HourWindow> peak_windows = {{7.0, 9.0}, {17.0, 19.0}};
  double peak_uplift = 0.0;
  std::string label = "custom";

  void validate() const;
};

// Shipped presets: manhattan, istanbul, paris, sao_paulo.
CityConfig city_preset(const std::string& name, std::uint64_t seed);

TrafficNetwork build_city(const CityConfig& cfg);
DemandProfile demand_for_city(const CityConfig& cfg);

struct ExperimentConfig {
  CityConfig city;
  DemandProfile demand;
  std::vector<std::string> algorithms = {"ahmoa"};
  AhmoaConfig optimizer;
  std::size_t repetitions = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::optional<std::pair<std::size_t, std::size_t>> heatmap_layout;

  void validate() const;
  // Unknown keys anywhere in the document are rejected.
  static ExperimentConfig from_json(const std::string& text);
};

struct FrontRecord {
  std::string algorithm;
  std::array<double, 3> log_objectives{};  // -inf sentinel for raw 0
  ObjectiveVector raw_objectives;
  LambdaVector lambda;
};

// Natural log rounded half-even to 4 decimals; 0 maps to -infinity.
double log_round4(double raw);
std::array<double, 3> log_transform(const ObjectiveVector& raw);
std::string format_log_value(double v);  // "-Inf" sentinel formatting

// Pools fronts from several runs, keeps the non-dominated subset (raw
// objectives), deduplicates records identical after 4-decimal log
// rounding, and sorts by the first log objective.
std::vector<FrontRecord> merge_global_front(
    const std::vector<std::pair<std::string, std::vector<Solution>>>& runs);

std::string front_records_to_csv(const std::vector<FrontRecord>& records);

// 24-hour mean delay per intersection under the given signal setting,
// evaluated against the memory matrix after n_e demand draws.
std::vector<double> mean_delay_per_intersection(const LambdaVector& lambda,
                                                const TrafficNetwork& network,
                                                const DemandProfile& profile,
                                                std::uint64_t seed,
                                                std::size_t n_e,
                                                std::size_t memory_depth);

// Writes `row,col,mean_delay_seconds` CSV; rows*cols must equal the number
// of intersections (row-major mapping).
void export_heatmap(const std::vector<double>& mean_delay, std::size_t rows,
                    std::size_t cols, const std::string& path);

struct RunManifest {
  std::uint64_t master_seed = 0;
  std::vector<std::string> files;
  std::string manifest_path;
};

std::uint64_t derive_run_seed(std::uint64_t master, std::size_t algorithm_index,
                              std::size_t repetition);

RunManifest run_experiment(const ExperimentConfig& config);

// Per-run front files round-trip through JSON.
std::string front_to_json(const std::string& algorithm,
                          const std::vector<Solution>& front);
std::vector<Solution> front_from_json(const std::string& text,
                                      std::string* algorithm = nullptr);

}  // namespace traffic

#endif
