#ifndef TRAFFIC_MOEA_HPP
#define TRAFFIC_MOEA_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "traffic/objectives.hpp"
#include "traffic/rng.hpp"

namespace traffic {

enum class Strategy : int { GA = 0, DE = 1, PSO = 2, LS = 3 };
inline constexpr std::size_t kStrategyCount = 4;

struct Solution {
  LambdaVector lambda;
  ObjectiveVector objectives;
  std::size_t rank = 0;
  double crowding = 0.0;
  std::vector<double> velocity;  // PSO state
  LambdaVector pbest_lambda;
  ObjectiveVector pbest_objectives;
};

// Denominator used for per-strategy success rates. The per-strategy variant
// divides successes by attempts of that strategy; the grand-total variant
// divides by all offspring generated this generation.
enum class SuccessDenominator { PerStrategy, GrandTotal };

struct StrategyState {
  std::array<double, kStrategyCount> probabilities = {0.25, 0.25, 0.25, 0.25};
  std::array<std::size_t, kStrategyCount> successes = {0, 0, 0, 0};
  std::array<std::size_t, kStrategyCount> totals = {0, 0, 0, 0};
  double alpha = 0.3;
  double p_floor = 0.02;
  SuccessDenominator denominator = SuccessDenominator::PerStrategy;

  void reset_counters() { successes = {0, 0, 0, 0}; totals = {0, 0, 0, 0}; }

  // Exponential smoothing toward observed success rates, floored and
  // renormalized to sum 1.
  void update_probabilities();
};

struct AhmoaConfig {
  std::size_t population_size = 120;
  std::size_t max_generations = 50;
  std::size_t n_e = 5;
  double alpha = 0.3;
  double p_floor = 0.02;
  SuccessDenominator denominator = SuccessDenominator::PerStrategy;
  // operator parameters
  double sbx_eta = 15.0;
  double mutation_eta = 20.0;
  double mutation_prob = -1.0;  // < 0 means 1/dimension
  double de_weight = 0.5;       // F
  double de_crossover = 0.9;    // CR
  double pso_inertia = 0.7;
  double pso_cognitive = 1.5;
  double pso_social = 1.5;
  double pso_vmax = 0.2;
  double ls_radius = 0.02;
  std::size_t memory_depth = 5;
  std::uint64_t seed = 1;
  RobustnessMode robustness_mode = RobustnessMode::MeanTableThenScore;
  // Pin every parent to one strategy and skip probability adaptation
  // (used by the baseline optimizers).
  std::optional<Strategy> fixed_strategy;

  void validate() const;
};

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

std::vector<std::vector<std::size_t>> non_dominated_sort(
    const std::vector<Solution>& population);

std::vector<double> crowding_distance(const std::vector<Solution>& population,
                                      const std::vector<std::size_t>& front);

Strategy select_strategy(const StrategyState& state, RngStream& rng);

LambdaVector ga_offspring(const LambdaVector& parent_a,
                          const LambdaVector& parent_b,
                          const AhmoaConfig& cfg, RngStream& rng);

LambdaVector de_offspring(std::size_t parent_index,
                          const std::vector<Solution>& population,
                          const AhmoaConfig& cfg, RngStream& rng);

struct PsoResult {
  LambdaVector position;
  std::vector<double> velocity;
};

PsoResult pso_offspring(const Solution& particle,
                        const LambdaVector& global_best,
                        const AhmoaConfig& cfg, RngStream& rng);

LambdaVector local_search_offspring(const LambdaVector& parent,
                                    const AhmoaConfig& cfg, RngStream& rng);

// Objective evaluation interface the optimizer loop drives. The traffic
// pipeline implements it with a per-generation memory snapshot; tests plug
// in synthetic functions.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  // Called once per generation before any evaluation of that generation.
  virtual void begin_generation(std::size_t generation) { (void)generation; }
  virtual ObjectiveVector evaluate(const LambdaVector& lambda) = 0;
  virtual std::size_t dimension() const = 0;
};

// Traffic evaluator: every solution of a generation is scored against the
// same memory snapshot; the buffer advances once per generation.
class TrafficEvaluator final : public Evaluator {
 public:
  TrafficEvaluator(const TrafficNetwork& network, const DemandProfile& profile,
                   const AhmoaConfig& cfg);

  void begin_generation(std::size_t generation) override;
  ObjectiveVector evaluate(const LambdaVector& lambda) override;
  std::size_t dimension() const override { return network_->size(); }

 private:
  const TrafficNetwork* network_;
  DemandProfile profile_;
  std::size_t n_e_;
  std::uint64_t seed_;
  RobustnessMode robustness_mode_;
  MemoryBuffer memory_;
  std::vector<Matrix> snapshot_;  // averaged memory matrix per draw
};

struct GenerationStats {
  std::size_t generation = 0;
  std::array<double, kStrategyCount> probabilities{};
  std::size_t front_size = 0;
  double best_f1 = 0.0;
  double best_f2 = 0.0;
  double best_r = 0.0;
};

struct AhmoaResult {
  std::vector<Solution> front;  // final first front, mutually non-dominated
  std::vector<GenerationStats> history;
};

std::vector<Solution> generate_offspring(std::vector<Solution>& population,
                                         StrategyState& state,
                                         const AhmoaConfig& cfg,
                                         Evaluator& evaluator, RngStream& rng);

std::vector<Solution> environmental_selection(
    const std::vector<Solution>& parents,
    const std::vector<Solution>& offspring, std::size_t target_size);

AhmoaResult run_ahmoa(Evaluator& evaluator, const AhmoaConfig& cfg);

AhmoaResult run_ahmoa(const TrafficNetwork& network,
                      const DemandProfile& profile, const AhmoaConfig& cfg);

}  // namespace traffic

#endif
