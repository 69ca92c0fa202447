#include "traffic/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace traffic {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum : std::uint64_t {
  kTagInit = 21,
  kTagGeneration = 22,
  kTagEval = 23,
};

double clamp_lambda(double v) {
  return std::clamp(v, kLambdaMin, kLambdaMax);
}

double sbx_gene(double a, double b, double eta, RngStream& rng) {
  if (rng.next_unit() >= 0.5) return a;  // gene-wise crossover probability
  if (std::abs(a - b) < 1e-14) return a;
  const double u = rng.next_unit();
  double beta;
  if (u <= 0.5)
    beta = std::pow(2.0 * u, 1.0 / (eta + 1.0));
  else
    beta = std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
  const double c1 = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b);
  const double c2 = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b);
  return rng.next_unit() < 0.5 ? c1 : c2;
}

double polynomial_mutation_gene(double x, double eta, RngStream& rng) {
  const double lo = kLambdaMin, hi = kLambdaMax;
  const double u = rng.next_unit();
  double delta;
  if (u < 0.5) {
    const double d1 = (x - lo) / (hi - lo);
    delta = std::pow(2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0),
                     1.0 / (eta + 1.0)) -
            1.0;
  } else {
    const double d2 = (hi - x) / (hi - lo);
    delta = 1.0 - std::pow(2.0 * (1.0 - u) +
                               2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0),
                           1.0 / (eta + 1.0));
  }
  return clamp_lambda(x + delta * (hi - lo));
}

}  // namespace

void AhmoaConfig::validate() const {
  if (population_size < 4)
    throw std::invalid_argument("population size must be >= 4 (DE donors)");
  if (n_e == 0) throw std::invalid_argument("n_e must be >= 1");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("alpha must be in [0, 1]");
  if (p_floor < 0.0 || p_floor * kStrategyCount >= 1.0)
    throw std::invalid_argument("p_floor too large");
  if (memory_depth == 0) throw std::invalid_argument("memory depth must be >= 1");
  if (pso_vmax <= 0.0) throw std::invalid_argument("v_max must be positive");
}

void StrategyState::update_probabilities() {
  std::array<double, kStrategyCount> rate{};
  const std::size_t grand =
      std::accumulate(totals.begin(), totals.end(), std::size_t{0});
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    if (denominator == SuccessDenominator::PerStrategy)
      rate[s] = totals[s] ? static_cast<double>(successes[s]) /
                                static_cast<double>(totals[s])
                          : 0.0;
    else
      rate[s] = grand ? static_cast<double>(successes[s]) /
                            static_cast<double>(grand)
                      : 0.0;
  }
  for (std::size_t s = 0; s < kStrategyCount; ++s)
    probabilities[s] = (1.0 - alpha) * probabilities[s] + alpha * rate[s];

  // Renormalize to sum 1 while keeping every probability at or above the
  // floor. Pinning a component at the floor can push others below it, so
  // iterate; four components converge in at most four rounds.
  double sum = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  for (double& p : probabilities) p /= sum;
  for (std::size_t round = 0; round < kStrategyCount; ++round) {
    std::array<bool, kStrategyCount> pinned{};
    std::size_t pinned_count = 0;
    double free_mass = 0.0;
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
      if (probabilities[s] <= p_floor) {
        pinned[s] = true;
        ++pinned_count;
      } else {
        free_mass += probabilities[s];
      }
    }
    if (pinned_count == 0) break;
    const double target =
        1.0 - p_floor * static_cast<double>(pinned_count);
    bool stable = true;
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
      if (pinned[s]) {
        probabilities[s] = p_floor;
      } else {
        probabilities[s] *= target / free_mass;
        if (probabilities[s] < p_floor) stable = false;
      }
    }
    if (stable) break;
  }
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  bool strictly_better = false;
  for (std::size_t k = 0; k < 3; ++k) {
    const double av = objective_component(a, k);
    const double bv = objective_component(b, k);
    if (av > bv) return false;
    if (av < bv) strictly_better = true;
  }
  return strictly_better;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(
    const std::vector<Solution>& population) {
  const std::size_t n = population.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> domination_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;

  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(population[i].objectives, population[j].objectives))
        dominated[i].push_back(j);
      else if (dominates(population[j].objectives, population[i].objectives))
        ++domination_count[i];
    }
    if (domination_count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j : dominated[i])
        if (--domination_count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Solution>& population,
                                      const std::vector<std::size_t>& front) {
  if (front.empty()) throw std::invalid_argument("empty front");
  const std::size_t m = front.size();
  std::vector<double> distance(m, 0.0);
  if (m <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < 3; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) {
                       return objective_component(
                                  population[front[x]].objectives, k) <
                              objective_component(
                                  population[front[y]].objectives, k);
                     });
    const double lo =
        objective_component(population[front[order.front()]].objectives, k);
    const double hi =
        objective_component(population[front[order.back()]].objectives, k);
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    if (hi - lo <= 0.0) continue;
    for (std::size_t pos = 1; pos + 1 < m; ++pos) {
      const double prev =
          objective_component(population[front[order[pos - 1]]].objectives, k);
      const double next =
          objective_component(population[front[order[pos + 1]]].objectives, k);
      if (distance[order[pos]] != kInf)
        distance[order[pos]] += (next - prev) / (hi - lo);
    }
  }
  return distance;
}

Strategy select_strategy(const StrategyState& state, RngStream& rng) {
  const double u = rng.next_unit();
  double cumulative = 0.0;
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    cumulative += state.probabilities[s];
    if (u < cumulative) return static_cast<Strategy>(s);
  }
  return Strategy::LS;
}

LambdaVector ga_offspring(const LambdaVector& parent_a,
                          const LambdaVector& parent_b,
                          const AhmoaConfig& cfg, RngStream& rng) {
  const std::size_t n = parent_a.size();
  if (parent_b.size() != n)
    throw std::invalid_argument("parent length mismatch");
  const double mutation_prob =
      cfg.mutation_prob >= 0.0 ? cfg.mutation_prob
                               : 1.0 / static_cast<double>(n);
  LambdaVector child(n);
  for (std::size_t j = 0; j < n; ++j) {
    double g = sbx_gene(parent_a[j], parent_b[j], cfg.sbx_eta, rng);
    g = clamp_lambda(g);
    if (rng.next_unit() < mutation_prob)
      g = polynomial_mutation_gene(g, cfg.mutation_eta, rng);
    child[j] = g;
  }
  return child;
}

LambdaVector de_offspring(std::size_t parent_index,
                          const std::vector<Solution>& population,
                          const AhmoaConfig& cfg, RngStream& rng) {
  const std::size_t pop = population.size();
  if (pop < 4)
    throw std::invalid_argument("DE needs a population of at least 4");
  std::size_t r1, r2, r3;
  do { r1 = rng.next_index(pop); } while (r1 == parent_index);
  do { r2 = rng.next_index(pop); } while (r2 == parent_index || r2 == r1);
  do {
    r3 = rng.next_index(pop);
  } while (r3 == parent_index || r3 == r1 || r3 == r2);

  const LambdaVector& parent = population[parent_index].lambda;
  const std::size_t n = parent.size();
  const std::size_t j_rand = rng.next_index(n);
  LambdaVector trial(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == j_rand || rng.next_unit() < cfg.de_crossover) {
      const double v = population[r1].lambda[j] +
                       cfg.de_weight * (population[r2].lambda[j] -
                                        population[r3].lambda[j]);
      trial[j] = clamp_lambda(v);
    } else {
      trial[j] = parent[j];
    }
  }
  return trial;
}

PsoResult pso_offspring(const Solution& particle,
                        const LambdaVector& global_best,
                        const AhmoaConfig& cfg, RngStream& rng) {
  const std::size_t n = particle.lambda.size();
  PsoResult out;
  out.position.resize(n);
  out.velocity.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r1 = rng.next_unit();
    const double r2 = rng.next_unit();
    double v = cfg.pso_inertia * particle.velocity[j] +
               cfg.pso_cognitive * r1 *
                   (particle.pbest_lambda[j] - particle.lambda[j]) +
               cfg.pso_social * r2 * (global_best[j] - particle.lambda[j]);
    v = std::clamp(v, -cfg.pso_vmax, cfg.pso_vmax);
    out.velocity[j] = v;
    out.position[j] = clamp_lambda(particle.lambda[j] + v);
  }
  return out;
}

LambdaVector local_search_offspring(const LambdaVector& parent,
                                    const AhmoaConfig& cfg, RngStream& rng) {
  LambdaVector child(parent.size());
  for (std::size_t j = 0; j < parent.size(); ++j)
    child[j] = clamp_lambda(parent[j] +
                            rng.uniform(-cfg.ls_radius, cfg.ls_radius));
  return child;
}

std::vector<Solution> generate_offspring(std::vector<Solution>& population,
                                         StrategyState& state,
                                         const AhmoaConfig& cfg,
                                         Evaluator& evaluator,
                                         RngStream& rng) {
  state.reset_counters();
  const auto fronts = non_dominated_sort(population);
  const auto& first_front = fronts.front();
  std::vector<std::size_t> rank_of(population.size());
  for (std::size_t f = 0; f < fronts.size(); ++f)
    for (std::size_t idx : fronts[f]) rank_of[idx] = f;
  // binary tournament on rank for the SBX mate
  auto tournament = [&](std::size_t exclude) {
    std::size_t a, b;
    do { a = rng.next_index(population.size()); } while (a == exclude);
    do { b = rng.next_index(population.size()); } while (b == exclude);
    return rank_of[b] < rank_of[a] ? b : a;
  };

  std::vector<Solution> offspring;
  offspring.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    const Solution& parent = population[i];
    const Strategy s = cfg.fixed_strategy ? *cfg.fixed_strategy
                                          : select_strategy(state, rng);
    Solution child;
    child.velocity.assign(parent.lambda.size(), 0.0);
    switch (s) {
      case Strategy::GA: {
        const std::size_t mate = tournament(i);
        child.lambda =
            ga_offspring(parent.lambda, population[mate].lambda, cfg, rng);
        break;
      }
      case Strategy::DE:
        child.lambda = de_offspring(i, population, cfg, rng);
        break;
      case Strategy::PSO: {
        const std::size_t pick = rng.next_index(first_front.size());
        PsoResult res =
            pso_offspring(parent, population[first_front[pick]].lambda, cfg, rng);
        child.lambda = std::move(res.position);
        child.velocity = std::move(res.velocity);
        break;
      }
      case Strategy::LS:
        child.lambda = local_search_offspring(parent.lambda, cfg, rng);
        break;
    }
    child.objectives = evaluator.evaluate(child.lambda);

    if (dominates(child.objectives, parent.pbest_objectives)) {
      child.pbest_lambda = child.lambda;
      child.pbest_objectives = child.objectives;
    } else {
      child.pbest_lambda = parent.pbest_lambda;
      child.pbest_objectives = parent.pbest_objectives;
    }

    ++state.totals[static_cast<std::size_t>(s)];
    if (dominates(child.objectives, parent.objectives))
      ++state.successes[static_cast<std::size_t>(s)];
    offspring.push_back(std::move(child));
  }
  if (!cfg.fixed_strategy) state.update_probabilities();
  return offspring;
}

std::vector<Solution> environmental_selection(
    const std::vector<Solution>& parents,
    const std::vector<Solution>& offspring, std::size_t target_size) {
  std::vector<Solution> combined;
  combined.reserve(parents.size() + offspring.size());
  combined.insert(combined.end(), parents.begin(), parents.end());
  combined.insert(combined.end(), offspring.begin(), offspring.end());
  if (target_size > combined.size())
    throw std::invalid_argument("target size exceeds combined population");

  const auto fronts = non_dominated_sort(combined);
  std::vector<Solution> next;
  next.reserve(target_size);
  for (std::size_t f = 0; f < fronts.size() && next.size() < target_size; ++f) {
    const auto& front = fronts[f];
    const auto distance = crowding_distance(combined, front);
    if (next.size() + front.size() <= target_size) {
      for (std::size_t pos = 0; pos < front.size(); ++pos) {
        Solution s = combined[front[pos]];
        s.rank = f;
        s.crowding = distance[pos];
        next.push_back(std::move(s));
      }
    } else {
      std::vector<std::size_t> order(front.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) {
                         return distance[x] > distance[y];
                       });
      const std::size_t need = target_size - next.size();
      for (std::size_t pos = 0; pos < need; ++pos) {
        Solution s = combined[front[order[pos]]];
        s.rank = f;
        s.crowding = distance[order[pos]];
        next.push_back(std::move(s));
      }
    }
  }
  return next;
}

TrafficEvaluator::TrafficEvaluator(const TrafficNetwork& network,
                                   const DemandProfile& profile,
                                   const AhmoaConfig& cfg)
    : network_(&network),
      profile_(profile),
      n_e_(cfg.n_e),
      seed_(cfg.seed),
      robustness_mode_(cfg.robustness_mode),
      memory_(cfg.memory_depth) {}

void TrafficEvaluator::begin_generation(std::size_t generation) {
  snapshot_.clear();
  const std::uint64_t eval_seed = hash_keys({seed_, kTagEval, generation});
  for (std::size_t j = 1; j <= n_e_; ++j)
    snapshot_.push_back(
        memory_.push(generate_volumes(*network_, profile_, eval_seed, j)));
}

ObjectiveVector TrafficEvaluator::evaluate(const LambdaVector& lambda) {
  return evaluate_against_memories(lambda, *network_, snapshot_,
                                   robustness_mode_);
}

AhmoaResult run_ahmoa(Evaluator& evaluator, const AhmoaConfig& cfg) {
  cfg.validate();
  const std::size_t dim = evaluator.dimension();

  RngStream init_rng(hash_keys({cfg.seed, kTagInit}));
  std::vector<Solution> population(cfg.population_size);
  for (auto& sol : population) {
    sol.lambda.resize(dim);
    for (double& g : sol.lambda) g = init_rng.uniform(kLambdaMin, kLambdaMax);
    sol.velocity.assign(dim, 0.0);
  }

  StrategyState state;
  state.alpha = cfg.alpha;
  state.p_floor = cfg.p_floor;
  state.denominator = cfg.denominator;

  evaluator.begin_generation(0);
  for (auto& sol : population) {
    sol.objectives = evaluator.evaluate(sol.lambda);
    sol.pbest_lambda = sol.lambda;
    sol.pbest_objectives = sol.objectives;
  }

  AhmoaResult result;
  for (std::size_t gen = 0; gen < cfg.max_generations; ++gen) {
    if (gen > 0) {
      evaluator.begin_generation(gen);
      for (auto& sol : population) {
        sol.objectives = evaluator.evaluate(sol.lambda);
        // refresh stale personal bests under the new snapshot
        if (dominates(sol.objectives, sol.pbest_objectives)) {
          sol.pbest_lambda = sol.lambda;
          sol.pbest_objectives = sol.objectives;
        }
      }
    }
    RngStream gen_rng(hash_keys({cfg.seed, kTagGeneration, gen}));
    auto offspring =
        generate_offspring(population, state, cfg, evaluator, gen_rng);
    population = environmental_selection(population, offspring,
                                         cfg.population_size);

    GenerationStats stats;
    stats.generation = gen;
    stats.probabilities = state.probabilities;
    stats.best_f1 = kInf;
    stats.best_f2 = kInf;
    stats.best_r = kInf;
    for (const auto& sol : population) {
      if (sol.rank == 0) {
        ++stats.front_size;
        stats.best_f1 = std::min(stats.best_f1, sol.objectives.f1);
        stats.best_f2 = std::min(stats.best_f2, sol.objectives.f2);
        stats.best_r = std::min(stats.best_r, sol.objectives.r);
      }
    }
    result.history.push_back(stats);
  }

  const auto fronts = non_dominated_sort(population);
  for (std::size_t idx : fronts.front()) {
    Solution s = population[idx];
    s.rank = 0;
    result.front.push_back(std::move(s));
  }
  return result;
}

AhmoaResult run_ahmoa(const TrafficNetwork& network,
                      const DemandProfile& profile, const AhmoaConfig& cfg) {
  TrafficEvaluator evaluator(network, profile, cfg);
  return run_ahmoa(evaluator, cfg);
}

}  // namespace traffic
