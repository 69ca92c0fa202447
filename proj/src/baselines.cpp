#include "traffic/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace traffic {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum : std::uint64_t {
  kTagMoeadInit = 31,
  kTagMoeadGen = 32,
};

AhmoaConfig pinned(const AhmoaConfig& cfg, Strategy s) {
  AhmoaConfig out = cfg;
  out.fixed_strategy = s;
  return out;
}

double tchebycheff(const ObjectiveVector& f, const std::array<double, 3>& w,
                   const ObjectiveVector& ideal) {
  double g = -kInf;
  for (std::size_t k = 0; k < 3; ++k) {
    const double weight = std::max(w[k], 1e-6);
    g = std::max(g, weight * std::abs(objective_component(f, k) -
                                      objective_component(ideal, k)));
  }
  return g;
}

void update_ideal(ObjectiveVector& ideal, const ObjectiveVector& f) {
  ideal.f1 = std::min(ideal.f1, f.f1);
  ideal.f2 = std::min(ideal.f2, f.f2);
  ideal.r = std::min(ideal.r, f.r);
}

// Keep only mutually non-dominated, distinct-objective solutions.
void prune_archive(std::vector<Solution>& archive) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < archive.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < archive.size() && !dominated; ++j)
      if (i != j && dominates(archive[j].objectives, archive[i].objectives))
        dominated = true;
    if (dominated) continue;
    bool duplicate = false;
    for (std::size_t j : keep)
      if (archive[j].objectives == archive[i].objectives) {
        duplicate = true;
        break;
      }
    if (!duplicate) keep.push_back(i);
  }
  std::vector<Solution> kept;
  kept.reserve(keep.size());
  for (std::size_t i : keep) kept.push_back(std::move(archive[i]));
  archive = std::move(kept);
}

}  // namespace

AhmoaResult run_nsga3_style(Evaluator& evaluator, const AhmoaConfig& cfg) {
  return run_ahmoa(evaluator, pinned(cfg, Strategy::GA));
}

AhmoaResult run_nsga3_style(const TrafficNetwork& network,
                            const DemandProfile& profile,
                            const AhmoaConfig& cfg) {
  TrafficEvaluator evaluator(network, profile, cfg);
  return run_nsga3_style(evaluator, cfg);
}

AhmoaResult run_nsde3(Evaluator& evaluator, const AhmoaConfig& cfg) {
  return run_ahmoa(evaluator, pinned(cfg, Strategy::DE));
}

AhmoaResult run_nsde3(const TrafficNetwork& network,
                      const DemandProfile& profile, const AhmoaConfig& cfg) {
  TrafficEvaluator evaluator(network, profile, cfg);
  return run_nsde3(evaluator, cfg);
}

WeightVectorSet make_weight_vectors(std::size_t requested,
                                    std::size_t neighborhood_size) {
  // Lattice with H divisions has (H+1)(H+2)/2 vectors; pick the H whose
  // size is closest to the request.
  std::size_t best_h = 1;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t h = 1; h <= 200; ++h) {
    const std::size_t count = (h + 1) * (h + 2) / 2;
    const std::size_t gap =
        count > requested ? count - requested : requested - count;
    if (gap < best_gap) {
      best_gap = gap;
      best_h = h;
    }
  }
  WeightVectorSet set;
  const double h = static_cast<double>(best_h);
  for (std::size_t a = 0; a <= best_h; ++a)
    for (std::size_t b = 0; a + b <= best_h; ++b) {
      const std::size_t c = best_h - a - b;
      set.vectors.push_back({static_cast<double>(a) / h,
                             static_cast<double>(b) / h,
                             static_cast<double>(c) / h});
    }

  const std::size_t n = set.vectors.size();
  set.neighborhood_size = std::min(std::max<std::size_t>(neighborhood_size, 2), n);
  set.neighborhoods.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      double dx = 0.0, dy = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double ex = set.vectors[i][k] - set.vectors[x][k];
        const double ey = set.vectors[i][k] - set.vectors[y][k];
        dx += ex * ex;
        dy += ey * ey;
      }
      return dx < dy || (dx == dy && x < y);
    });
    set.neighborhoods[i].assign(order.begin(),
                                order.begin() + set.neighborhood_size);
  }
  return set;
}

MoeadResult run_moead(Evaluator& evaluator, const AhmoaConfig& cfg) {
  cfg.validate();
  const std::size_t dim = evaluator.dimension();
  const std::size_t hood =
      std::max<std::size_t>(2, cfg.population_size / 10);
  WeightVectorSet weights = make_weight_vectors(cfg.population_size, hood);
  const std::size_t n_sub = weights.vectors.size();

  RngStream init_rng(hash_keys({cfg.seed, kTagMoeadInit}));
  std::vector<Solution> population(n_sub);
  for (auto& sol : population) {
    sol.lambda.resize(dim);
    for (double& g : sol.lambda) g = init_rng.uniform(kLambdaMin, kLambdaMax);
    sol.velocity.assign(dim, 0.0);
  }

  evaluator.begin_generation(0);
  ObjectiveVector ideal{kInf, kInf, kInf};
  for (auto& sol : population) {
    sol.objectives = evaluator.evaluate(sol.lambda);
    sol.pbest_lambda = sol.lambda;
    sol.pbest_objectives = sol.objectives;
    update_ideal(ideal, sol.objectives);
  }

  MoeadResult result;
  result.subproblem_count = n_sub;
  std::vector<Solution> archive = population;

  for (std::size_t gen = 0; gen < cfg.max_generations; ++gen) {
    if (gen > 0) {
      evaluator.begin_generation(gen);
      ideal = {kInf, kInf, kInf};
      for (auto& sol : population) {
        sol.objectives = evaluator.evaluate(sol.lambda);
        update_ideal(ideal, sol.objectives);
      }
    }
    RngStream gen_rng(hash_keys({cfg.seed, kTagMoeadGen, gen}));
    for (std::size_t i = 0; i < n_sub; ++i) {
      const auto& hood_i = weights.neighborhoods[i];
      const std::size_t a = hood_i[gen_rng.next_index(hood_i.size())];
      const std::size_t b = hood_i[gen_rng.next_index(hood_i.size())];
      Solution child;
      child.lambda = ga_offspring(population[a].lambda, population[b].lambda,
                                  cfg, gen_rng);
      child.velocity.assign(dim, 0.0);
      child.objectives = evaluator.evaluate(child.lambda);
      child.pbest_lambda = child.lambda;
      child.pbest_objectives = child.objectives;
      update_ideal(ideal, child.objectives);
      for (std::size_t j : hood_i) {
        if (tchebycheff(child.objectives, weights.vectors[j], ideal) <=
            tchebycheff(population[j].objectives, weights.vectors[j], ideal))
          population[j] = child;
      }
      archive.push_back(child);
    }
    prune_archive(archive);

    GenerationStats stats;
    stats.generation = gen;
    stats.front_size = archive.size();
    stats.best_f1 = kInf;
    stats.best_f2 = kInf;
    stats.best_r = kInf;
    for (const auto& sol : archive) {
      stats.best_f1 = std::min(stats.best_f1, sol.objectives.f1);
      stats.best_f2 = std::min(stats.best_f2, sol.objectives.f2);
      stats.best_r = std::min(stats.best_r, sol.objectives.r);
    }
    result.history.push_back(stats);
  }

  prune_archive(archive);
  result.archive = std::move(archive);
  return result;
}

MoeadResult run_moead(const TrafficNetwork& network,
                      const DemandProfile& profile, const AhmoaConfig& cfg) {
  TrafficEvaluator evaluator(network, profile, cfg);
  return run_moead(evaluator, cfg);
}

}  // namespace traffic
