#ifndef TRAFFIC_BASELINES_HPP
#define TRAFFIC_BASELINES_HPP

#include "traffic/moea.hpp"

namespace traffic {

// NSGA-III-style comparator: the AHMOA loop with the strategy pinned to GA
// and no probability adaptation. Crowding-distance truncation stands in for
// reference-point niching.
AhmoaResult run_nsga3_style(Evaluator& evaluator, const AhmoaConfig& cfg);
AhmoaResult run_nsga3_style(const TrafficNetwork& network,
                            const DemandProfile& profile,
                            const AhmoaConfig& cfg);

// NSDE3: same loop with DE variation pinned.
AhmoaResult run_nsde3(Evaluator& evaluator, const AhmoaConfig& cfg);
AhmoaResult run_nsde3(const TrafficNetwork& network,
                      const DemandProfile& profile, const AhmoaConfig& cfg);

// Simplex-lattice weight vectors for three objectives, each summing to 1.
struct WeightVectorSet {
  std::vector<std::array<double, 3>> vectors;
  std::size_t neighborhood_size = 0;
  std::vector<std::vector<std::size_t>> neighborhoods;
};

// Lattice whose size is nearest to the requested count.
WeightVectorSet make_weight_vectors(std::size_t requested,
                                    std::size_t neighborhood_size);

struct MoeadResult {
  std::vector<Solution> archive;  // external non-dominated archive
  std::vector<GenerationStats> history;
  std::size_t subproblem_count = 0;
};

// MOEA/D with Tchebycheff decomposition and GA variation within
// neighborhoods.
MoeadResult run_moead(Evaluator& evaluator, const AhmoaConfig& cfg);
MoeadResult run_moead(const TrafficNetwork& network,
                      const DemandProfile& profile, const AhmoaConfig& cfg);

}  // namespace traffic

#endif
