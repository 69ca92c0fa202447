#ifndef TRAFFIC_OBJECTIVES_HPP
#define TRAFFIC_OBJECTIVES_HPP

#include <cstdint>
#include <deque>
#include <vector>

#include "traffic/demand.hpp"
#include "traffic/matrix.hpp"
#include "traffic/network.hpp"

namespace traffic {

inline constexpr double kLambdaMin = 0.05;
inline constexpr double kLambdaMax = 0.95;
inline constexpr double kSaturationCap = 0.99;  // cap on x = volume/capacity

using LambdaVector = std::vector<double>;  // red light ratio per intersection

struct ObjectiveVector {
  double f1 = 0.0;  // average delay, seconds
  double f2 = 0.0;  // stability penalty, lower = more stable
  double r = 0.0;   // robustness score

  bool operator==(const ObjectiveVector&) const = default;
};

// Ring buffer of the last H volume fields; average() is the memory matrix
// substituted for raw volumes in the objectives.
class MemoryBuffer {
 public:
  explicit MemoryBuffer(std::size_t depth);

  // Pushes a field (evicting the oldest when full) and returns the
  // element-wise mean over the currently stored fields.
  Matrix push(const VolumeField& field);
  Matrix average() const;

  std::size_t stored() const { return history_.size(); }
  std::size_t depth() const { return depth_; }
  bool empty() const { return history_.empty(); }

 private:
  std::size_t depth_;
  std::deque<Matrix> history_;
};

// Modified Webster delay at one intersection for one hour, seconds.
double webster_delay(double cycle, double lambda, double volume,
                     double saturation);

struct DelayResult {
  double f1 = 0.0;                // mean over hours of the per-hour sums
  std::vector<double> per_hour;   // sum over intersections of delay at hour t
  Matrix per_intersection_hour;   // full delay matrix, feeds heatmaps
};

DelayResult average_delay(const LambdaVector& lambda, const Matrix& memory,
                          const TrafficNetwork& network);

struct StabilityResult {
  double f2 = 0.0;
  std::vector<double> per_hour;
};

StabilityResult network_stability(const LambdaVector& lambda,
                                  const Matrix& memory,
                                  const TrafficNetwork& network);

// Per-hour values of each objective; rows are objectives, columns hours.
using HourlyObjectiveTable = Matrix;

// Mean across objectives of the sample standard deviation over hours.
double robustness(const HourlyObjectiveTable& table);

enum class RobustnessMode {
  MeanTableThenScore,  // average hourly tables over draws, then score
  MeanOfPerDrawScores,
};

struct EvalOptions {
  RobustnessMode robustness_mode = RobustnessMode::MeanTableThenScore;
};

// Full evaluation: n_e volume draws pushed through the memory buffer,
// objective means over draws, robustness from the hourly tables.
ObjectiveVector evaluate_solution(const LambdaVector& lambda,
                                  const TrafficNetwork& network,
                                  const DemandProfile& profile,
                                  std::uint64_t seed, std::size_t n_e,
                                  MemoryBuffer& memory,
                                  const EvalOptions& opts = {});

// Scores a solution against an already-materialized sequence of memory
// matrices (one per draw). evaluate_solution and the optimizer's
// per-generation snapshot both route through this.
ObjectiveVector evaluate_against_memories(const LambdaVector& lambda,
                                          const TrafficNetwork& network,
                                          const std::vector<Matrix>& memories,
                                          RobustnessMode mode);

double objective_component(const ObjectiveVector& v, std::size_t k);

}  // namespace traffic

#endif
