#include "traffic/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace traffic {

MemoryBuffer::MemoryBuffer(std::size_t depth) : depth_(depth) {
  if (depth == 0) throw std::invalid_argument("memory depth must be >= 1");
}

Matrix MemoryBuffer::push(const VolumeField& field) {
  if (!history_.empty() && !history_.front().same_shape(field.values))
    throw std::invalid_argument("volume field shape mismatch in memory buffer");
  history_.push_back(field.values);
  if (history_.size() > depth_) history_.pop_front();
  return average();
}

Matrix MemoryBuffer::average() const {
  if (history_.empty()) throw std::logic_error("memory buffer is empty");
  Matrix mean(history_.front().rows(), history_.front().cols());
  for (const auto& m : history_)
    for (std::size_t k = 0; k < mean.data().size(); ++k)
      mean.data()[k] += m.data()[k];
  const double inv = 1.0 / static_cast<double>(history_.size());
  for (double& v : mean.data()) v *= inv;
  return mean;
}

double webster_delay(double cycle, double lambda, double volume,
                     double saturation) {
  if (cycle <= 0.0) throw std::invalid_argument("cycle length must be positive");
  if (saturation <= 0.0)
    throw std::invalid_argument("saturation must be positive");
  const double x = std::min(volume / saturation, kSaturationCap);
  const double green = (1.0 - lambda) * cycle;
  const double uniform_term =
      cycle * (1.0 - green / cycle) * (1.0 - green / cycle) /
      (2.0 * (1.0 - lambda * x));
  // Random/overflow term wants saturation in vehicles per second so the
  // result stays in seconds.
  const double sat_per_sec = saturation / 3600.0;
  const double random_term = x * x / (2.0 * sat_per_sec * (1.0 - x));
  return uniform_term + random_term;
}

DelayResult average_delay(const LambdaVector& lambda, const Matrix& memory,
                          const TrafficNetwork& network) {
  const std::size_t n = network.size();
  const std::size_t hours = memory.cols();
  memory.require_shape(n, hours);
  if (lambda.size() != n)
    throw std::invalid_argument("lambda length does not match network size");

  DelayResult result;
  result.per_hour.assign(hours, 0.0);
  result.per_intersection_hour = Matrix(n, hours);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& spec = network.intersection(i);
    for (std::size_t t = 0; t < hours; ++t) {
      const double sat = effective_saturation(
          spec.base_saturation, static_cast<double>(t),
          static_cast<double>(hours));
      const double d =
          webster_delay(spec.cycle_length, lambda[i], memory.at(i, t), sat);
      result.per_intersection_hour.at(i, t) = d;
      result.per_hour[t] += d;
    }
  }
  double total = 0.0;
  for (double v : result.per_hour) total += v;
  result.f1 = total / static_cast<double>(hours);
  return result;
}

StabilityResult network_stability(const LambdaVector& lambda,
                                  const Matrix& memory,
                                  const TrafficNetwork& network) {
  const std::size_t n = network.size();
  const std::size_t hours = memory.cols();
  memory.require_shape(n, hours);
  if (lambda.size() != n)
    throw std::invalid_argument("lambda length does not match network size");

  StabilityResult result;
  result.per_hour.assign(hours, 0.0);
  for (const auto& [i, j] : network.edges()) {
    const double lambda_gap = 1.0 + std::abs(lambda[i] - lambda[j]);
    // Symmetric endpoint weighting keeps f2 invariant under relabeling.
    const double weight = 0.5 * (network.intersection(i).type_weight +
                                 network.intersection(j).type_weight);
    for (std::size_t t = 0; t < hours; ++t) {
      const std::size_t next = (t + 1) % hours;  // daily wrap
      const double spatial = std::abs(memory.at(i, t) - memory.at(j, t));
      const double temporal =
          0.5 * (std::abs(memory.at(i, t) - memory.at(i, next)) +
                 std::abs(memory.at(j, t) - memory.at(j, next)));
      result.per_hour[t] += (spatial + temporal) * lambda_gap * weight;
    }
  }
  for (double v : result.per_hour) result.f2 += v;
  return result;
}

double robustness(const HourlyObjectiveTable& table) {
  const std::size_t objectives = table.rows();
  const std::size_t hours = table.cols();
  if (hours < 2)
    throw std::invalid_argument("robustness needs at least 2 hourly samples");
  double sum = 0.0;
  for (std::size_t j = 0; j < objectives; ++j) {
    double mean = 0.0;
    for (std::size_t h = 0; h < hours; ++h) mean += table.at(j, h);
    mean /= static_cast<double>(hours);
    double var = 0.0;
    for (std::size_t h = 0; h < hours; ++h) {
      const double d = table.at(j, h) - mean;
      var += d * d;
    }
    sum += std::sqrt(var / static_cast<double>(hours - 1));
  }
  return sum / static_cast<double>(objectives);
}

ObjectiveVector evaluate_against_memories(const LambdaVector& lambda,
                                          const TrafficNetwork& network,
                                          const std::vector<Matrix>& memories,
                                          RobustnessMode mode) {
  if (memories.empty()) throw std::invalid_argument("need at least one draw");
  const std::size_t hours = memories.front().cols();

  ObjectiveVector out;
  HourlyObjectiveTable mean_table(2, hours);
  double score_sum = 0.0;
  for (const Matrix& mem : memories) {
    const DelayResult delay = average_delay(lambda, mem, network);
    const StabilityResult stab = network_stability(lambda, mem, network);
    out.f1 += delay.f1;
    out.f2 += stab.f2;
    HourlyObjectiveTable table(2, hours);
    for (std::size_t t = 0; t < hours; ++t) {
      table.at(0, t) = delay.per_hour[t];
      table.at(1, t) = stab.per_hour[t];
      mean_table.at(0, t) += delay.per_hour[t];
      mean_table.at(1, t) += stab.per_hour[t];
    }
    if (mode == RobustnessMode::MeanOfPerDrawScores)
      score_sum += robustness(table);
  }
  const double inv = 1.0 / static_cast<double>(memories.size());
  out.f1 *= inv;
  out.f2 *= inv;
  for (double& v : mean_table.data()) v *= inv;
  out.r = mode == RobustnessMode::MeanTableThenScore ? robustness(mean_table)
                                                     : score_sum * inv;
  return out;
}

ObjectiveVector evaluate_solution(const LambdaVector& lambda,
                                  const TrafficNetwork& network,
                                  const DemandProfile& profile,
                                  std::uint64_t seed, std::size_t n_e,
                                  MemoryBuffer& memory,
                                  const EvalOptions& opts) {
  if (n_e == 0) throw std::invalid_argument("n_e must be >= 1");
  std::vector<Matrix> memories;
  memories.reserve(n_e);
  for (std::size_t j = 1; j <= n_e; ++j)
    memories.push_back(memory.push(generate_volumes(network, profile, seed, j)));
  return evaluate_against_memories(lambda, network, memories,
                                   opts.robustness_mode);
}

double objective_component(const ObjectiveVector& v, std::size_t k) {
  switch (k) {
    case 0: return v.f1;
    case 1: return v.f2;
    default: return v.r;
  }
}

}  // namespace traffic
