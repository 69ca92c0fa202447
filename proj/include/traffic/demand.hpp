#ifndef TRAFFIC_DEMAND_HPP
#define TRAFFIC_DEMAND_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "traffic/matrix.hpp"
#include "traffic/network.hpp"

namespace traffic {

// 24 hourly simulation segments per day.
inline constexpr std::size_t kHoursPerDay = 24;

using HourWindow = std::pair<double, double>;  // [start, end) hours

// Stochastic demand schedule. Window precedence when a hour falls in
// several: midnight > peak > lunch > off-peak.
struct DemandProfile {
  std::vector<HourWindow> peak_windows = {{7.0, 9.0}, {17.0, 19.0}};
  HourWindow lunch_window = {12.0, 14.0};
  HourWindow midnight_window = {0.0, 5.0};
  double peak_base_factor = 1.5;
  HourWindow peak_jitter = {0.9, 1.3};
  HourWindow offpeak_range = {0.5, 1.0};
  double lunch_base_factor = 1.1;
  HourWindow lunch_jitter = {0.8, 1.2};
  double midnight_factor = 0.5;
  double city_uplift = 0.0;

  void validate() const;
};

struct VolumeField {
  Matrix values;  // [N_intersections x 24] vehicles/hour
  std::uint64_t seed = 0;
  std::uint64_t draw_index = 0;
};

// Time-of-day weather modulation of saturation flow; always in [0.4, 1.2].
double weather_factor(double t, double segments);

double effective_saturation(double base, double t, double segments);

// Demand multiplier for hour t; stochastic branches draw from the keyed
// stream (seed, draw, intersection, hour) so generation is order-independent.
double time_of_day_factor(const DemandProfile& profile, std::size_t t,
                          std::uint64_t seed, std::uint64_t draw_index,
                          std::size_t intersection);

VolumeField generate_volumes(const TrafficNetwork& network,
                             const DemandProfile& profile, std::uint64_t seed,
                             std::uint64_t draw_index);

// Debug export, one `i,t,volume` line per cell.
std::string volume_field_to_csv(const VolumeField& field);

}  // namespace traffic

#endif
