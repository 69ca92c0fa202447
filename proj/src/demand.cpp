#include "traffic/demand.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "traffic/rng.hpp"

namespace traffic {
namespace {

constexpr std::uint64_t kTagVolume = 11;

bool in_window(const HourWindow& w, double h) {
  return h >= w.first && h < w.second;
}

bool in_any(const std::vector<HourWindow>& windows, double h) {
  for (const auto& w : windows)
    if (in_window(w, h)) return true;
  return false;
}

void check_interval(const HourWindow& iv, const char* what) {
  if (iv.first <= 0.0 || iv.second <= 0.0 || iv.first > iv.second)
    throw std::invalid_argument(std::string("bad interval for ") + what);
}

}  // namespace

void DemandProfile::validate() const {
  if (peak_base_factor <= 0.0 || lunch_base_factor <= 0.0 ||
      midnight_factor <= 0.0)
    throw std::invalid_argument("demand factors must be positive");
  if (city_uplift < 0.0)
    throw std::invalid_argument("city uplift must be non-negative");
  check_interval(peak_jitter, "peak jitter");
  check_interval(offpeak_range, "off-peak range");
  check_interval(lunch_jitter, "lunch jitter");
}

double weather_factor(double t, double segments) {
  return 0.8 + 0.4 * std::sin(2.0 * std::numbers::pi * t / segments);
}

double effective_saturation(double base, double t, double segments) {
  if (base <= 0.0) throw std::invalid_argument("base saturation must be positive");
  return base * weather_factor(t, segments);
}

double time_of_day_factor(const DemandProfile& profile, std::size_t t,
                          std::uint64_t seed, std::uint64_t draw_index,
                          std::size_t intersection) {
  if (t >= kHoursPerDay) throw std::out_of_range("hour index outside [0, 24)");
  const double h = static_cast<double>(t);
  if (in_window(profile.midnight_window, h)) return profile.midnight_factor;
  const double u =
      keyed_uniform01({seed, kTagVolume, draw_index, intersection, t});
  if (in_any(profile.peak_windows, h)) {
    double jitter = profile.peak_jitter.first +
                    (profile.peak_jitter.second - profile.peak_jitter.first) * u;
    return profile.peak_base_factor * jitter * (1.0 + profile.city_uplift);
  }
  if (in_window(profile.lunch_window, h)) {
    double jitter =
        profile.lunch_jitter.first +
        (profile.lunch_jitter.second - profile.lunch_jitter.first) * u;
    return profile.lunch_base_factor * jitter;
  }
  return profile.offpeak_range.first +
         (profile.offpeak_range.second - profile.offpeak_range.first) * u;
}

VolumeField generate_volumes(const TrafficNetwork& network,
                             const DemandProfile& profile, std::uint64_t seed,
                             std::uint64_t draw_index) {
  profile.validate();
  VolumeField field;
  field.seed = seed;
  field.draw_index = draw_index;
  field.values = Matrix(network.size(), kHoursPerDay);
  for (std::size_t i = 0; i < network.size(); ++i) {
    const double base = network.intersection(i).base_saturation;
    for (std::size_t t = 0; t < kHoursPerDay; ++t)
      field.values.at(i, t) =
          base * time_of_day_factor(profile, t, seed, draw_index, i);
  }
  return field;
}

std::string volume_field_to_csv(const VolumeField& field) {
  std::string out = "i,t,volume\n";
  char line[64];
  for (std::size_t i = 0; i < field.values.rows(); ++i)
    for (std::size_t t = 0; t < field.values.cols(); ++t) {
      std::snprintf(line, sizeof(line), "%zu,%zu,%.17g\n", i, t,
                    field.values.at(i, t));
      out += line;
    }
  return out;
}

}  // namespace traffic
