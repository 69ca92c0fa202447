#ifndef TRAFFIC_NETWORK_HPP
#define TRAFFIC_NETWORK_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace traffic {

enum class RoadClass { Local, Collector, Arterial };

std::string to_string(RoadClass c);
RoadClass road_class_from_string(const std::string& s);

struct IntersectionSpec {
  std::size_t id = 0;
  double cycle_length = 90.0;      // seconds, from the configured set
  double base_saturation = 1800.0; // vehicles/hour
  RoadClass road_class = RoadClass::Collector;
  double type_weight = 1.0;        // intersection-type weight, > 0
};

// Immutable after construction; safe to share across threads.
class TrafficNetwork {
 public:
  TrafficNetwork(std::string city_label,
                 std::vector<IntersectionSpec> intersections,
                 std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t size() const { return intersections_.size(); }
  const std::vector<IntersectionSpec>& intersections() const {
    return intersections_;
  }
  const IntersectionSpec& intersection(std::size_t i) const {
    return intersections_[i];
  }
  // Undirected edge list, each pair stored once with first < second.
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const {
    return edges_;
  }
  const std::string& city_label() const { return city_label_; }

  // Sorted adjacency of intersection i. Throws on out-of-range index.
  const std::vector<std::size_t>& neighbors(std::size_t i) const;

  bool connected() const;

  std::string to_json() const;
  static TrafficNetwork from_json(const std::string& text);

 private:
  std::string city_label_;
  std::vector<IntersectionSpec> intersections_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// Deterministic city generators. Same arguments, bit-identical network.
TrafficNetwork build_grid_city(std::size_t avenues, std::size_t streets,
                               std::uint64_t seed);
TrafficNetwork build_radial_city(std::size_t radials, std::size_t rings,
                                 std::uint64_t seed);
TrafficNetwork build_irregular_city(std::size_t arterials,
                                    std::size_t collectors,
                                    std::uint64_t seed);

}  // namespace traffic

#endif
