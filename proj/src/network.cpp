#include "traffic/network.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "traffic/rng.hpp"

namespace traffic {
namespace {

using Edge = std::pair<std::size_t, std::size_t>;

constexpr double kCycleSet[] = {60.0, 90.0, 120.0};

enum : std::uint64_t {
  kTagCycle = 1,
  kTagSaturation = 2,
  kTagClass = 3,
  kTagStreetClass = 4,
  kTagEdgeOrder = 5,
  kTagShortcut = 6,
};

double pick_cycle(std::uint64_t seed, std::size_t node) {
  double u = keyed_uniform01({seed, kTagCycle, node});
  return kCycleSet[static_cast<std::size_t>(u * 3.0) % 3];
}

// Saturation ranges vary by road class; all inside [800, 2400].
double pick_saturation(std::uint64_t seed, std::size_t node, RoadClass c) {
  double lo = 800.0, hi = 1200.0;
  if (c == RoadClass::Collector) {
    lo = 1200.0;
    hi = 1800.0;
  } else if (c == RoadClass::Arterial) {
    lo = 1800.0;
    hi = 2400.0;
  }
  return keyed_uniform(lo, hi, {seed, kTagSaturation, node});
}

double weight_from_degree(std::size_t degree) {
  // 4-way crossings weigh 1.0, anything with fewer approaches 0.75.
  return degree >= 4 ? 1.0 : 0.75;
}

std::vector<IntersectionSpec> make_specs(
    std::size_t n, std::uint64_t seed,
    const std::vector<RoadClass>& classes,
    const std::vector<std::vector<std::size_t>>& adjacency) {
  std::vector<IntersectionSpec> specs(n);
  for (std::size_t i = 0; i < n; ++i) {
    specs[i].id = i;
    specs[i].road_class = classes[i];
    specs[i].cycle_length = pick_cycle(seed, i);
    specs[i].base_saturation = pick_saturation(seed, i, classes[i]);
    specs[i].type_weight = weight_from_degree(adjacency[i].size());
  }
  return specs;
}

std::vector<std::vector<std::size_t>> adjacency_of(std::size_t n,
                                                   const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

bool is_connected(std::size_t n, const std::vector<std::vector<std::size_t>>& adj) {
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop();
    for (std::size_t w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        q.push(w);
      }
  }
  return count == n;
}

}  // namespace

std::string to_string(RoadClass c) {
  switch (c) {
    case RoadClass::Local: return "local";
    case RoadClass::Collector: return "collector";
    case RoadClass::Arterial: return "arterial";
  }
  return "local";
}

RoadClass road_class_from_string(const std::string& s) {
  if (s == "local") return RoadClass::Local;
  if (s == "collector") return RoadClass::Collector;
  if (s == "arterial") return RoadClass::Arterial;
  throw std::invalid_argument("unknown road class: " + s);
}

TrafficNetwork::TrafficNetwork(std::string city_label,
                               std::vector<IntersectionSpec> intersections,
                               std::vector<Edge> edges)
    : city_label_(std::move(city_label)),
      intersections_(std::move(intersections)),
      edges_(std::move(edges)) {
  const std::size_t n = intersections_.size();
  if (n == 0) throw std::invalid_argument("network needs at least one intersection");
  for (auto& e : edges_) {
    if (e.first == e.second) throw std::invalid_argument("self-loop edge");
    if (e.first >= n || e.second >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  adjacency_ = adjacency_of(n, edges_);
  for (std::size_t i = 0; i < n; ++i)
    if (adjacency_[i].empty())
      throw std::invalid_argument("isolated intersection in network");
  for (const auto& spec : intersections_) {
    if (spec.base_saturation < 800.0 || spec.base_saturation > 2400.0)
      throw std::invalid_argument("base saturation out of [800, 2400]");
    if (spec.type_weight <= 0.0)
      throw std::invalid_argument("type weight must be positive");
  }
}

const std::vector<std::size_t>& TrafficNetwork::neighbors(std::size_t i) const {
  if (i >= adjacency_.size())
    throw std::out_of_range("intersection index out of range");
  return adjacency_[i];
}

bool TrafficNetwork::connected() const {
  return is_connected(size(), adjacency_);
}

std::string TrafficNetwork::to_json() const {
  nlohmann::json j;
  j["city_label"] = city_label_;
  j["intersections"] = nlohmann::json::array();
  for (const auto& s : intersections_) {
    j["intersections"].push_back({{"id", s.id},
                                  {"cycle", s.cycle_length},
                                  {"base_saturation", s.base_saturation},
                                  {"class", to_string(s.road_class)},
                                  {"type_weight", s.type_weight}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : edges_) j["edges"].push_back({a, b});
  return j.dump(2);
}

TrafficNetwork TrafficNetwork::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<IntersectionSpec> specs;
  for (const auto& item : j.at("intersections")) {
    IntersectionSpec s;
    s.id = item.at("id").get<std::size_t>();
    s.cycle_length = item.at("cycle").get<double>();
    s.base_saturation = item.at("base_saturation").get<double>();
    s.road_class = road_class_from_string(item.at("class").get<std::string>());
    s.type_weight = item.at("type_weight").get<double>();
    specs.push_back(s);
  }
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  return TrafficNetwork(j.at("city_label").get<std::string>(), std::move(specs),
                        std::move(edges));
}

TrafficNetwork build_grid_city(std::size_t avenues, std::size_t streets,
                               std::uint64_t seed) {
  if (avenues < 2 || streets < 2)
    throw std::invalid_argument("grid city needs at least 2 avenues and 2 streets");
  const std::size_t n = avenues * streets;
  auto node = [streets](std::size_t a, std::size_t s) { return a * streets + s; };

  std::vector<Edge> edges;
  edges.reserve(2 * n);
  for (std::size_t a = 0; a < avenues; ++a)
    for (std::size_t s = 0; s < streets; ++s) {
      if (a + 1 < avenues) edges.emplace_back(node(a, s), node(a + 1, s));
      if (s + 1 < streets) edges.emplace_back(node(a, s), node(a, s + 1));
    }

  // Each street line is collector or local; a seeded share of intersections
  // inherits the arterial class of the avenue crossing them.
  std::vector<RoadClass> street_class(streets);
  for (std::size_t s = 0; s < streets; ++s)
    street_class[s] = keyed_uniform01({seed, kTagStreetClass, s}) < 0.7
                          ? RoadClass::Collector
                          : RoadClass::Local;
  std::vector<RoadClass> classes(n);
  for (std::size_t a = 0; a < avenues; ++a)
    for (std::size_t s = 0; s < streets; ++s) {
      std::size_t i = node(a, s);
      classes[i] = keyed_uniform01({seed, kTagClass, i}) < 0.3
                       ? RoadClass::Arterial
                       : street_class[s];
    }

  auto adj = adjacency_of(n, edges);
  return TrafficNetwork("grid", make_specs(n, seed, classes, adj),
                        std::move(edges));
}

TrafficNetwork build_radial_city(std::size_t radials, std::size_t rings,
                                 std::uint64_t seed) {
  if (radials < 3)
    throw std::invalid_argument("radial city needs at least 3 radials");
  if (rings < 1)
    throw std::invalid_argument("radial city needs at least 1 ring");
  const std::size_t hub = radials * rings;
  const std::size_t n = hub + 1;
  auto node = [rings](std::size_t r, std::size_t k) { return r * rings + k; };

  std::vector<Edge> edges;
  for (std::size_t r = 0; r < radials; ++r) {
    edges.emplace_back(hub, node(r, 0));
    for (std::size_t k = 0; k + 1 < rings; ++k)
      edges.emplace_back(node(r, k), node(r, k + 1));
    for (std::size_t k = 0; k < rings; ++k)
      edges.emplace_back(node(r, k), node((r + 1) % radials, k));
  }

  std::vector<RoadClass> classes(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = keyed_uniform01({seed, kTagClass, i});
    classes[i] = u < 0.4   ? RoadClass::Arterial
                 : u < 0.85 ? RoadClass::Collector
                            : RoadClass::Local;
  }
  classes[hub] = RoadClass::Arterial;

  auto adj = adjacency_of(n, edges);
  return TrafficNetwork("radial", make_specs(n, seed, classes, adj),
                        std::move(edges));
}

TrafficNetwork build_irregular_city(std::size_t arterials,
                                    std::size_t collectors,
                                    std::uint64_t seed) {
  if (arterials < 1 || collectors < 1)
    throw std::invalid_argument("irregular city needs positive dimensions");
  const std::size_t n = arterials * collectors;
  if (n < 2)
    throw std::invalid_argument(
        "irregular city with a single intersection cannot satisfy degree >= 1");
  auto node = [collectors](std::size_t a, std::size_t c) {
    return a * collectors + c;
  };

  std::vector<Edge> edges;
  for (std::size_t a = 0; a < arterials; ++a)
    for (std::size_t c = 0; c < collectors; ++c) {
      if (a + 1 < arterials) edges.emplace_back(node(a, c), node(a + 1, c));
      if (c + 1 < collectors) edges.emplace_back(node(a, c), node(a, c + 1));
    }

  // Remove a seeded 15% of grid edges, keeping the graph connected, then add
  // the same number of shortcut edges (bridges/tunnels) between non-adjacent
  // pairs.
  const std::size_t removals = edges.size() * 15 / 100;
  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    auto kx = hash_keys({seed, kTagEdgeOrder, x});
    auto ky = hash_keys({seed, kTagEdgeOrder, y});
    return kx < ky || (kx == ky && x < y);
  });

  std::set<Edge> kept(edges.begin(), edges.end());
  std::size_t removed = 0;
  for (std::size_t idx : order) {
    if (removed >= removals) break;
    Edge e = edges[idx];
    kept.erase(e);
    std::vector<Edge> trial(kept.begin(), kept.end());
    if (is_connected(n, adjacency_of(n, trial))) {
      ++removed;
    } else {
      kept.insert(e);
    }
  }

  RngStream shortcut_rng(hash_keys({seed, kTagShortcut}));
  std::size_t added = 0;
  while (added < removed) {
    std::size_t a = shortcut_rng.next_index(n);
    std::size_t b = shortcut_rng.next_index(n);
    if (a == b) continue;
    Edge e{std::min(a, b), std::max(a, b)};
    if (kept.insert(e).second) ++added;
  }

  std::vector<Edge> final_edges(kept.begin(), kept.end());
  std::vector<RoadClass> classes(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = keyed_uniform01({seed, kTagClass, i});
    classes[i] = u < 0.35  ? RoadClass::Arterial
                 : u < 0.8 ? RoadClass::Collector
                           : RoadClass::Local;
  }

  auto adj = adjacency_of(n, final_edges);
  return TrafficNetwork("irregular", make_specs(n, seed, classes, adj),
                        std::move(final_edges));
}

}  // namespace traffic
