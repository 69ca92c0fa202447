#ifndef TRAFFIC_RNG_HPP
#define TRAFFIC_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace traffic {

// splitmix64 step; the workhorse behind both the keyed (counter-based)
// streams and the sequential streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash-combine a list of keys into a single 64-bit value. Used to derive
// independent sub-seeds from (master seed, purpose, indices...).
constexpr std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
  return h;
}

constexpr double u64_to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0, 1)
}

// Counter-based uniform draw keyed by an arbitrary tuple. Order-independent
// across cells, so volume generation can be parallelized or re-evaluated
// per cell without a sequential stream.
inline double keyed_uniform01(std::initializer_list<std::uint64_t> keys) {
  return u64_to_unit(hash_keys(keys));
}

inline double keyed_uniform(double lo, double hi,
                            std::initializer_list<std::uint64_t> keys) {
  return lo + (hi - lo) * keyed_uniform01(keys);
}

// Small sequential stream for the optimizer loops. Not std::mt19937 +
// distributions: distribution output is implementation-defined and the
// determinism contract wants bit-identical runs.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ = splitmix64(state_);
    return state_;
  }

  double next_unit() { return u64_to_unit(next_u64()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform index in [0, n).
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(next_unit() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace traffic

#endif
