// Counter-derived random streams. Every (purpose, frame, node) triple gets
// its own engine so adding or removing a node never shifts another node's
// draws.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace aoigame {

enum class StreamTag : std::uint64_t {
  channel = 0x6368616e6e656cULL,
  initial_probability = 0x696e6974ULL,
  welfare_start = 0x77656c66ULL,
  replicate = 0x7265706cULL,
  solver_start = 0x736f6c76ULL,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t v : path) h = splitmix64(h ^ splitmix64(v));
  return h;
}

/// mt19937_64 output is fixed by the standard; the conversion below keeps
/// doubles bit-identical across standard library implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b = 0)
      : engine_(derive_seed(seed, {static_cast<std::uint64_t>(tag), a, b})) {}

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (lo, hi).
  double uniform_open(double lo, double hi) {
    for (;;) {
      double x = lo + (hi - lo) * uniform();
      if (x > lo && x < hi) return x;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aoigame
