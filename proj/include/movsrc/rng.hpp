#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace movsrc {

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream seeds derived from one master seed by counter-based splitting:
/// stream k is seeded with splitmix64(master + k * 0x9E3779B97F4A7C15).
/// Stream 0 drives measurement noise, stream k >= 1 drives chain k - 1.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + stream * 0x9E3779B97F4A7C15ULL);
}

inline constexpr std::uint64_t kNoiseStream = 0;
inline std::uint64_t chain_stream(std::size_t chain) { return 1 + chain; }

/// Engine plus normal/uniform draws with a serializable state, so a chain
/// resumed from a checkpoint continues the exact same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  std::string state() const {
    std::ostringstream out;
    out << engine_ << ' ' << normal_;
    return out.str();
  }

  void restore(const std::string& state) {
    std::istringstream in(state);
    in >> engine_ >> normal_;
    if (!in) throw std::runtime_error("Rng: corrupt state string");
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace movsrc
