#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace hpgan {

// Seeded random stream. Distribution code is written out here instead of using
// <random> distributions so that streams replay identically across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view stream_name);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  int sign() { return (engine_() >> 63) ? 1 : -1; }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  std::string save_state() const;
  void restore_state(const std::string& text);

 private:
  std::mt19937_64 engine_;
};

// Named child streams derived from a single run seed.
struct RngStreams {
  explicit RngStreams(std::uint64_t seed)
      : encode(seed, "encode"),
        init(seed, "init"),
        train(seed, "train"),
        decode(seed, "decode"),
        ga(seed, "ga") {}

  Rng encode;
  Rng init;
  Rng train;
  Rng decode;
  Rng ga;
};

}  // namespace hpgan
