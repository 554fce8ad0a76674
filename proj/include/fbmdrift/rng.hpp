#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fbmdrift {

//! Reproducible random stream identified by (seed, substream).
//!
//! Distinct substreams of the same seed are seeded through std::seed_seq,
//! so replication i of an experiment can be generated in any order or on
//! any worker and still produce the same numbers.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t substream = 0)
      : seed_(seed), substream_(substream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(substream),
                      static_cast<std::uint32_t>(substream >> 32),
                      0x6662u};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

  std::vector<double> normals(std::size_t count) {
    std::vector<double> out(count);
    for (auto& z : out) z = normal_(engine_);
    return out;
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t substream() const noexcept { return substream_; }

private:
  std::uint64_t seed_;
  std::uint64_t substream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fbmdrift
