#pragma once

#include <cstdint>
#include <random>

namespace tailcluster {

/// Reproducible random stream: a pure function of (seed, stream_index).
///
/// Each Monte Carlo sample index gets its own stream, so results do not
/// depend on how samples are spread over workers.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double standard_normal();
  /// Unit-rate exponential.
  double exponential();
  /// Index drawn with probability proportional to `weights`.
  std::size_t discrete(const double* weights, std::size_t count, double total);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// SplitMix64 finalizer; used to derive well-separated engine seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tailcluster
