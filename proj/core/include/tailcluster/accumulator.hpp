#pragma once

#include <cstddef>

namespace tailcluster {

struct MeanEstimate {
  double value = 0.0;
  double std_error = 0.0;
  /// Sample variance of the per-draw quantity being averaged.
  double sample_variance = 0.0;
  std::size_t n = 0;
  double n_effective = 0.0;
};

/// Streaming moments of (weight, weight * h) pairs, mergeable (Chan et al.).
///
/// plain(): mean of weight * h, for weights whose expectation is known.
/// ratio(): sum(weight * h) / sum(weight), self-normalized, delta-method stderr.
class PairAccumulator {
 public:
  void add(double weight, double weighted_value);
  void merge(const PairAccumulator& other);

  std::size_t count() const { return n_; }
  double weight_sum() const { return mean_w_ * static_cast<double>(n_); }
  double weighted_sum() const { return mean_y_ * static_cast<double>(n_); }
  double mean_weight() const { return mean_w_; }
  double mean_weighted() const { return mean_y_; }

  MeanEstimate plain() const;
  MeanEstimate ratio() const;

 private:
  double n_effective() const;

  std::size_t n_ = 0;
  double mean_w_ = 0.0;
  double mean_y_ = 0.0;
  double m2_w_ = 0.0;
  double m2_y_ = 0.0;
  double c_wy_ = 0.0;
};

}  // namespace tailcluster
