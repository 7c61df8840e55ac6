#include "tailcluster/accumulator.hpp"

#include <cmath>

namespace tailcluster {

void PairAccumulator::add(double weight, double weighted_value) {
  ++n_;
  const double nn = static_cast<double>(n_);
  const double dw = weight - mean_w_;
  const double dy = weighted_value - mean_y_;
  mean_w_ += dw / nn;
  mean_y_ += dy / nn;
  m2_w_ += dw * (weight - mean_w_);
  m2_y_ += dy * (weighted_value - mean_y_);
  c_wy_ += dw * (weighted_value - mean_y_);
}

void PairAccumulator::merge(const PairAccumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double dw = o.mean_w_ - mean_w_;
  const double dy = o.mean_y_ - mean_y_;
  m2_w_ += o.m2_w_ + dw * dw * na * nb / n;
  m2_y_ += o.m2_y_ + dy * dy * na * nb / n;
  c_wy_ += o.c_wy_ + dw * dy * na * nb / n;
  mean_w_ += dw * nb / n;
  mean_y_ += dy * nb / n;
  n_ += o.n_;
}

double PairAccumulator::n_effective() const {
  if (n_ == 0) return 0.0;
  const double nn = static_cast<double>(n_);
  const double sum_w = mean_w_ * nn;
  const double sum_w2 = m2_w_ + nn * mean_w_ * mean_w_;
  if (!(sum_w2 > 0.0)) return 0.0;
  return std::fmin(sum_w * sum_w / sum_w2, nn);
}

MeanEstimate PairAccumulator::plain() const {
  MeanEstimate e;
  e.n = n_;
  e.n_effective = n_effective();
  e.value = mean_y_;
  if (n_ > 1) {
    e.sample_variance = m2_y_ / static_cast<double>(n_ - 1);
    e.std_error = std::sqrt(e.sample_variance / static_cast<double>(n_));
  }
  return e;
}

MeanEstimate PairAccumulator::ratio() const {
  MeanEstimate e;
  e.n = n_;
  e.n_effective = n_effective();
  if (n_ == 0 || mean_w_ == 0.0) return e;
  const double r = mean_y_ / mean_w_;
  e.value = r;
  if (n_ > 1) {
    const double denom = static_cast<double>(n_ - 1);
    const double var_w = m2_w_ / denom;
    const double var_y = m2_y_ / denom;
    const double cov = c_wy_ / denom;
    const double v = std::fmax(var_y - 2.0 * r * cov + r * r * var_w, 0.0);
    e.sample_variance = v / (mean_w_ * mean_w_);
    e.std_error = std::sqrt(e.sample_variance / static_cast<double>(n_));
  }
  return e;
}

}  // namespace tailcluster
