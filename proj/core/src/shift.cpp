#include "tailcluster/shift.hpp"

#include <cmath>
#include <string>

#include "tailcluster/errors.hpp"

namespace tailcluster {

std::string_view to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::symmetric_geometric_product: return "symmetric_geometric_product";
    case ShiftKind::uniform_window: return "uniform_window";
    case ShiftKind::truncated_gaussian_grid: return "truncated_gaussian_grid";
  }
  return "unknown";
}

ShiftKind parse_shift_kind(std::string_view text) {
  for (ShiftKind k : {ShiftKind::symmetric_geometric_product, ShiftKind::uniform_window,
                      ShiftKind::truncated_gaussian_grid}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown shift distribution '" + std::string(text) + "'");
}

ShiftDistribution ShiftDistribution::symmetric_geometric(int dim, double ratio, double grid_spacing) {
  if (dim < 1) throw ConfigError("shift dimension must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("geometric shift ratio must lie in (0, 1)");
  ShiftDistribution d;
  d.kind_ = ShiftKind::symmetric_geometric_product;
  d.dim_ = dim;
  d.ratio_ = ratio;
  d.grid_spacing_ = grid_spacing;
  return d;
}

ShiftDistribution ShiftDistribution::uniform_box(std::vector<Coord> lo, std::vector<Coord> hi, double grid_spacing) {
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("uniform shift box needs matching bounds");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw ConfigError("uniform shift box is empty");
  }
  ShiftDistribution d;
  d.kind_ = ShiftKind::uniform_window;
  d.dim_ = static_cast<int>(lo.size());
  d.lo_ = std::move(lo);
  d.hi_ = std::move(hi);
  d.grid_spacing_ = grid_spacing;
  return d;
}

ShiftDistribution ShiftDistribution::covering(const Window& source, const Window& target, double grid_spacing) {
  if (source.dim() != target.dim()) throw ConfigError("window dimensions differ");
  std::vector<Coord> lo, hi;
  for (int i = 0; i < source.dim(); ++i) {
    const Coord s = source.half_width()[static_cast<std::size_t>(i)];
    const Coord t = target.half_width()[static_cast<std::size_t>(i)];
    lo.push_back(-t - s);
    hi.push_back(t + s);
  }
  return uniform_box(std::move(lo), std::move(hi), grid_spacing);
}

ShiftDistribution ShiftDistribution::truncated_gaussian(int dim, double sigma, Coord radius, double grid_spacing) {
  if (dim < 1) throw ConfigError("shift dimension must be positive");
  if (!(sigma > 0.0) || radius < 0) throw ConfigError("truncated Gaussian shift needs sigma > 0 and radius >= 0");
  ShiftDistribution d;
  d.kind_ = ShiftKind::truncated_gaussian_grid;
  d.dim_ = dim;
  d.sigma_ = sigma;
  d.radius_ = radius;
  d.grid_spacing_ = grid_spacing;
  double total = 0.0;
  for (Coord t = -radius; t <= radius; ++t) {
    const double v = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
    d.gauss_table_.push_back(v);
    total += v;
  }
  for (double& v : d.gauss_table_) v /= total;
  return d;
}

double ShiftDistribution::axis_pmf(std::size_t axis, Coord t) const {
  switch (kind_) {
    case ShiftKind::symmetric_geometric_product:
      return (1.0 - ratio_) / (1.0 + ratio_) * std::pow(ratio_, static_cast<double>(t < 0 ? -t : t));
    case ShiftKind::uniform_window:
      if (t < lo_[axis] || t > hi_[axis]) return 0.0;
      return 1.0 / static_cast<double>(hi_[axis] - lo_[axis] + 1);
    case ShiftKind::truncated_gaussian_grid:
      if (t < -radius_ || t > radius_) return 0.0;
      return gauss_table_[static_cast<std::size_t>(t + radius_)];
  }
  return 0.0;
}

double ShiftDistribution::pmf(std::span<const Coord> t) const {
  double p = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) p *= axis_pmf(i, t[i]);
  return p;
}

double ShiftDistribution::density(std::span<const Coord> t) const {
  return pmf(t) / std::pow(grid_spacing_, dim_);
}

GridPoint ShiftDistribution::sample(RandomStream& stream) const {
  GridPoint out(static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (kind_) {
      case ShiftKind::symmetric_geometric_product: {
        const double log_r = std::log(ratio_);
        const auto g1 = static_cast<Coord>(std::floor(std::log(stream.uniform_open()) / log_r));
        const auto g2 = static_cast<Coord>(std::floor(std::log(stream.uniform_open()) / log_r));
        out[i] = g1 - g2;
        break;
      }
      case ShiftKind::uniform_window: {
        const auto count = static_cast<double>(hi_[i] - lo_[i] + 1);
        out[i] = lo_[i] + static_cast<Coord>(stream.uniform() * count);
        break;
      }
      case ShiftKind::truncated_gaussian_grid:
        out[i] = static_cast<Coord>(stream.discrete(gauss_table_.data(), gauss_table_.size(), 1.0)) - radius_;
        break;
    }
  }
  return out;
}

}  // namespace tailcluster
