#pragma once

#include <string_view>
#include <vector>

#include "tailcluster/field.hpp"
#include "tailcluster/random.hpp"

namespace tailcluster {

enum class ShiftKind { symmetric_geometric_product, uniform_window, truncated_gaussian_grid };

std::string_view to_string(ShiftKind kind);
ShiftKind parse_shift_kind(std::string_view text);

/// Law of the random shift N on the grid, p_N(t) > 0 on its support.
class ShiftDistribution {
 public:
  /// Product of per-axis two-sided geometric laws p(t) = (1-r)/(1+r) r^|t|.
  static ShiftDistribution symmetric_geometric(int dim, double ratio, double grid_spacing = 1.0);
  /// Uniform on the box [lo, hi] (grid units, inclusive).
  static ShiftDistribution uniform_box(std::vector<Coord> lo, std::vector<Coord> hi, double grid_spacing = 1.0);
  /// Smallest uniform box that can move any point of `source` onto any point of `target`.
  static ShiftDistribution covering(const Window& source, const Window& target, double grid_spacing = 1.0);
  /// Product of discretized Gaussians exp(-t^2 / (2 sigma^2)) on |t| <= radius per axis.
  static ShiftDistribution truncated_gaussian(int dim, double sigma, Coord radius, double grid_spacing = 1.0);

  ShiftKind kind() const { return kind_; }
  int dim() const { return dim_; }

  GridPoint sample(RandomStream& stream) const;
  double pmf(std::span<const Coord> t) const;
  /// pmf / delta^l, the density with respect to the grid measure.
  double density(std::span<const Coord> t) const;

 private:
  ShiftDistribution() = default;
  double axis_pmf(std::size_t axis, Coord t) const;

  ShiftKind kind_ = ShiftKind::uniform_window;
  int dim_ = 1;
  double grid_spacing_ = 1.0;
  double ratio_ = 0.5;
  std::vector<Coord> lo_, hi_;
  double sigma_ = 1.0;
  Coord radius_ = 0;
  std::vector<double> gauss_table_;  // pmf on -radius..radius
};

}  // namespace tailcluster
