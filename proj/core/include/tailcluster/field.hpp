#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tailcluster/lattice.hpp"

namespace tailcluster {

/// Box window W = [-a, a]^l of grid points (per-axis half-widths).
///
/// Points are enumerated in lexicographic order; flat index 0 is the
/// lexicographically smallest corner and axis 0 has the largest stride.
class Window {
 public:
  Window() = default;
  explicit Window(std::vector<Coord> half_width);
  static Window cube(int dim, Coord half_width);

  int dim() const { return static_cast<int>(half_width_.size()); }
  const std::vector<Coord>& half_width() const { return half_width_; }
  std::size_t size() const { return size_; }

  bool contains(std::span<const Coord> point) const;
  /// Flat index of a point known to be inside the window.
  std::size_t flat_index(std::span<const Coord> point) const;
  GridPoint point_at(std::size_t flat) const;
  std::size_t origin_index() const { return flat_index(GridPoint(half_width_.size(), 0)); }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::vector<Coord> half_width_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

enum class NormKind { absolute, euclidean, max_component, weighted_sum };

/// 1-homogeneous continuous map R^d -> [0, inf).
struct NormSpec {
  NormKind kind = NormKind::absolute;
  std::vector<double> weights;  // weighted_sum only, one positive weight per component

  double operator()(std::span<const double> x) const;
  void validate(int d) const;
};

/// One realization of an R^d-valued field on a window, with a coverage mask.
class FieldSample {
 public:
  FieldSample() = default;
  /// All-zero field, fully covered.
  FieldSample(Window window, int value_dim, double grid_spacing = 1.0, NormSpec norm = {});

  const Window& window() const { return window_; }
  int dim_l() const { return window_.dim(); }
  int dim_d() const { return value_dim_; }
  double grid_spacing() const { return grid_spacing_; }
  const NormSpec& norm_spec() const { return norm_; }
  std::size_t size() const { return window_.size(); }

  std::span<const double> value(std::size_t flat) const;
  std::span<double> value(std::size_t flat);
  bool covered(std::size_t flat) const { return covered_[flat] != 0; }
  void set_covered(std::size_t flat, bool on) { covered_[flat] = on ? 1 : 0; }

  /// ||f(t)|| at a flat index (0 when uncovered).
  double norm_at(std::size_t flat) const;
  /// ||f(t)|| at a point, 0 outside the window or coverage.
  double norm_at(std::span<const Coord> point) const;

  void scale(double c);
  FieldSample scaled(double c) const;

  const std::vector<double>& raw_values() const { return values_; }

 private:
  Window window_;
  int value_dim_ = 1;
  double grid_spacing_ = 1.0;
  NormSpec norm_;
  std::vector<double> values_;
  std::vector<unsigned char> covered_;
};

/// g(t) = f(t - h); coverage translated and intersected with the window.
FieldSample shift(const FieldSample& f, std::span<const Coord> h);

/// g(t) = f(t - h) on `target`; points whose preimage leaves f's window are
/// filled with zero (f is taken to vanish outside its window). Returns the
/// alpha-mass of f that did not land in the target through `lost_mass`.
FieldSample shift_into(const FieldSample& f, std::span<const Coord> h, const Window& target, double alpha,
                       double* lost_mass = nullptr);

/// sum over t in L and coverage of ||f(t)||^alpha * delta^l.
double sum_alpha(const FieldSample& f, const LatticeSpec& lattice, double alpha);
/// sum over t in L and coverage of ||b f(t)||^tau 1{||b f(t)|| >= 1} * delta^l.
double exceedance_sum(const FieldSample& f, const LatticeSpec& lattice, double tau, double b = 1.0);
/// max of ||f(t)|| over L and coverage, 0 on the empty set.
double sup_norm(const FieldSample& f, const LatticeSpec& lattice);
/// Lexicographically least argmax over L; nullopt when the sup is 0.
std::optional<GridPoint> infargsup(const FieldSample& f, const LatticeSpec& lattice);
/// Lexicographically least t in L with ||f(t)|| > 1.
std::optional<GridPoint> first_exceedance(const FieldSample& f, const LatticeSpec& lattice);

/// Lexicographic comparison of grid points; the fixed shift-invariant total order.
int lex_compare(std::span<const Coord> a, std::span<const Coord> b);
bool is_origin(std::span<const Coord> point);

/// Per-point lattice membership for a window, cached once per (window, lattice).
std::vector<unsigned char> lattice_mask(const Window& window, const LatticeSpec& lattice);

/// Field functionals over a precomputed norm vector, restricted to a mask.
/// Used on hot paths to avoid recomputing norms per functional.
struct PathNorms {
  std::vector<double> norms;  // ||f(t)||, 0 where uncovered
  std::vector<unsigned char> covered;
  std::size_t origin = 0;

  static PathNorms of(const FieldSample& f);
};

/// The field functionals for one (window, lattice) pair with the lattice
/// mask computed once. Flat indices follow the window's lexicographic order,
/// so "t after 0" is simply "flat index after the origin".
class LatticeFunctionals {
 public:
  LatticeFunctionals(const Window& window, const LatticeSpec& lattice);

  const LatticeSpec& lattice() const { return lattice_; }
  const Window& window() const { return window_; }
  double cell_volume() const { return cell_volume_; }

  double sum_alpha(const PathNorms& p, double alpha) const;
  double exceedance_sum(const PathNorms& p, double tau, double b = 1.0) const;
  double sup(const PathNorms& p) const;
  /// sup over lattice points t with t > 0 (strict) or t >= 0.
  double sup_after_origin(const PathNorms& p, bool include_origin) const;
  /// sup over lattice points t with t < 0.
  double sup_before_origin(const PathNorms& p) const;
  std::optional<std::size_t> infargsup(const PathNorms& p) const;
  std::optional<std::size_t> first_exceedance(const PathNorms& p) const;

  bool in_lattice(std::size_t flat) const { return mask_[flat] != 0; }

 private:
  Window window_;
  LatticeSpec lattice_;
  std::vector<unsigned char> mask_;
  double cell_volume_ = 1.0;  // delta^l
};

}  // namespace tailcluster
