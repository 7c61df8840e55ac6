#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tailcluster {

using Coord = std::int64_t;
using GridPoint = std::vector<Coord>;

/// Square integer matrix stored row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(int dim, std::vector<Coord> row_major);

  static IntMatrix identity(int dim);
  static IntMatrix diagonal(std::span<const Coord> diag);

  int dim() const { return dim_; }
  Coord operator()(int row, int col) const { return data_[row * dim_ + col]; }
  Coord& operator()(int row, int col) { return data_[row * dim_ + col]; }
  const std::vector<Coord>& data() const { return data_; }

  /// Exact determinant (fraction-free Bareiss elimination).
  Coord determinant() const;
  IntMatrix multiply(const IntMatrix& rhs) const;
  GridPoint apply(std::span<const Coord> x) const;

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  int dim_ = 0;
  std::vector<Coord> data_;
};

/// Representatives of the cosets of L in the ambient grid, one per coset,
/// all inside the half-open fundamental parallelepiped {A x : x in [0,1)^l}.
struct CosetTable {
  std::vector<GridPoint> representatives;
};

/// A full-rank sublattice L = A Z^l of the ambient grid delta Z^l.
///
/// The base matrix is expressed in grid units; delta only enters through
/// the covolume |det A| * delta^l. Membership and coset arithmetic are exact.
class LatticeSpec {
 public:
  /// Throws ConfigError if the base matrix is singular or delta <= 0.
  explicit LatticeSpec(IntMatrix base, double grid_spacing = 1.0);

  /// L equal to the ambient grid (A = I).
  static LatticeSpec ambient(int dim, double grid_spacing = 1.0);

  /// Parses "a11,a12;a21,a22" (row-major, rows separated by ';').
  static LatticeSpec parse(std::string_view text, double grid_spacing = 1.0);

  int dim() const { return base_.dim(); }
  const IntMatrix& base() const { return base_; }
  double grid_spacing() const { return grid_spacing_; }

  /// |det A|, the number of cosets of L in the ambient grid.
  Coord index() const { return index_; }
  /// |det A| * delta^l.
  double covolume() const;
  bool is_ambient() const { return index_ == 1; }

  bool contains(std::span<const Coord> point) const;

  /// Lexicographically ordered integer points of {A x : x in [0,1)^l}.
  CosetTable coset_representatives() const;

  /// Lower-triangular Hermite normal form H = A U of the base.
  const IntMatrix& hermite_form() const { return hermite_; }

 private:
  IntMatrix base_;
  IntMatrix hermite_;
  IntMatrix adjugate_;  // adj(A), so A^{-1} = adj(A) / det(A)
  Coord det_ = 0;
  Coord index_ = 0;
  double grid_spacing_ = 1.0;
};

/// Free-function forms of the lattice operations.
double covolume(const LatticeSpec& spec);
CosetTable coset_representatives(const LatticeSpec& spec);
bool contains(const LatticeSpec& spec, std::span<const Coord> point);

}  // namespace tailcluster
