#include "tailcluster/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <cmath>
#include <numeric>
#include <string>

#include "tailcluster/errors.hpp"

namespace tailcluster {
namespace {

__extension__ using Wide = __int128;

Coord floor_div(Coord a, Coord b) {
  Coord q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Coord checked_narrow(Wide v) {
  if (v > std::numeric_limits<Coord>::max() || v < std::numeric_limits<Coord>::min()) {
    throw ConfigError("lattice arithmetic overflow");
  }
  return static_cast<Coord>(v);
}

IntMatrix minor_of(const IntMatrix& m, int skip_row, int skip_col) {
  const int n = m.dim();
  std::vector<Coord> out;
  out.reserve(static_cast<std::size_t>((n - 1) * (n - 1)));
  for (int r = 0; r < n; ++r) {
    if (r == skip_row) continue;
    for (int c = 0; c < n; ++c) {
      if (c == skip_col) continue;
      out.push_back(m(r, c));
    }
  }
  return IntMatrix(n - 1, std::move(out));
}

IntMatrix adjugate(const IntMatrix& m) {
  const int n = m.dim();
  if (n == 1) return IntMatrix(1, {1});
  IntMatrix adj(n, std::vector<Coord>(static_cast<std::size_t>(n * n), 0));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const Coord cof = minor_of(m, r, c).determinant();
      adj(c, r) = ((r + c) % 2 == 0) ? cof : -cof;
    }
  }
  return adj;
}

// Column-style lower-triangular Hermite normal form: H = A U with U unimodular,
// H(i,j) = 0 for j > i, H(i,i) > 0 and 0 <= H(i,j) < H(i,i) for j < i.
IntMatrix hermite_normal_form(IntMatrix h) {
  const int n = h.dim();
  auto col_axpy = [&](int dst, int src, Coord k) {  // col[dst] -= k * col[src]
    for (int r = 0; r < n; ++r) h(r, dst) = checked_narrow(static_cast<Wide>(h(r, dst)) - static_cast<Wide>(k) * h(r, src));
  };
  auto col_swap = [&](int a, int b) {
    for (int r = 0; r < n; ++r) std::swap(h(r, a), h(r, b));
  };
  for (int i = 0; i < n; ++i) {
    // Euclid across columns i..n-1 on row i until only column i is nonzero.
    for (;;) {
      int pivot = -1;
      for (int j = i; j < n; ++j) {
        if (h(i, j) != 0 && (pivot < 0 || std::llabs(h(i, j)) < std::llabs(h(i, pivot)))) pivot = j;
      }
      if (pivot < 0) throw ConfigError("lattice base matrix is singular");
      if (pivot != i) col_swap(i, pivot);
      bool done = true;
      for (int j = i + 1; j < n; ++j) {
        if (h(i, j) != 0) {
          col_axpy(j, i, h(i, j) / h(i, i));
          if (h(i, j) != 0) done = false;
        }
      }
      if (done) break;
    }
    if (h(i, i) < 0) {
      for (int r = 0; r < n; ++r) h(r, i) = -h(r, i);
    }
    for (int j = 0; j < i; ++j) col_axpy(j, i, floor_div(h(i, j), h(i, i)));
  }
  return h;
}

}  // namespace

IntMatrix::IntMatrix(int dim, std::vector<Coord> row_major) : dim_(dim), data_(std::move(row_major)) {
  if (dim <= 0 || data_.size() != static_cast<std::size_t>(dim * dim)) {
    throw ConfigError("integer matrix must be square with positive dimension");
  }
}

IntMatrix IntMatrix::identity(int dim) {
  std::vector<Coord> d(static_cast<std::size_t>(dim * dim), 0);
  for (int i = 0; i < dim; ++i) d[static_cast<std::size_t>(i * dim + i)] = 1;
  return IntMatrix(dim, std::move(d));
}

IntMatrix IntMatrix::diagonal(std::span<const Coord> diag) {
  const int n = static_cast<int>(diag.size());
  std::vector<Coord> d(static_cast<std::size_t>(n * n), 0);
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i * n + i)] = diag[static_cast<std::size_t>(i)];
  return IntMatrix(n, std::move(d));
}

Coord IntMatrix::determinant() const {
  const int n = dim_;
  std::vector<Wide> m(data_.begin(), data_.end());
  auto at = [&](int r, int c) -> Wide& { return m[static_cast<std::size_t>(r * n + c)]; };
  Wide prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (at(k, k) == 0) {
      int swap_row = -1;
      for (int r = k + 1; r < n; ++r) {
        if (at(r, k) != 0) {
          swap_row = r;
          break;
        }
      }
      if (swap_row < 0) return 0;
      for (int c = 0; c < n; ++c) std::swap(at(k, c), at(swap_row, c));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
      }
    }
    prev = at(k, k);
  }
  return checked_narrow(sign * at(n - 1, n - 1));
}

IntMatrix IntMatrix::multiply(const IntMatrix& rhs) const {
  if (rhs.dim_ != dim_) throw ConfigError("matrix dimension mismatch");
  IntMatrix out(dim_, std::vector<Coord>(data_.size(), 0));
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) {
      Wide s = 0;
      for (int k = 0; k < dim_; ++k) s += static_cast<Wide>((*this)(r, k)) * rhs(k, c);
      out(r, c) = checked_narrow(s);
    }
  return out;
}

GridPoint IntMatrix::apply(std::span<const Coord> x) const {
  GridPoint out(static_cast<std::size_t>(dim_), 0);
  for (int r = 0; r < dim_; ++r) {
    Wide s = 0;
    for (int c = 0; c < dim_; ++c) s += static_cast<Wide>((*this)(r, c)) * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = checked_narrow(s);
  }
  return out;
}

LatticeSpec::LatticeSpec(IntMatrix base, double grid_spacing)
    : base_(std::move(base)), grid_spacing_(grid_spacing) {
  if (!(grid_spacing > 0.0) || !std::isfinite(grid_spacing)) {
    throw ConfigError("grid spacing must be a positive finite number");
  }
  det_ = base_.determinant();
  if (det_ == 0) throw ConfigError("lattice base matrix is singular");
  index_ = std::llabs(det_);
  hermite_ = hermite_normal_form(base_);
  adjugate_ = adjugate(base_);
}

LatticeSpec LatticeSpec::ambient(int dim, double grid_spacing) {
  return LatticeSpec(IntMatrix::identity(dim), grid_spacing);
}

LatticeSpec LatticeSpec::parse(std::string_view text, double grid_spacing) {
  std::vector<std::vector<Coord>> rows;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(';', pos), text.size());
    std::string_view row = text.substr(pos, end - pos);
    std::vector<Coord> entries;
    std::size_t p = 0;
    while (p <= row.size()) {
      const std::size_t e = std::min(row.find(',', p), row.size());
      std::string_view tok = row.substr(p, e - p);
      while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
      while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
      Coord v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ConfigError("lattice: expected integer entry, got '" + std::string(tok) + "'");
      }
      entries.push_back(v);
      p = e + 1;
    }
    rows.push_back(std::move(entries));
    pos = end + 1;
  }
  const std::size_t n = rows.size();
  std::vector<Coord> flat;
  for (const auto& r : rows) {
    if (r.size() != n) throw ConfigError("lattice: base matrix must be square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return LatticeSpec(IntMatrix(static_cast<int>(n), std::move(flat)), grid_spacing);
}

double LatticeSpec::covolume() const {
  return static_cast<double>(index_) * std::pow(grid_spacing_, dim());
}

bool LatticeSpec::contains(std::span<const Coord> point) const {
  if (point.size() != static_cast<std::size_t>(dim())) {
    throw ConfigError("lattice membership: point dimension mismatch");
  }
  if (index_ == 1) return true;
  const GridPoint y = adjugate_.apply(point);
  return std::all_of(y.begin(), y.end(), [&](Coord v) { return v % det_ == 0; });
}

CosetTable LatticeSpec::coset_representatives() const {
  const int n = dim();
  std::vector<Coord> extent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) extent[static_cast<std::size_t>(i)] = hermite_(i, i);

  CosetTable table;
  table.representatives.reserve(static_cast<std::size_t>(index_));
  GridPoint r(static_cast<std::size_t>(n), 0);
  for (;;) {
    // Move r into the fundamental parallelepiped of A: p = r - A floor(A^{-1} r).
    const GridPoint y = adjugate_.apply(r);
    GridPoint fl(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fl[static_cast<std::size_t>(i)] = floor_div(y[static_cast<std::size_t>(i)], det_);
    const GridPoint shift = base_.apply(fl);
    GridPoint p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] - shift[static_cast<std::size_t>(i)];
    table.representatives.push_back(std::move(p));

    int axis = n - 1;
    while (axis >= 0) {
      auto& v = r[static_cast<std::size_t>(axis)];
      if (++v < extent[static_cast<std::size_t>(axis)]) break;
      v = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  std::sort(table.representatives.begin(), table.representatives.end());
  return table;
}

double covolume(const LatticeSpec& spec) { return spec.covolume(); }
CosetTable coset_representatives(const LatticeSpec& spec) { return spec.coset_representatives(); }
bool contains(const LatticeSpec& spec, std::span<const Coord> point) { return spec.contains(point); }

}  // namespace tailcluster
