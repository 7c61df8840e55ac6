#include "tailcluster/field.hpp"

#include <algorithm>
#include <cmath>

#include "tailcluster/errors.hpp"

namespace tailcluster {

Window::Window(std::vector<Coord> half_width) : half_width_(std::move(half_width)) {
  if (half_width_.empty()) throw ConfigError("window must have at least one axis");
  stride_.assign(half_width_.size(), 1);
  size_ = 1;
  for (std::size_t i = half_width_.size(); i-- > 0;) {
    if (half_width_[i] < 0) throw ConfigError("window half-width must be nonnegative");
    stride_[i] = size_;
    size_ *= static_cast<std::size_t>(2 * half_width_[i] + 1);
  }
}

Window Window::cube(int dim, Coord half_width) {
  return Window(std::vector<Coord>(static_cast<std::size_t>(dim), half_width));
}

bool Window::contains(std::span<const Coord> point) const {
  if (point.size() != half_width_.size()) return false;
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (point[i] < -half_width_[i] || point[i] > half_width_[i]) return false;
  }
  return true;
}

std::size_t Window::flat_index(std::span<const Coord> point) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < half_width_.size(); ++i) {
    idx += static_cast<std::size_t>(point[i] + half_width_[i]) * stride_[i];
  }
  return idx;
}

GridPoint Window::point_at(std::size_t flat) const {
  GridPoint p(half_width_.size());
  for (std::size_t i = 0; i < half_width_.size(); ++i) {
    p[i] = static_cast<Coord>(flat / stride_[i]) - half_width_[i];
    flat %= stride_[i];
  }
  return p;
}

double NormSpec::operator()(std::span<const double> x) const {
  switch (kind) {
    case NormKind::absolute:
      return std::fabs(x[0]);
    case NormKind::euclidean: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return std::sqrt(s);
    }
    case NormKind::max_component: {
      double m = 0.0;
      for (double v : x) m = std::max(m, std::fabs(v));
      return m;
    }
    case NormKind::weighted_sum: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * std::fabs(x[i]);
      return s;
    }
  }
  return 0.0;
}

void NormSpec::validate(int d) const {
  if (kind == NormKind::absolute && d != 1) throw ConfigError("absolute-value norm requires d = 1");
  if (kind == NormKind::weighted_sum) {
    if (weights.size() != static_cast<std::size_t>(d)) throw ConfigError("weighted_sum norm needs one weight per component");
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("weighted_sum norm weights must be positive");
    }
  }
}

FieldSample::FieldSample(Window window, int value_dim, double grid_spacing, NormSpec norm)
    : window_(std::move(window)), value_dim_(value_dim), grid_spacing_(grid_spacing), norm_(std::move(norm)) {
  if (value_dim_ <= 0) throw ConfigError("field value dimension must be positive");
  norm_.validate(value_dim_);
  values_.assign(window_.size() * static_cast<std::size_t>(value_dim_), 0.0);
  covered_.assign(window_.size(), 1);
}

std::span<const double> FieldSample::value(std::size_t flat) const {
  return {values_.data() + flat * static_cast<std::size_t>(value_dim_), static_cast<std::size_t>(value_dim_)};
}

std::span<double> FieldSample::value(std::size_t flat) {
  return {values_.data() + flat * static_cast<std::size_t>(value_dim_), static_cast<std::size_t>(value_dim_)};
}

double FieldSample::norm_at(std::size_t flat) const {
  if (!covered_[flat]) return 0.0;
  return norm_(value(flat));
}

double FieldSample::norm_at(std::span<const Coord> point) const {
  if (!window_.contains(point)) return 0.0;
  return norm_at(window_.flat_index(point));
}

void FieldSample::scale(double c) {
  for (double& v : values_) v *= c;
}

FieldSample FieldSample::scaled(double c) const {
  FieldSample out = *this;
  out.scale(c);
  return out;
}

FieldSample shift(const FieldSample& f, std::span<const Coord> h) {
  const Window& w = f.window();
  FieldSample g(w, f.dim_d(), f.grid_spacing(), f.norm_spec());
  GridPoint src(static_cast<std::size_t>(w.dim()));
  for (std::size_t i = 0; i < w.size(); ++i) {
    const GridPoint t = w.point_at(i);
    for (std::size_t k = 0; k < t.size(); ++k) src[k] = t[k] - h[k];
    if (!w.contains(src)) {
      g.set_covered(i, false);
      continue;
    }
    const std::size_t j = w.flat_index(src);
    if (!f.covered(j)) {
      g.set_covered(i, false);
      continue;
    }
    std::ranges::copy(f.value(j), g.value(i).begin());
  }
  return g;
}

FieldSample shift_into(const FieldSample& f, std::span<const Coord> h, const Window& target, double alpha,
                       double* lost_mass) {
  FieldSample g(target, f.dim_d(), f.grid_spacing(), f.norm_spec());
  const Window& src_w = f.window();
  double lost = 0.0;
  GridPoint dst(static_cast<std::size_t>(src_w.dim()));
  for (std::size_t j = 0; j < src_w.size(); ++j) {
    if (!f.covered(j)) continue;
    const double nv = f.norm_at(j);
    if (nv == 0.0) continue;
    const GridPoint s = src_w.point_at(j);
    for (std::size_t k = 0; k < s.size(); ++k) dst[k] = s[k] + h[k];
    if (!target.contains(dst)) {
      lost += std::pow(nv, alpha);
      continue;
    }
    std::ranges::copy(f.value(j), g.value(target.flat_index(dst)).begin());
  }
  if (lost_mass) *lost_mass = lost * std::pow(f.grid_spacing(), src_w.dim());
  return g;
}

std::vector<unsigned char> lattice_mask(const Window& window, const LatticeSpec& lattice) {
  std::vector<unsigned char> mask(window.size(), 1);
  if (lattice.is_ambient()) return mask;
  for (std::size_t i = 0; i < window.size(); ++i) mask[i] = lattice.contains(window.point_at(i)) ? 1 : 0;
  return mask;
}

namespace {

void check_dims(const FieldSample& f, const LatticeSpec& lattice) {
  if (f.dim_l() != lattice.dim()) throw ConfigError("lattice and field dimensions differ");
}

}  // namespace

double sum_alpha(const FieldSample& f, const LatticeSpec& lattice, double alpha) {
  check_dims(f, lattice);
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  const auto mask = lattice_mask(f.window(), lattice);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask[i] || !f.covered(i)) continue;
    const double v = f.norm_at(i);
    if (v > 0.0) s += std::pow(v, alpha);
  }
  return s * std::pow(f.grid_spacing(), f.dim_l());
}

double exceedance_sum(const FieldSample& f, const LatticeSpec& lattice, double tau, double b) {
  check_dims(f, lattice);
  if (!(b > 0.0)) throw ConfigError("threshold scale b must be positive");
  const auto mask = lattice_mask(f.window(), lattice);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask[i] || !f.covered(i)) continue;
    const double v = b * f.norm_at(i);
    if (v >= 1.0) s += std::pow(v, tau);
  }
  return s * std::pow(f.grid_spacing(), f.dim_l());
}

double sup_norm(const FieldSample& f, const LatticeSpec& lattice) {
  check_dims(f, lattice);
  const auto mask = lattice_mask(f.window(), lattice);
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask[i] && f.covered(i)) m = std::max(m, f.norm_at(i));
  }
  return m;
}

std::optional<GridPoint> infargsup(const FieldSample& f, const LatticeSpec& lattice) {
  check_dims(f, lattice);
  const auto mask = lattice_mask(f.window(), lattice);
  double m = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!mask[i] || !f.covered(i)) continue;
    const double v = f.norm_at(i);
    if (v > m) {
      m = v;
      arg = i;
    }
  }
  if (m == 0.0) return std::nullopt;
  return f.window().point_at(arg);
}

std::optional<GridPoint> first_exceedance(const FieldSample& f, const LatticeSpec& lattice) {
  check_dims(f, lattice);
  const auto mask = lattice_mask(f.window(), lattice);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask[i] && f.covered(i) && f.norm_at(i) > 1.0) return f.window().point_at(i);
  }
  return std::nullopt;
}

int lex_compare(std::span<const Coord> a, std::span<const Coord> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return 0;
}

bool is_origin(std::span<const Coord> point) {
  return std::ranges::all_of(point, [](Coord c) { return c == 0; });
}

PathNorms PathNorms::of(const FieldSample& f) {
  PathNorms p;
  p.norms.resize(f.size());
  p.covered.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    p.covered[i] = f.covered(i) ? 1 : 0;
    p.norms[i] = f.norm_at(i);
  }
  p.origin = f.window().origin_index();
  return p;
}

LatticeFunctionals::LatticeFunctionals(const Window& window, const LatticeSpec& lattice)
    : window_(window), lattice_(lattice), mask_(lattice_mask(window, lattice)),
      cell_volume_(std::pow(lattice.grid_spacing(), lattice.dim())) {
  if (window.dim() != lattice.dim()) throw ConfigError("lattice and window dimensions differ");
}

double LatticeFunctionals::sum_alpha(const PathNorms& p, double alpha) const {
  double s = 0.0;
  for (std::size_t i = 0; i < p.norms.size(); ++i) {
    if (mask_[i] && p.norms[i] > 0.0) s += std::pow(p.norms[i], alpha);
  }
  return s * cell_volume_;
}

double LatticeFunctionals::exceedance_sum(const PathNorms& p, double tau, double b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < p.norms.size(); ++i) {
    if (!mask_[i]) continue;
    const double v = b * p.norms[i];
    if (v >= 1.0) s += (tau == 0.0) ? 1.0 : std::pow(v, tau);
  }
  return s * cell_volume_;
}

double LatticeFunctionals::sup(const PathNorms& p) const {
  double m = 0.0;
  for (std::size_t i = 0; i < p.norms.size(); ++i) {
    if (mask_[i]) m = std::max(m, p.norms[i]);
  }
  return m;
}

double LatticeFunctionals::sup_after_origin(const PathNorms& p, bool include_origin) const {
  double m = 0.0;
  for (std::size_t i = include_origin ? p.origin : p.origin + 1; i < p.norms.size(); ++i) {
    if (mask_[i]) m = std::max(m, p.norms[i]);
  }
  return m;
}

double LatticeFunctionals::sup_before_origin(const PathNorms& p) const {
  double m = 0.0;
  for (std::size_t i = 0; i < p.origin; ++i) {
    if (mask_[i]) m = std::max(m, p.norms[i]);
  }
  return m;
}

std::optional<std::size_t> LatticeFunctionals::infargsup(const PathNorms& p) const {
  double m = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < p.norms.size(); ++i) {
    if (mask_[i] && p.norms[i] > m) {
      m = p.norms[i];
      arg = i;
    }
  }
  if (m == 0.0) return std::nullopt;
  return arg;
}

std::optional<std::size_t> LatticeFunctionals::first_exceedance(const PathNorms& p) const {
  for (std::size_t i = 0; i < p.norms.size(); ++i) {
    if (mask_[i] && p.norms[i] > 1.0) return i;
  }
  return std::nullopt;
}

}  // namespace tailcluster
