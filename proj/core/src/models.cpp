#include "tailcluster/models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <sstream>

#include "tailcluster/errors.hpp"

namespace tailcluster {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::brown_resnick: return "brown_resnick";
    case ModelKind::ar1_tail_chain: return "ar1_tail_chain";
    case ModelKind::moving_max: return "moving_max";
    case ModelKind::deterministic_q: return "deterministic_q";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  for (ModelKind k : {ModelKind::brown_resnick, ModelKind::ar1_tail_chain, ModelKind::moving_max,
                      ModelKind::deterministic_q}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

namespace {

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

void validate_vectors(const std::vector<std::vector<double>>& rows, int d, const char* what) {
  if (rows.empty()) throw ConfigError(std::string(what) + " must not be empty");
  bool any_positive = false;
  for (const auto& r : rows) {
    if (r.size() != static_cast<std::size_t>(d)) {
      throw ConfigError(std::string(what) + ": every entry needs " + std::to_string(d) + " components");
    }
    for (double v : r) {
      if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string(what) + " must be finite and nonnegative");
      if (v > 0.0) any_positive = true;
    }
  }
  if (!any_positive) throw ConfigError(std::string(what) + " must have at least one positive entry");
}

}  // namespace

void ModelSpec::validate() const {
  if (!positive_finite(alpha)) throw ConfigError("alpha must be positive");
  if (dim_l < 1) throw ConfigError("dim must be a positive integer");
  if (dim_d < 1) throw ConfigError("value dimension must be a positive integer");
  if (!positive_finite(grid_spacing)) throw ConfigError("delta must be positive");
  norm.validate(dim_d);
  switch (kind) {
    case ModelKind::brown_resnick:
      if (dim_d != 1) throw ConfigError("brown_resnick supports scalar fields only (value_dim = 1)");
      if (!positive_finite(variogram_slope)) throw ConfigError("variogram_slope must be positive");
      if (variogram == VariogramKind::power) {
        if (dim_l != 1) throw ConfigError("power variogram is available for l = 1 only");
        if (!(hurst > 0.0 && hurst <= 1.0)) throw ConfigError("hurst must lie in (0, 1]");
      }
      break;
    case ModelKind::ar1_tail_chain:
      if (dim_l != 1 || dim_d != 1) throw ConfigError("ar1_tail_chain is a scalar chain on Z");
      if (!(phi > 0.0 && phi < 1.0)) throw ConfigError("phi must lie in (0, 1)");
      break;
    case ModelKind::moving_max:
      if (dim_l != 1) throw ConfigError("moving_max is defined on Z");
      validate_vectors(coeffs, dim_d, "coeffs");
      break;
    case ModelKind::deterministic_q:
      if (dim_l != 1) throw ConfigError("deterministic_q is defined on Z");
      validate_vectors(q_values, dim_d, "q_values");
      break;
  }
  if (!(decay_tail_mass > 0.0 && decay_tail_mass < 1.0)) throw ConfigError("decay_tail_mass must lie in (0, 1)");
  if (kind != ModelKind::brown_resnick && grid_spacing != 1.0) {
    throw ConfigError("delta applies to brown_resnick models only");
  }
}

double ModelSpec::variogram_at(std::span<const double> h) const {
  if (variogram == VariogramKind::power) return variogram_slope * std::pow(std::fabs(h[0]), 2.0 * hurst);
  double s = 0.0;
  for (double v : h) s += std::fabs(v);
  return variogram_slope * s;
}

bool validate_dissipative(const ModelSpec& model) {
  if (model.kind != ModelKind::brown_resnick) {
    throw ConfigError("dissipativity check applies to brown_resnick models");
  }
  model.validate();
  const double bound = 8.0 * model.dim_l;
  if (model.variogram == VariogramKind::linear) return model.variogram_slope > bound;
  const double exponent = 2.0 * model.hurst;
  if (exponent > 1.0) return true;
  if (exponent < 1.0) return false;
  return model.variogram_slope > bound;
}

FieldSampler::FieldSampler(ModelSpec model, Window window) : model_(std::move(model)), window_(std::move(window)) {
  model_.validate();
  if (window_.dim() != model_.dim_l) throw ConfigError("window dimension does not match the model");
  if (model_.kind == ModelKind::brown_resnick) {
    build_gaussian();
  } else {
    build_profile();
  }
}

FieldSample FieldSampler::zero_field() const {
  return FieldSample(window_, model_.dim_d, model_.grid_spacing, model_.norm);
}

void FieldSampler::build_profile() {
  const double alpha = model_.alpha;
  switch (model_.kind) {
    case ModelKind::moving_max:
      profile_ = model_.coeffs;
      profile_offset_ = 0;
      break;
    case ModelKind::deterministic_q:
      profile_ = model_.q_values;
      profile_offset_ = model_.q_offset;
      break;
    case ModelKind::ar1_tail_chain: {
      const double phi = model_.phi;
      // phi^(alpha (r+1)) < tail mass
      const auto radius =
          static_cast<std::size_t>(std::ceil(std::log(model_.decay_tail_mass) / (alpha * std::log(phi))));
      profile_.clear();
      for (std::size_t s = 0; s <= radius; ++s) profile_.push_back({std::pow(phi, static_cast<double>(s))});
      profile_offset_ = 0;
      break;
    }
    case ModelKind::brown_resnick:
      return;
  }
  double total = 0.0;
  profile_alpha_mass_.clear();
  for (const auto& v : profile_) {
    const double m = std::pow(model_.norm(v), alpha);
    profile_alpha_mass_.push_back(m);
    total += m;
  }
  const double scale = std::pow(total, -1.0 / alpha);
  for (auto& v : profile_) {
    for (double& x : v) x *= scale;
  }
  for (double& m : profile_alpha_mass_) m /= total;
}

void FieldSampler::build_gaussian() {
  const std::size_t origin = window_.origin_index();
  const double delta = model_.grid_spacing;
  const int l = window_.dim();
  drift_.assign(window_.size(), 0.0);
  gauss_points_.clear();
  std::vector<std::vector<double>> pos;
  for (std::size_t i = 0; i < window_.size(); ++i) {
    const GridPoint p = window_.point_at(i);
    std::vector<double> x(static_cast<std::size_t>(l));
    for (int k = 0; k < l; ++k) x[static_cast<std::size_t>(k)] = delta * static_cast<double>(p[static_cast<std::size_t>(k)]);
    drift_[i] = 0.5 * model_.alpha * model_.variogram_at(x);
    if (i == origin) continue;
    gauss_points_.push_back(i);
    pos.push_back(std::move(x));
  }
  const auto n = static_cast<Eigen::Index>(gauss_points_.size());
  if (n == 0) return;
  Eigen::MatrixXd cov(n, n);
  std::vector<double> diff(static_cast<std::size_t>(l));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gi = model_.variogram_at(pos[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double gj = model_.variogram_at(pos[static_cast<std::size_t>(j)]);
      for (int k = 0; k < l; ++k) {
        diff[static_cast<std::size_t>(k)] = pos[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] -
                                            pos[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      }
      const double c = 0.5 * (gi + gj - model_.variogram_at(diff));
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  double jitter = 0.0;
  double next = 1e-12;
  while (llt.info() != Eigen::Success || !llt.matrixL().toDenseMatrix().allFinite()) {
    if (next > 1e-6 * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "covariance not positive definite after jitter up to 1e-6 (" << n << " points, max diagonal "
          << cov.diagonal().maxCoeff() << ")";
      throw NumericalError(msg.str());
    }
    jitter = next;
    next *= 10.0;
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
  }
  jitter_used_ = jitter;
  const Eigen::MatrixXd low = llt.matrixL();
  chol_.assign(static_cast<std::size_t>(n * n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) chol_[static_cast<std::size_t>(i * n + j)] = low(i, j);
}

FieldSample FieldSampler::sample_Z(RandomStream& stream) const {
  FieldSample z = zero_field();
  if (model_.kind == ModelKind::brown_resnick) {
    const std::size_t n = gauss_points_.size();
    std::vector<double> g(n);
    for (double& v : g) v = stream.standard_normal();
    z.value(window_.origin_index())[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double w = 0.0;
      const double* row = chol_.data() + i * n;
      for (std::size_t j = 0; j <= i; ++j) w += row[j] * g[j];
      const std::size_t flat = gauss_points_[i];
      z.value(flat)[0] = std::exp(w - drift_[flat]);
    }
    return z;
  }
  // Random shift of the deterministic profile, uniform over every shift that
  // can reach the window.
  const Coord a = window_.half_width()[0];
  const Coord k = static_cast<Coord>(profile_.size()) - 1;
  const Coord lo = -a - profile_offset_ - k;
  const Coord hi = a - profile_offset_;
  const auto count = static_cast<std::uint64_t>(hi - lo + 1);
  const Coord shift = lo + static_cast<Coord>(stream.uniform() * static_cast<double>(count));
  const double scale = std::pow(static_cast<double>(count), 1.0 / model_.alpha);
  for (std::size_t s = 0; s < profile_.size(); ++s) {
    const Coord t = shift + profile_offset_ + static_cast<Coord>(s);
    if (t < -a || t > a) continue;
    auto dst = z.value(static_cast<std::size_t>(t + a));
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = profile_[s][c] * scale;
  }
  return z;
}

WeightedDraw FieldSampler::theta_from_profile(RandomStream& stream) const {
  const std::size_t j = stream.discrete(profile_alpha_mass_.data(), profile_alpha_mass_.size(), 1.0);
  const double anchor = model_.norm(profile_[j]);
  FieldSample theta = zero_field();
  const Coord a = window_.half_width()[0];
  for (std::size_t s = 0; s < profile_.size(); ++s) {
    const Coord t = static_cast<Coord>(s) - static_cast<Coord>(j);
    if (t < -a || t > a) continue;
    auto dst = theta.value(static_cast<std::size_t>(t + a));
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = profile_[s][c] / anchor;
  }
  return {std::move(theta), 1.0};
}

WeightedDraw FieldSampler::theta_ar1(RandomStream& stream) const {
  const double phi = model_.phi;
  const double alpha = model_.alpha;
  // Backward survival: P(K > k) = phi^(alpha k), K >= 1.
  const double u = stream.uniform_open();
  const double kill = 1.0 + std::floor(std::log(u) / (alpha * std::log(phi)));
  FieldSample theta = zero_field();
  const Coord a = window_.half_width()[0];
  for (Coord t = -a; t <= a; ++t) {
    if (t < 0 && static_cast<double>(-t) >= kill) continue;
    theta.value(static_cast<std::size_t>(t + a))[0] = std::pow(phi, static_cast<double>(t));
  }
  return {std::move(theta), 1.0};
}

WeightedDraw FieldSampler::sample_Theta(RandomStream& stream) const {
  switch (model_.kind) {
    case ModelKind::brown_resnick:
      return {sample_Z(stream), 1.0};
    case ModelKind::ar1_tail_chain:
      return theta_ar1(stream);
    case ModelKind::moving_max:
    case ModelKind::deterministic_q:
      return theta_from_profile(stream);
  }
  return sample_Theta_by_tilting(stream);
}

WeightedDraw FieldSampler::sample_Theta_by_tilting(RandomStream& stream) const {
  FieldSample z = sample_Z(stream);
  const double z0 = z.norm_at(window_.origin_index());
  if (z0 == 0.0) return {zero_field(), 0.0};
  z.scale(1.0 / z0);
  return {std::move(z), std::pow(z0, model_.alpha)};
}

WeightedDraw FieldSampler::sample_Y(RandomStream& stream) const {
  WeightedDraw d = sample_Theta(stream);
  const double r = std::pow(stream.uniform_open(), -1.0 / model_.alpha);
  d.sample.scale(r);
  return d;
}

FieldSample sample_Z(const ModelSpec& model, const Window& window, RandomStream& stream) {
  return FieldSampler(model, window).sample_Z(stream);
}

WeightedDraw sample_Theta(const ModelSpec& model, const Window& window, RandomStream& stream) {
  return FieldSampler(model, window).sample_Theta(stream);
}

WeightedDraw sample_Y(const ModelSpec& model, const Window& window, RandomStream& stream) {
  return FieldSampler(model, window).sample_Y(stream);
}

}  // namespace tailcluster
