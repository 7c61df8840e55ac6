#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tailcluster/field.hpp"
#include "tailcluster/random.hpp"

namespace tailcluster {

enum class ModelKind { brown_resnick, ar1_tail_chain, moving_max, deterministic_q };
enum class VariogramKind { linear, power };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Declarative description of a field law.
struct ModelSpec {
  ModelKind kind = ModelKind::ar1_tail_chain;
  double alpha = 1.0;
  NormSpec norm;
  int dim_l = 1;
  int dim_d = 1;
  /// Grid spacing of the ambient grid (Brown-Resnick only; discrete models live on Z^l).
  double grid_spacing = 1.0;

  // ar1_tail_chain
  double phi = 0.5;

  // moving_max: one d-vector per lag 0..k
  std::vector<std::vector<double>> coeffs;

  // brown_resnick: gamma(h) = slope * ||h||_1, or slope * |h|^(2 hurst) for l = 1
  VariogramKind variogram = VariogramKind::linear;
  double variogram_slope = 10.0;
  double hurst = 0.5;

  // deterministic_q: one d-vector per support point offset, offset + 1, ...
  std::vector<std::vector<double>> q_values;
  Coord q_offset = 0;

  /// Tail mass cut off when a geometric profile is truncated to a finite support.
  double decay_tail_mass = 1e-12;

  /// Throws ConfigError on any domain violation.
  void validate() const;
  /// gamma(h) for a displacement in real units.
  double variogram_at(std::span<const double> h) const;
  bool is_discrete() const { return kind != ModelKind::brown_resnick; }
};

/// Sufficient condition for pure dissipativity of a Brown-Resnick model:
/// the asymptotic linear slope of the variogram strictly exceeds 8 l.
bool validate_dissipative(const ModelSpec& model);

/// A field realization with a nonnegative importance weight.
///
/// For a target law P and a functional H, E_P[H] = E[weight * H(sample)].
struct WeightedDraw {
  FieldSample sample;
  double weight = 1.0;
  std::size_t attempts = 1;  // draws consumed by rejection loops
  double lost_mass = 0.0;    // alpha-mass pushed outside the window by shifting
};

/// Samplers for Z, Theta and Y of one model on one window.
///
/// Construction does all per-window precomputation (the Cholesky factor for
/// Brown-Resnick models); afterwards the object is immutable and can be
/// shared across threads.
class FieldSampler {
 public:
  FieldSampler(ModelSpec model, Window window);

  const ModelSpec& model() const { return model_; }
  const Window& window() const { return window_; }
  double alpha() const { return model_.alpha; }

  FieldSample sample_Z(RandomStream& stream) const;
  /// Exact spectral-tail sampler (unit weights).
  WeightedDraw sample_Theta(RandomStream& stream) const;
  /// Y = R Theta with R = U^(-1/alpha).
  WeightedDraw sample_Y(RandomStream& stream) const;
  /// Generic tilting: Z / ||Z(0)|| with weight ||Z(0)||^alpha.
  WeightedDraw sample_Theta_by_tilting(RandomStream& stream) const;

  /// Deterministic cluster profile of a discrete model, normalized so that
  /// sum ||q(s)||^alpha = 1; support starts at profile_offset().
  const std::vector<std::vector<double>>& profile() const { return profile_; }
  Coord profile_offset() const { return profile_offset_; }

  FieldSample zero_field() const;
  /// Diagonal jitter that made the Gaussian covariance factorizable.
  double jitter_used() const { return jitter_used_; }

 private:
  void build_profile();
  void build_gaussian();
  WeightedDraw theta_from_profile(RandomStream& stream) const;
  WeightedDraw theta_ar1(RandomStream& stream) const;

  ModelSpec model_;
  Window window_;
  std::vector<std::vector<double>> profile_;
  std::vector<double> profile_alpha_mass_;  // ||q(s)||^alpha
  Coord profile_offset_ = 0;

  // Brown-Resnick: lower Cholesky factor over non-origin window points.
  std::vector<std::size_t> gauss_points_;
  std::vector<double> chol_;  // row-major lower triangle, n x n
  std::vector<double> drift_;  // alpha * gamma(t) / 2 per window point
  double jitter_used_ = 0.0;
};

FieldSample sample_Z(const ModelSpec& model, const Window& window, RandomStream& stream);
WeightedDraw sample_Theta(const ModelSpec& model, const Window& window, RandomStream& stream);
WeightedDraw sample_Y(const ModelSpec& model, const Window& window, RandomStream& stream);

}  // namespace tailcluster
