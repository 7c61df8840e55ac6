#pragma once

#include <optional>
#include <string_view>

#include "tailcluster/lattice.hpp"
#include "tailcluster/models.hpp"
#include "tailcluster/shift.hpp"

namespace tailcluster {

enum class ClusterMethod {
  ffd_theta,
  ffd_y,
  ffd_z,
  ffd_tilted_y,
  hoff_involution_theta,
  hoff_anchor_y,
  hoff_involution_z,
};

enum class AnchorKind { infargsup, first_exceedance };

/// weighted: every draw is kept and the event indicator goes into the weight.
/// conditional: draws are resampled until the event holds and the weight
/// carries the supplied event probability.
enum class ConstructionMode { weighted, conditional };

std::string_view to_string(ClusterMethod method);
ClusterMethod parse_cluster_method(std::string_view text);
std::string_view to_string(AnchorKind anchor);
AnchorKind parse_anchor(std::string_view text);
const std::vector<ClusterMethod>& all_cluster_methods();

struct ClusterConstructionSpec {
  ClusterMethod method = ClusterMethod::ffd_theta;
  LatticeSpec lattice = LatticeSpec::ambient(1);
  double b = 1.0;
  double tau = 0.0;
  AnchorKind anchor = AnchorKind::first_exceedance;
  ConstructionMode mode = ConstructionMode::weighted;
  /// Probability of the conditioning event, required in conditional mode.
  double event_probability = 0.0;
  std::size_t max_attempts = 1'000'000;

  void validate(const ModelSpec& model) const;
};

/// Draws of the cluster field Q for one construction, model and window.
///
/// A draw (F, w) represents Q through E[H(Q)] = E[w H(F)] for every
/// alpha-homogeneous H.
class ClusterBuilder {
 public:
  ClusterBuilder(ClusterConstructionSpec spec, const FieldSampler& sampler);

  const ClusterConstructionSpec& spec() const { return spec_; }
  const FieldSampler& sampler() const { return sampler_; }

  WeightedDraw draw(RandomStream& stream) const;
  /// One weighted-mode draw; the event holds iff the weight is positive.
  WeightedDraw draw_weighted(RandomStream& stream) const;

 private:
  ClusterConstructionSpec spec_;
  const FieldSampler& sampler_;
  LatticeFunctionals functionals_;
};

WeightedDraw construct_Q(const ClusterConstructionSpec& spec, const FieldSampler& sampler, RandomStream& stream);

/// Z_N = B^N F / p_N(N)^(1/alpha) on `target` (defaults to F's window); weight inherited.
WeightedDraw random_shift(const WeightedDraw& q, const ShiftDistribution& shift_dist, double alpha,
                          RandomStream& stream, const std::optional<Window>& target = std::nullopt);

/// Zero the field where ||t||_1 * delta > m.
WeightedDraw m_truncate(const WeightedDraw& q, double m);

/// (F, w) -> (w^(1/alpha) F, 1): the same law for alpha-homogeneous functionals,
/// as a plain field.
WeightedDraw fold_weight(const WeightedDraw& q, double alpha);

enum class GammaKind { p_sum, sup_alpha };
struct GammaFunctional {
  GammaKind kind = GammaKind::sup_alpha;
  double p = 1.0;
};

/// p_sum: sum ||f(t)||^p delta^l; sup_alpha: sup ||f(t)||^alpha.
double gamma_value(const FieldSample& f, const GammaFunctional& gamma, double alpha);
/// Weight times Gamma^xi, field over Gamma^(xi / alpha); xi = alpha / p or 1.
WeightedDraw spectral_cluster_transform(const WeightedDraw& q, const GammaFunctional& gamma, double alpha);

}  // namespace tailcluster
