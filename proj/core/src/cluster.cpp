#include "tailcluster/cluster.hpp"

#include <cmath>
#include <string>

#include "tailcluster/errors.hpp"

namespace tailcluster {

namespace {

constexpr std::pair<ClusterMethod, std::string_view> kMethodNames[] = {
    {ClusterMethod::ffd_theta, "ffd_theta"},
    {ClusterMethod::ffd_y, "ffd_y"},
    {ClusterMethod::ffd_z, "ffd_z"},
    {ClusterMethod::ffd_tilted_y, "ffd_tilted_y"},
    {ClusterMethod::hoff_involution_theta, "hoff_involution_theta"},
    {ClusterMethod::hoff_anchor_y, "hoff_anchor_y"},
    {ClusterMethod::hoff_involution_z, "hoff_involution_z"},
};

}  // namespace

std::string_view to_string(ClusterMethod method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "unknown";
}

ClusterMethod parse_cluster_method(std::string_view text) {
  for (const auto& [m, name] : kMethodNames) {
    if (name == text) return m;
  }
  throw ConfigError("unknown construction '" + std::string(text) + "'");
}

std::string_view to_string(AnchorKind anchor) {
  return anchor == AnchorKind::infargsup ? "infargsup" : "first_exceedance";
}

AnchorKind parse_anchor(std::string_view text) {
  if (text == "infargsup") return AnchorKind::infargsup;
  if (text == "first_exceedance") return AnchorKind::first_exceedance;
  throw ConfigError("unknown anchor '" + std::string(text) + "'");
}

const std::vector<ClusterMethod>& all_cluster_methods() {
  static const std::vector<ClusterMethod> methods = [] {
    std::vector<ClusterMethod> m;
    for (const auto& [method, name] : kMethodNames) m.push_back(method);
    return m;
  }();
  return methods;
}

void ClusterConstructionSpec::validate(const ModelSpec& model) const {
  if (!(b >= 1.0) || !std::isfinite(b)) throw ConfigError("b must be a finite number >= 1");
  if (!std::isfinite(tau) || tau < 0.0 || tau > model.alpha) throw ConfigError("tau must lie in [0, alpha]");
  if (lattice.dim() != model.dim_l) throw ConfigError("lattice dimension does not match the model");
  if (mode == ConstructionMode::conditional && !(event_probability > 0.0 && event_probability <= 1.0)) {
    throw ConfigError("conditional construction needs an event probability in (0, 1]");
  }
  if (max_attempts == 0) throw ConfigError("max_attempts must be positive");
}

ClusterBuilder::ClusterBuilder(ClusterConstructionSpec spec, const FieldSampler& sampler)
    : spec_(std::move(spec)), sampler_(sampler), functionals_(sampler.window(), spec_.lattice) {
  spec_.validate(sampler.model());
  if (spec_.lattice.grid_spacing() != sampler.model().grid_spacing) {
    throw ConfigError("lattice grid spacing must match the model's delta");
  }
}

WeightedDraw ClusterBuilder::draw_weighted(RandomStream& stream) const {
  const double alpha = sampler_.alpha();
  const auto index = static_cast<double>(spec_.lattice.index());
  const double b = spec_.b;
  const double tau = spec_.tau;
  const std::size_t origin = sampler_.window().origin_index();
  auto zero = [&] { return WeightedDraw{sampler_.zero_field(), 0.0}; };

  switch (spec_.method) {
    case ClusterMethod::ffd_theta: {
      WeightedDraw d = sampler_.sample_Theta(stream);
      if (d.weight == 0.0) return d;
      const PathNorms p = PathNorms::of(d.sample);
      const double s = functionals_.sum_alpha(p, alpha);
      if (!(s > 0.0)) throw ContractViolation("ffd_theta: S_L(Theta) = 0 on a positive-weight draw");
      d.sample.scale(std::pow(index * s, -1.0 / alpha));
      return d;
    }
    case ClusterMethod::ffd_y: {
      WeightedDraw d = sampler_.sample_Y(stream);
      if (d.weight == 0.0) return d;
      const PathNorms p = PathNorms::of(d.sample);
      const double m = functionals_.sup(p);
      if (!(m > b)) return zero();
      const double bsum = functionals_.exceedance_sum(p, tau);
      if (!(bsum > 0.0)) throw ContractViolation("ffd_y: B_L(Y) = 0 on a positive-weight draw");
      const double c = std::pow(b, alpha) * std::pow(p.norms[origin], tau) / (index * std::pow(m, alpha) * bsum);
      d.sample.scale(std::pow(c, 1.0 / alpha));
      return d;
    }
    case ClusterMethod::ffd_z: {
      WeightedDraw d{sampler_.sample_Z(stream), 1.0};
      const PathNorms p = PathNorms::of(d.sample);
      const double z0 = p.norms[origin];
      if (z0 == 0.0) return zero();
      const double s = functionals_.sum_alpha(p, alpha);
      if (!(s > 0.0)) throw ContractViolation("ffd_z: S_L(Z) = 0 with ||Z(0)|| > 0");
      d.sample.scale(std::pow(std::pow(z0, alpha) / (index * s), 1.0 / alpha));
      return d;
    }
    case ClusterMethod::ffd_tilted_y: {
      WeightedDraw d = sampler_.sample_Y(stream);
      if (d.weight == 0.0) return d;
      const PathNorms p = PathNorms::of(d.sample);
      const double m = functionals_.sup(p);
      if (!(m > b)) return zero();
      const double bsum = functionals_.exceedance_sum(p, tau);
      if (!(bsum > 0.0)) throw ContractViolation("ffd_tilted_y: B_L(Y) = 0 on a positive-weight draw");
      d.weight *= std::pow(p.norms[origin], tau) / (index * bsum);
      d.sample.scale(b / m);
      return d;
    }
    case ClusterMethod::hoff_involution_theta: {
      WeightedDraw d = sampler_.sample_Theta(stream);
      if (d.weight == 0.0) return d;
      const auto j = functionals_.infargsup(PathNorms::of(d.sample));
      if (!j || *j != origin) return zero();
      d.weight /= index;
      return d;
    }
    case ClusterMethod::hoff_anchor_y: {
      WeightedDraw d = sampler_.sample_Y(stream);
      if (d.weight == 0.0) return d;
      const PathNorms p = PathNorms::of(d.sample);
      const auto j = spec_.anchor == AnchorKind::first_exceedance ? functionals_.first_exceedance(p)
                                                                   : functionals_.infargsup(p);
      const double m = functionals_.sup(p);
      if (!j || *j != origin || !(m > b)) return zero();
      d.weight *= std::pow(b, alpha) / index;
      d.sample.scale(1.0 / m);
      return d;
    }
    case ClusterMethod::hoff_involution_z: {
      WeightedDraw d{sampler_.sample_Z(stream), 1.0};
      const auto j = functionals_.infargsup(PathNorms::of(d.sample));
      if (!j || *j != origin) return zero();
      d.weight /= index;
      return d;
    }
  }
  return zero();
}

WeightedDraw ClusterBuilder::draw(RandomStream& stream) const {
  if (spec_.mode == ConstructionMode::weighted) return draw_weighted(stream);
  for (std::size_t attempt = 1; attempt <= spec_.max_attempts; ++attempt) {
    WeightedDraw d = draw_weighted(stream);
    if (d.weight > 0.0) {
      d.weight *= spec_.event_probability;
      d.attempts = attempt;
      return d;
    }
  }
  throw DegenerateConditioning("construction " + std::string(to_string(spec_.method)) + ": no acceptance in " +
                               std::to_string(spec_.max_attempts) + " draws");
}

WeightedDraw construct_Q(const ClusterConstructionSpec& spec, const FieldSampler& sampler, RandomStream& stream) {
  return ClusterBuilder(spec, sampler).draw(stream);
}

WeightedDraw random_shift(const WeightedDraw& q, const ShiftDistribution& shift_dist, double alpha,
                          RandomStream& stream, const std::optional<Window>& target) {
  if (shift_dist.dim() != q.sample.dim_l()) throw ConfigError("shift dimension does not match the field");
  const GridPoint n = shift_dist.sample(stream);
  const double density = shift_dist.density(n);
  if (!(density > 0.0)) throw ContractViolation("shift drawn outside its own support");
  double lost = 0.0;
  WeightedDraw out;
  out.sample = shift_into(q.sample, n, target ? *target : q.sample.window(), alpha, &lost);
  out.sample.scale(std::pow(density, -1.0 / alpha));
  out.weight = q.weight;
  out.attempts = q.attempts;
  out.lost_mass = q.lost_mass + lost;
  return out;
}

WeightedDraw m_truncate(const WeightedDraw& q, double m) {
  if (!(m > 0.0)) throw ConfigError("truncation radius m must be positive");
  WeightedDraw out = q;
  const Window& w = out.sample.window();
  const double delta = out.sample.grid_spacing();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const GridPoint t = w.point_at(i);
    double l1 = 0.0;
    for (Coord c : t) l1 += static_cast<double>(c < 0 ? -c : c);
    if (l1 * delta > m) {
      for (double& v : out.sample.value(i)) v = 0.0;
    }
  }
  return out;
}

WeightedDraw fold_weight(const WeightedDraw& q, double alpha) {
  WeightedDraw out = q;
  out.sample.scale(std::pow(q.weight, 1.0 / alpha));
  out.weight = 1.0;
  return out;
}

double gamma_value(const FieldSample& f, const GammaFunctional& gamma, double alpha) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f.norm_at(i);
    if (gamma.kind == GammaKind::p_sum) {
      if (v > 0.0) acc += std::pow(v, gamma.p);
    } else {
      acc = std::max(acc, v);
    }
  }
  if (gamma.kind == GammaKind::p_sum) return acc * std::pow(f.grid_spacing(), f.dim_l());
  return std::pow(acc, alpha);
}

WeightedDraw spectral_cluster_transform(const WeightedDraw& q, const GammaFunctional& gamma, double alpha) {
  if (gamma.kind == GammaKind::p_sum && !(gamma.p > 0.0)) throw ConfigError("p must be positive");
  if (q.weight == 0.0) return q;
  const double g = gamma_value(q.sample, gamma, alpha);
  if (!(g > 0.0) || !std::isfinite(g)) throw ContractViolation("spectral cluster transform: Gamma(Q) = 0");
  const double xi = gamma.kind == GammaKind::p_sum ? alpha / gamma.p : 1.0;
  WeightedDraw out = q;
  out.weight *= std::pow(g, xi);
  out.sample.scale(std::pow(g, -xi / alpha));
  return out;
}

}  // namespace tailcluster
