#include "tailcluster/maxstable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailcluster/errors.hpp"

namespace tailcluster {

void MaxStableSampleSpec::validate(const Window& window) const {
  if (!(stopping_epsilon > 0.0 && stopping_epsilon <= 0.1)) throw ConfigError("stopping_epsilon must lie in (0, 0.1]");
  if (points.empty()) throw ConfigError("max-stable sampling needs at least one point");
  for (const auto& p : points) {
    if (!window.contains(p)) throw ConfigError("max-stable point outside the window");
  }
  if (!(sup_moment > 0.0) || !std::isfinite(sup_moment)) throw ConfigError("sup moment estimate must be positive");
  if (max_terms == 0) throw ConfigError("max_terms must be positive");
}

MaxStableSample max_stable_sample(const DrawSource& representer, double alpha, const Window& window,
                                  const MaxStableSampleSpec& spec, RandomStream& stream) {
  spec.validate(window);
  std::vector<std::size_t> flat;
  for (const auto& p : spec.points) flat.push_back(window.flat_index(p));

  MaxStableSample out;
  out.values.assign(flat.size(), 0.0);
  double gamma = 0.0;
  for (;;) {
    gamma += stream.exponential();
    WeightedDraw z = representer(stream);
    ++out.terms;
    const double scale = std::pow(gamma, -1.0 / alpha) * std::pow(z.weight, 1.0 / alpha);
    if (scale > 0.0) {
      for (std::size_t k = 0; k < flat.size(); ++k) {
        out.values[k] = std::max(out.values[k], scale * z.sample.norm_at(flat[k]));
      }
    }
    const double m_min = *std::ranges::min_element(out.values);
    if (m_min > 0.0) {
      const double threshold = spec.sup_moment / std::pow(m_min, alpha);
      out.achieved_epsilon = threshold / gamma;
      if (gamma > threshold / spec.stopping_epsilon) return out;
    } else {
      out.achieved_epsilon = std::numeric_limits<double>::infinity();
    }
    if (out.terms >= spec.max_terms) {
      out.truncated = true;
      return out;
    }
  }
}

MaxStableSample dehaan_sample(const FieldSampler& sampler, const MaxStableSampleSpec& spec, RandomStream& stream) {
  return max_stable_sample([&](RandomStream& s) { return WeightedDraw{sampler.sample_Z(s), 1.0}; },
                           sampler.alpha(), sampler.window(), spec, stream);
}

DrawSource rosinski_representer(const ClusterBuilder& builder, const ShiftDistribution& shift_dist,
                                const Window& target) {
  const ModelSpec& model = builder.sampler().model();
  if (model.kind == ModelKind::brown_resnick && !validate_dissipative(model)) {
    throw ConfigError("Rosinski representation needs a purely dissipative model (variogram slope > 8 l)");
  }
  const double alpha = builder.sampler().alpha();
  return [&builder, shift_dist, target, alpha](RandomStream& s) {
    const WeightedDraw q = fold_weight(builder.draw(s), alpha);
    return random_shift(q, shift_dist, alpha, s, target);
  };
}

MaxStableSample rosinski_sample(const ClusterBuilder& builder, const ShiftDistribution& shift_dist,
                                const MaxStableSampleSpec& spec, RandomStream& stream) {
  const Window& w = builder.sampler().window();
  return max_stable_sample(rosinski_representer(builder, shift_dist, w), builder.sampler().alpha(), w, spec, stream);
}

namespace {

void check_levels(std::span<const GridPoint> points, std::span<const double> levels, const Window& window) {
  if (points.empty() || points.size() != levels.size()) throw ConfigError("need one positive level per point");
  for (double x : levels) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("levels must be positive");
  }
  for (const auto& p : points) {
    if (!window.contains(p)) throw ConfigError("fidi point outside the window");
  }
}

}  // namespace

FidiEstimate fidi_neglog(const DrawSource& representer, const Window& window, double alpha,
                         std::span<const GridPoint> points, std::span<const double> levels,
                         const EstimatorOptions& options) {
  check_levels(points, levels, window);
  std::vector<std::size_t> flat;
  for (const auto& p : points) flat.push_back(window.flat_index(p));
  std::vector<double> inv;
  for (double x : levels) inv.push_back(std::pow(x, -alpha));
  const PairAccumulator acc = run_chunked<PairAccumulator>(
      options.seed, options.n, options.parallel, [&](std::size_t, RandomStream& s, PairAccumulator& a) {
        const WeightedDraw z = representer(s);
        double m = 0.0;
        for (std::size_t k = 0; k < flat.size(); ++k) m = std::max(m, inv[k] * std::pow(z.sample.norm_at(flat[k]), alpha));
        a.add(z.weight, z.weight * m);
      });
  const MeanEstimate e = options.self_normalized ? acc.ratio() : acc.plain();
  return {e.value, e.std_error};
}

FidiEstimate fidi_neglog(const FieldSampler& sampler, std::span<const GridPoint> points,
                         std::span<const double> levels, const EstimatorOptions& options) {
  return fidi_neglog([&](RandomStream& s) { return WeightedDraw{sampler.sample_Z(s), 1.0}; }, sampler.window(),
                     sampler.alpha(), points, levels, options);
}

double pilot_sup_moment(const DrawSource& representer, const Window& window, double alpha,
                        std::span<const GridPoint> points, const EstimatorOptions& options) {
  const std::vector<double> ones(points.size(), 1.0);
  const FidiEstimate e = fidi_neglog(representer, window, alpha, points, ones, options);
  return std::max(e.value + 3.0 * e.std_error, std::numeric_limits<double>::min());
}

std::vector<MaxStableSample> max_stable_batch(const DrawSource& representer, double alpha, const Window& window,
                                              const MaxStableSampleSpec& spec, std::size_t n, std::uint64_t seed,
                                              const ParallelOptions& parallel) {
  spec.validate(window);
  struct Acc {
    std::vector<MaxStableSample> samples;
    void merge(const Acc& o) { samples.insert(samples.end(), o.samples.begin(), o.samples.end()); }
  };
  Acc acc = run_chunked<Acc>(seed, n, parallel, [&](std::size_t, RandomStream& s, Acc& a) {
    a.samples.push_back(max_stable_sample(representer, alpha, window, spec, s));
  });
  return std::move(acc.samples);
}

}  // namespace tailcluster
