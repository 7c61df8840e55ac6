#include "tailcluster/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tailcluster/errors.hpp"
#include "tailcluster/stats.hpp"

namespace tailcluster {

namespace {

struct EstimatorAcc {
  PairAccumulator pair;
  std::size_t positive = 0;
  double lost_mass = 0.0;
  std::size_t attempts = 0;

  void add(const WeightedDraw& d, double h) {
    pair.add(d.weight, d.weight == 0.0 ? 0.0 : d.weight * h);
    if (d.weight > 0.0) ++positive;
    lost_mass += d.lost_mass;
    attempts += d.attempts;
  }
  void merge(const EstimatorAcc& o) {
    pair.merge(o.pair);
    positive += o.positive;
    lost_mass += o.lost_mass;
    attempts += o.attempts;
  }
};

/// Draw -> per-draw quantity h; the estimate is E[w h].
template <class DrawFn, class ValueFn>
EstimateReport run_estimator(std::string name, const EstimatorOptions& options, DrawFn draw, ValueFn value) {
  if (options.n == 0) throw ConfigError("sample size n must be at least 1");
  const EstimatorAcc acc = run_chunked<EstimatorAcc>(
      options.seed, options.n, options.parallel, [&](std::size_t, RandomStream& stream, EstimatorAcc& a) {
        WeightedDraw d = draw(stream);
        const double h = d.weight > 0.0 ? value(d) : 0.0;
        a.add(d, h);
      });
  const MeanEstimate m = options.self_normalized ? acc.pair.ratio() : acc.pair.plain();
  EstimateReport r;
  r.representation = std::move(name);
  r.value = m.value;
  r.std_error = m.std_error;
  r.n_samples = m.n;
  r.n_effective = m.n_effective;
  r.sample_variance = m.sample_variance;
  r.diagnostics["positive_weight_fraction"] = static_cast<double>(acc.positive) / static_cast<double>(options.n);
  r.diagnostics["mean_weight"] = acc.pair.mean_weight();
  r.diagnostics["mean_attempts"] = static_cast<double>(acc.attempts) / static_cast<double>(options.n);
  if (acc.lost_mass > 0.0) {
    r.diagnostics["mean_lost_mass"] = acc.lost_mass / static_cast<double>(options.n);
  }
  return r;
}

void check_lattice(const FieldSampler& sampler, const LatticeSpec& lattice) {
  if (lattice.dim() != sampler.model().dim_l) throw ConfigError("lattice dimension does not match the model");
  if (lattice.grid_spacing() != sampler.model().grid_spacing) {
    throw ConfigError("lattice grid spacing must match the model's delta");
  }
}

std::string tag(std::string base, const std::string& suffix) { return suffix.empty() ? base : base + "_" + suffix; }

std::string format_param(double x) {
  std::string s = std::to_string(x);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

EstimateReport estimate_samorodnitsky(const FieldSampler& sampler, const LatticeSpec& lattice,
                                      const EstimatorOptions& options) {
  check_lattice(sampler, lattice);
  const LatticeFunctionals fn(sampler.window(), lattice);
  const double alpha = sampler.alpha();
  const auto index = static_cast<double>(lattice.index());
  return run_estimator(
      "samorodnitsky", options, [&](RandomStream& s) { return sampler.sample_Theta(s); },
      [&](const WeightedDraw& d) {
        const PathNorms p = PathNorms::of(d.sample);
        const double total = fn.sum_alpha(p, alpha);
        if (!(total > 0.0)) throw ContractViolation("samorodnitsky: S_L(Theta) = 0 on a positive-weight draw");
        return std::pow(fn.sup(p), alpha) / (index * total);
      });
}

EstimateReport estimate_berman(const FieldSampler& sampler, const LatticeSpec& lattice, double tau,
                               const EstimatorOptions& options, double b, BermanVariant variant) {
  check_lattice(sampler, lattice);
  const double alpha = sampler.alpha();
  if (!std::isfinite(tau) || tau < 0.0 || tau > alpha) throw ConfigError("tau must lie in [0, alpha]");
  if (!(b >= 1.0)) throw ConfigError("b must be >= 1");
  const LatticeFunctionals fn(sampler.window(), lattice);
  const auto index = static_cast<double>(lattice.index());
  const std::size_t origin = sampler.window().origin_index();
  const double scale = std::pow(b, alpha);
  std::string name = "berman_tau" + format_param(tau);
  if (b != 1.0) name += "_b" + format_param(b) + (variant == BermanVariant::literal ? "_literal" : "");
  EstimateReport r = run_estimator(
      name, options, [&](RandomStream& s) { return sampler.sample_Y(s); },
      [&](const WeightedDraw& d) {
        const PathNorms p = PathNorms::of(d.sample);
        const bool event = variant == BermanVariant::corrected ? fn.sup(p) > b : fn.exceedance_sum(p, tau, b) > 0.0;
        if (!event) return 0.0;
        const double head = std::pow(p.norms[origin], tau);
        const double bsum = fn.exceedance_sum(p, tau);
        if (!(bsum > 0.0)) {
          if (head == 0.0) return 0.0;
          throw ContractViolation("berman: B_L(Y) = 0 with ||Y(0)||^tau > 0");
        }
        return scale * head / (index * bsum);
      });
  if (b != 1.0) r.warnings.push_back("b != 1 Berman variant is experimental");
  return r;
}

EstimateReport estimate_albin(const FieldSampler& sampler, const LatticeSpec& lattice, double b,
                              const EstimatorOptions& options, AlbinAnchor anchor) {
  check_lattice(sampler, lattice);
  if (!(b >= 1.0)) throw ConfigError("b must be >= 1");
  const LatticeFunctionals fn(sampler.window(), lattice);
  const double alpha = sampler.alpha();
  const double scale = std::pow(b, alpha) / static_cast<double>(lattice.index());
  std::string name = "albin_b" + format_param(b);
  if (anchor == AlbinAnchor::before_origin) name += "_before";
  return run_estimator(
      name, options, [&](RandomStream& s) { return sampler.sample_Y(s); },
      [&](const WeightedDraw& d) {
        const PathNorms p = PathNorms::of(d.sample);
        const double side = anchor == AlbinAnchor::after_origin ? fn.sup_after_origin(p, false) : fn.sup_before_origin(p);
        return (side <= 1.0 && fn.sup(p) > b) ? scale : 0.0;
      });
}

EstimateReport estimate_difference(const DrawSource& source, const Window& window, const LatticeSpec& lattice,
                                   double alpha, const EstimatorOptions& options, std::string name) {
  const LatticeFunctionals fn(window, lattice);
  const double covolume = lattice.covolume();
  return run_estimator(std::move(name), options, source, [&](const WeightedDraw& d) {
    const PathNorms p = PathNorms::of(d.sample);
    const double with_origin = std::pow(fn.sup_after_origin(p, true), alpha);
    const double without = std::pow(fn.sup_after_origin(p, false), alpha);
    return (with_origin - without) / covolume;
  });
}

EstimateReport estimate_difference(const FieldSampler& sampler, const LatticeSpec& lattice, bool use_Z,
                                   const EstimatorOptions& options) {
  check_lattice(sampler, lattice);
  DrawSource source = use_Z ? DrawSource([&](RandomStream& s) { return WeightedDraw{sampler.sample_Z(s), 1.0}; })
                            : DrawSource([&](RandomStream& s) { return sampler.sample_Theta(s); });
  return estimate_difference(source, sampler.window(), lattice, sampler.alpha(), options,
                             use_Z ? "difference_z" : "difference_theta");
}

EstimateReport estimate_cluster_sup(const DrawSource& source, const Window& window, const LatticeSpec& lattice,
                                    double alpha, const EstimatorOptions& options, std::string name) {
  const LatticeFunctionals fn(window, lattice);
  return run_estimator(std::move(name), options, source, [&](const WeightedDraw& d) {
    return std::pow(fn.sup(PathNorms::of(d.sample)), alpha);
  });
}

EstimateReport estimate_cluster_sup(const ClusterConstructionSpec& construction, const FieldSampler& sampler,
                                    const EstimatorOptions& options) {
  check_lattice(sampler, construction.lattice);
  const ClusterBuilder builder(construction, sampler);
  std::string name = tag("cluster_sup", std::string(to_string(construction.method)));
  if (construction.b != 1.0) name += "_b" + format_param(construction.b);
  EstimateReport r = estimate_cluster_sup([&](RandomStream& s) { return builder.draw(s); }, sampler.window(),
                                          construction.lattice, sampler.alpha(), options, std::move(name));
  if (construction.mode == ConstructionMode::conditional) {
    r.diagnostics["acceptance_rate"] = 1.0 / r.diagnostics["mean_attempts"];
  } else {
    r.diagnostics["acceptance_rate"] = r.diagnostics["positive_weight_fraction"];
  }
  return r;
}

EstimateReport estimate_mixed(const FieldSampler& sampler, const LatticeSpec& lattice, double tau, double b,
                              const EstimatorOptions& options) {
  check_lattice(sampler, lattice);
  if (sampler.model().kind != ModelKind::brown_resnick) {
    throw ConfigError("mixed representation needs ||Z(0)|| > 0 almost surely (brown_resnick only)");
  }
  const double alpha = sampler.alpha();
  if (!std::isfinite(tau) || tau < 0.0 || tau > alpha) throw ConfigError("tau must lie in [0, alpha]");
  if (!(b >= 1.0)) throw ConfigError("b must be >= 1");
  const LatticeFunctionals on_l(sampler.window(), lattice);
  const LatticeFunctionals on_grid(sampler.window(), LatticeSpec::ambient(lattice.dim(), lattice.grid_spacing()));
  const auto index = static_cast<double>(lattice.index());
  const std::size_t origin = sampler.window().origin_index();
  const double scale = std::pow(b, alpha);
  EstimateReport r = run_estimator(
      "mixed_tau" + format_param(tau), options, [&](RandomStream& s) { return sampler.sample_Y(s); },
      [&](const WeightedDraw& d) {
        const PathNorms p = PathNorms::of(d.sample);
        const double m_l = on_l.sup(p);
        if (!(m_l > b)) return 0.0;
        const double bsum = on_l.exceedance_sum(p, tau);
        return scale * std::pow(on_grid.sup(p) / m_l, alpha) * std::pow(p.norms[origin], tau) / (index * bsum);
      });
  r.warnings.push_back("mixed representation is experimental");
  return r;
}

std::vector<GridLimitPoint> estimate_grid_limit(const ModelSpec& model, const LatticeSpec& lattice,
                                                const Window& window, std::span<const double> n_list,
                                                const EstimatorOptions& options) {
  std::vector<GridLimitPoint> out;
  double previous = 0.0;
  for (double n : n_list) {
    if (!(n > previous)) throw ConfigError("grid-limit n values must be positive and increasing");
    previous = n;
    const auto reach = static_cast<Coord>(std::floor(n / model.grid_spacing + 1e-9));
    std::vector<Coord> half = window.half_width();
    for (Coord& h : half) h = std::max(h, reach);
    const FieldSampler sampler(model, Window(half));
    check_lattice(sampler, lattice);
    const Window& w = sampler.window();
    std::vector<std::size_t> block;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const GridPoint t = w.point_at(i);
      const bool inside = std::ranges::all_of(t, [&](Coord c) { return c >= 0 && c <= reach; });
      if (inside && lattice.contains(t)) block.push_back(i);
    }
    const double norm = std::pow(n, model.dim_l);
    const double alpha = model.alpha;
    EstimatorOptions opt = options;
    opt.seed = options.seed + static_cast<std::uint64_t>(out.size());
    const EstimateReport r = run_estimator(
        "grid_limit", opt, [&](RandomStream& s) { return WeightedDraw{sampler.sample_Z(s), 1.0}; },
        [&](const WeightedDraw& d) {
          double m = 0.0;
          for (std::size_t i : block) m = std::max(m, d.sample.norm_at(i));
          return std::pow(m, alpha) / norm;
        });
    out.push_back({n, r.value, r.std_error});
  }
  return out;
}

std::vector<TruncationPoint> estimate_m_truncation(const ClusterBuilder& builder, const ShiftDistribution& shift_dist,
                                                   const Window& target, double scale,
                                                   std::span<const double> m_list, const EstimatorOptions& options) {
  if (options.n == 0) throw ConfigError("sample size n must be at least 1");
  if (!(scale > 0.0)) throw ConfigError("normalizing scale must be positive");
  if (m_list.empty()) throw ConfigError("need at least one truncation radius");
  for (double m : m_list) {
    if (!(m > 0.0)) throw ConfigError("truncation radius m must be positive");
  }
  const double alpha = builder.sampler().alpha();
  const Window& source = builder.sampler().window();
  const double delta = builder.sampler().model().grid_spacing;
  std::vector<double> l1(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    double r = 0.0;
    for (Coord c : source.point_at(i)) r += static_cast<double>(c < 0 ? -c : c);
    l1[i] = r * delta;
  }
  struct Acc {
    std::vector<PairAccumulator> per_m;
    void merge(const Acc& o) {
      for (std::size_t k = 0; k < per_m.size(); ++k) per_m[k].merge(o.per_m[k]);
    }
  };
  Acc prototype;
  prototype.per_m.resize(m_list.size());
  const Acc acc = run_chunked<Acc>(
      options.seed, options.n, options.parallel,
      [&](std::size_t, RandomStream& stream, Acc& a) {
        const WeightedDraw q = builder.draw(stream);
        const GridPoint shift_by = shift_dist.sample(stream);
        const double density = shift_dist.density(shift_by);
        for (std::size_t k = 0; k < m_list.size(); ++k) {
          if (q.weight == 0.0) {
            a.per_m[k].add(0.0, 0.0);
            continue;
          }
          FieldSample tail = q.sample;
          for (std::size_t i = 0; i < source.size(); ++i) {
            if (l1[i] <= m_list[k]) {
              for (double& v : tail.value(i)) v = 0.0;
            }
          }
          const FieldSample moved = shift_into(tail, shift_by, target, alpha);
          double sup = 0.0;
          for (std::size_t i = 0; i < moved.size(); ++i) sup = std::max(sup, moved.norm_at(i));
          const double h = std::pow(sup, alpha) / (density * scale);
          a.per_m[k].add(q.weight, q.weight * h);
        }
      },
      prototype);
  std::vector<TruncationPoint> out;
  for (std::size_t k = 0; k < m_list.size(); ++k) {
    const MeanEstimate e = acc.per_m[k].plain();
    out.push_back({m_list[k], e.value, e.std_error});
  }
  return out;
}

ParetoCheck pareto_conditional_check(const FieldSampler& sampler, const LatticeSpec& lattice, double b,
                                     std::size_t n_conditional, std::uint64_t seed, const ParallelOptions& parallel,
                                     std::size_t max_attempts) {
  check_lattice(sampler, lattice);
  if (!(b >= 1.0)) throw ConfigError("b must be >= 1");
  if (n_conditional == 0) throw ConfigError("need at least one conditional draw");
  const LatticeFunctionals fn(sampler.window(), lattice);
  const std::size_t origin = sampler.window().origin_index();

  struct Acc {
    std::vector<double> values;
    std::size_t attempts = 0;
    void merge(const Acc& o) {
      values.insert(values.end(), o.values.begin(), o.values.end());
      attempts += o.attempts;
    }
  };
  const Acc acc = run_chunked<Acc>(seed, n_conditional, parallel, [&](std::size_t, RandomStream& stream, Acc& a) {
    for (std::size_t k = 1; k <= max_attempts; ++k) {
      const WeightedDraw d = sampler.sample_Y(stream);
      if (d.weight != 0.0 && d.weight != 1.0) {
        throw ConfigError("conditional Pareto check needs an exact (unit-weight) tail sampler");
      }
      if (d.weight == 0.0) continue;
      const PathNorms p = PathNorms::of(d.sample);
      const auto j = fn.first_exceedance(p);
      const double m = fn.sup(p);
      if (j && *j == origin && m > b) {
        a.values.push_back(m / b);
        a.attempts += k;
        return;
      }
    }
    throw DegenerateConditioning("conditional Pareto check: no acceptance within the attempt budget");
  });
  const double alpha = sampler.alpha();
  ParetoCheck out;
  out.accepted = acc.values.size();
  out.attempts = acc.attempts;
  out.min_value = *std::ranges::min_element(acc.values);
  out.ks = ks_one_sample(acc.values, [alpha](double s) { return s <= 1.0 ? 0.0 : 1.0 - std::pow(s, -alpha); });
  return out;
}

ConsistencyVerdict consistency_report(std::span<const EstimateReport> reports) {
  ConsistencyVerdict v;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      const double z = z_score(reports[i].value, reports[i].std_error, reports[j].value, reports[j].std_error);
      v.pairs.push_back({i, j, z});
      v.max_z = std::max(v.max_z, z);
      if (z >= 5.0) v.passed = false;
      if (z >= 4.0 && z < 5.0) ++v.flagged;
    }
  }
  return v;
}

EstimateReport with_window_drift(const ModelSpec& model, const Window& window,
                                 const std::function<EstimateReport(const FieldSampler&)>& estimate) {
  const FieldSampler base(model, window);
  EstimateReport r = estimate(base);
  std::vector<Coord> doubled = window.half_width();
  for (Coord& h : doubled) h *= 2;
  const FieldSampler wide(model, Window(doubled));
  const EstimateReport r2 = estimate(wide);
  r.diagnostics["window_drift"] = r2.value - r.value;
  r.diagnostics["window_drift_z"] = z_score(r.value, r.std_error, r2.value, r2.std_error);
  return r;
}

}  // namespace tailcluster
