#include "tailcluster/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "tailcluster/errors.hpp"
#include "tailcluster/stats.hpp"

namespace tailcluster {

namespace {

GridPoint unit_point(int dim, Coord v) {
  GridPoint p(static_cast<std::size_t>(dim), 0);
  p.back() = v;
  return p;
}

double ratio_or_zero(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<TestFunctional> make_functionals() {
  std::vector<TestFunctional> out;
  out.push_back({"ratio_next", FunctionalKind::bounded_ratio, false, 1.0, [](const FieldSample& f, double) {
                   const double a = f.norm_at(unit_point(f.dim_l(), 0));
                   const double b = f.norm_at(unit_point(f.dim_l(), 1));
                   return ratio_or_zero(b, a + b);
                 }});
  out.push_back({"ratio_prev", FunctionalKind::bounded_ratio, false, 1.0, [](const FieldSample& f, double) {
                   const double a = f.norm_at(unit_point(f.dim_l(), -1));
                   const double b = f.norm_at(unit_point(f.dim_l(), 0));
                   const double c = f.norm_at(unit_point(f.dim_l(), 1));
                   return ratio_or_zero(a, a + b + c);
                 }});
  out.push_back({"ratio_here", FunctionalKind::bounded_ratio, false, 1.0, [](const FieldSample& f, double) {
                   const double a = f.norm_at(unit_point(f.dim_l(), 0));
                   const double b = f.norm_at(unit_point(f.dim_l(), 1));
                   return ratio_or_zero(a, a + b);
                 }});
  out.push_back({"exceed_next", FunctionalKind::indicator_exceedance, false, 1.0, [](const FieldSample& f, double) {
                   return f.norm_at(unit_point(f.dim_l(), 1)) > 1.0 ? 1.0 : 0.0;
                 }});
  out.push_back({"sup_alpha", FunctionalKind::alpha_weighted, true, std::numeric_limits<double>::infinity(),
                 [](const FieldSample& f, double alpha) {
                   double m = 0.0;
                   for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, f.norm_at(i));
                   return std::pow(m, alpha);
                 }});
  out.push_back({"pair_product", FunctionalKind::alpha_weighted, true, std::numeric_limits<double>::infinity(),
                 [](const FieldSample& f, double alpha) {
                   const Window& w = f.window();
                   double s = 0.0;
                   for (std::size_t i = 0; i < w.size(); ++i) {
                     GridPoint t = w.point_at(i);
                     t.back() += 1;
                     if (!w.contains(t)) continue;
                     const double a = f.norm_at(i);
                     const double b = f.norm_at(t);
                     if (a > 0.0 && b > 0.0) s += std::pow(a * b, 0.5 * alpha);
                   }
                   return s;
                 }});
  out.push_back({"sup_above_2", FunctionalKind::indicator_exceedance, true, 1.0, [](const FieldSample& f, double) {
                   for (std::size_t i = 0; i < f.size(); ++i) {
                     if (f.norm_at(i) > 2.0) return 1.0;
                   }
                   return 0.0;
                 }});
  out.push_back({"inverse_exceedance_count", FunctionalKind::indicator_exceedance, true, 1.0,
                 [](const FieldSample& f, double) {
                   std::size_t count = 0;
                   for (std::size_t i = 0; i < f.size(); ++i) {
                     if (f.norm_at(i) > 1.0) ++count;
                   }
                   return count == 0 ? 0.0 : 1.0 / static_cast<double>(count);
                 }});
  return out;
}

constexpr std::pair<IdentityId, std::string_view> kIdentityNames[] = {
    {IdentityId::eqDo20, "eqDo20"},
    {IdentityId::tYY, "tYY"},
    {IdentityId::stimmt, "stimmt"},
    {IdentityId::appendix_0e11A, "0e11A"},
    {IdentityId::appendix_gjelle, "0gjelle"},
    {IdentityId::nota_window, "nota"},
};

struct Side {
  MeanEstimate estimate;
};

template <class Fn>
MeanEstimate side_mean(std::uint64_t seed, std::size_t n, const ParallelOptions& parallel, Fn fn) {
  const PairAccumulator acc =
      run_chunked<PairAccumulator>(seed, n, parallel, [&](std::size_t, RandomStream& s, PairAccumulator& a) {
        const auto [w, h] = fn(s);
        a.add(w, w == 0.0 ? 0.0 : w * h);
      });
  return acc.plain();
}

std::uint64_t rhs_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x5bd1e995ULL); }

}  // namespace

const std::vector<TestFunctional>& builtin_functionals() {
  static const std::vector<TestFunctional> all = make_functionals();
  return all;
}

const TestFunctional& find_functional(std::string_view id) {
  for (const auto& f : builtin_functionals()) {
    if (f.id == id) return f;
  }
  throw ConfigError("unknown test functional '" + std::string(id) + "'");
}

std::string_view to_string(IdentityId id) {
  for (const auto& [i, name] : kIdentityNames) {
    if (i == id) return name;
  }
  return "unknown";
}

IdentityId parse_identity(std::string_view text) {
  for (const auto& [i, name] : kIdentityNames) {
    if (name == text) return i;
  }
  throw ConfigError("unknown identity '" + std::string(text) + "'");
}

std::string IdentityCase::label() const {
  std::string s = std::string(to_string(identity)) + "/" + std::string(to_string(model.kind));
  switch (identity) {
    case IdentityId::nota_window:
      s += "/K" + std::to_string(k_radius);
      break;
    case IdentityId::tYY:
      s += constant_functional ? "/constant" : "/" + functional;
      s += "/h" + std::to_string(h);
      break;
    case IdentityId::eqDo20:
      s += "/" + functional + "/h" + std::to_string(h);
      break;
    default:
      s += "/" + functional;
      break;
  }
  if (identity == IdentityId::stimmt || identity == IdentityId::appendix_0e11A) s += "/side" + std::to_string(side);
  return s;
}

IdentityResult run_identity(const IdentityCase& c) {
  const FieldSampler sampler(c.model, c.window);
  const double alpha = c.model.alpha;
  const int dim = c.model.dim_l;
  const LatticeSpec ambient = LatticeSpec::ambient(dim, c.model.grid_spacing);
  const LatticeFunctionals fn(c.window, ambient);
  const std::size_t origin = c.window.origin_index();
  std::uint64_t seed_l = c.seed;
  std::uint64_t seed_r = rhs_seed(c.seed);
  if (c.swap_seeds) std::swap(seed_l, seed_r);
  const TestFunctional* f = c.identity == IdentityId::nota_window ? nullptr : &find_functional(c.functional);
  auto require = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError("functional '" + c.functional + "' is incompatible with " + std::string(to_string(c.identity)) + ": " + what);
  };
  auto eval = [&](const FieldSample& s) { return c.constant_functional ? 1.0 : f->eval(s, alpha); };

  MeanEstimate lhs, rhs;
  switch (c.identity) {
    case IdentityId::eqDo20: {
      require(f->kind == FunctionalKind::bounded_ratio, "needs a 0-homogeneous bounded functional");
      const GridPoint hp = unit_point(dim, c.h);
      const GridPoint minus_h = unit_point(dim, -c.h);
      lhs = side_mean(seed_l, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Theta(s);
        return std::pair{d.weight, std::pow(d.sample.norm_at(hp), alpha) * eval(d.sample)};
      });
      rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Theta(s);
        if (d.sample.norm_at(minus_h) == 0.0) return std::pair{d.weight, 0.0};
        return std::pair{d.weight, eval(shift(d.sample, hp))};
      });
      break;
    }
    case IdentityId::tYY: {
      require(c.constant_functional || f->kind != FunctionalKind::alpha_weighted, "needs a bounded functional");
      if (!(c.x > 0.0)) throw ConfigError("tYY needs x > 0");
      const GridPoint hp = unit_point(dim, c.h);
      const GridPoint minus_h = unit_point(dim, -c.h);
      lhs = side_mean(seed_l, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Y(s);
        if (!(c.x * d.sample.norm_at(minus_h) > 1.0)) return std::pair{d.weight, 0.0};
        FieldSample g = shift(d.sample, hp);
        g.scale(c.x);
        return std::pair{d.weight, std::pow(c.x, -alpha) * eval(g)};
      });
      rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Y(s);
        return std::pair{d.weight, d.sample.norm_at(hp) > c.x ? eval(d.sample) : 0.0};
      });
      break;
    }
    case IdentityId::stimmt:
    case IdentityId::appendix_0e11A: {
      require(f->kind == FunctionalKind::alpha_weighted && f->shift_invariant,
              "needs a shift-invariant alpha-homogeneous functional");
      if (c.side < 1 || c.side > 3) throw ConfigError("side must be 1, 2 or 3");
      lhs = side_mean(seed_l, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Theta(s);
        const double total = fn.sum_alpha(PathNorms::of(d.sample), alpha);
        return std::pair{d.weight, total > 0.0 ? eval(d.sample) / total : 0.0};
      });
      auto anchored_y = [&](RandomStream& s) {
        WeightedDraw d = sampler.sample_Y(s);
        const PathNorms p = PathNorms::of(d.sample);
        const auto j = fn.first_exceedance(p);
        if (!j || *j != origin) return std::pair{d.weight, 0.0};
        d.sample.scale(1.0 / fn.sup(p));
        return std::pair{d.weight, eval(d.sample)};
      };
      const bool stimmt = c.identity == IdentityId::stimmt;
      if (c.side == 2 && !stimmt) {
        rhs = side_mean(seed_r, c.n, c.parallel, anchored_y);
      } else if (c.side == 1 && stimmt) {
        rhs = side_mean(seed_r, c.n, c.parallel, anchored_y);
      } else if (c.side == 1) {
        rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
          const WeightedDraw d = sampler.sample_Theta(s);
          const auto j = fn.infargsup(PathNorms::of(d.sample));
          return std::pair{d.weight, (j && *j == origin) ? eval(d.sample) : 0.0};
        });
      } else if (c.side == 2) {
        rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
          const FieldSample z = sampler.sample_Z(s);
          const PathNorms p = PathNorms::of(z);
          const double z0 = p.norms[origin];
          if (z0 == 0.0) return std::pair{1.0, 0.0};
          return std::pair{1.0, std::pow(z0, alpha) * eval(z) / fn.sum_alpha(p, alpha)};
        });
      } else if (stimmt) {
        ClusterConstructionSpec spec;
        spec.method = ClusterMethod::ffd_tilted_y;
        spec.lattice = ambient;
        const ClusterBuilder builder(spec, sampler);
        rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
          const WeightedDraw d = builder.draw(s);
          return std::pair{d.weight, d.weight > 0.0 ? eval(d.sample) : 0.0};
        });
      } else {
        rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
          const FieldSample z = sampler.sample_Z(s);
          const auto j = fn.infargsup(PathNorms::of(z));
          return std::pair{1.0, (j && *j == origin) ? eval(z) : 0.0};
        });
      }
      break;
    }
    case IdentityId::appendix_gjelle: {
      require(f->shift_invariant && f->kind != FunctionalKind::alpha_weighted,
              "needs a bounded shift-invariant functional");
      if (!(c.tau >= 0.0 && c.tau <= alpha)) throw ConfigError("tau must lie in [0, alpha]");
      lhs = side_mean(seed_l, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Y(s);
        const PathNorms p = PathNorms::of(d.sample);
        const double bsum = fn.exceedance_sum(p, c.tau);
        if (bsum == 0.0) return std::pair{d.weight, 0.0};
        return std::pair{d.weight, std::pow(p.norms[origin], c.tau) * eval(d.sample) / bsum};
      });
      rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Y(s);
        const auto j = fn.first_exceedance(PathNorms::of(d.sample));
        return std::pair{d.weight, (j && *j == origin) ? eval(d.sample) : 0.0};
      });
      break;
    }
    case IdentityId::nota_window: {
      if (dim != 1) throw ConfigError("nota window check is implemented for l = 1");
      const Coord k = c.k_radius;
      if (k < 0 || 2 * k > c.window.half_width()[0]) throw ConfigError("K must fit twice inside the window");
      lhs = side_mean(seed_l, c.n, c.parallel, [&](RandomStream& s) {
        const FieldSample z = sampler.sample_Z(s);
        double m = 0.0;
        for (Coord t = -k; t <= k; ++t) m = std::max(m, z.norm_at(GridPoint{t}));
        return std::pair{1.0, std::pow(m, alpha)};
      });
      rhs = side_mean(seed_r, c.n, c.parallel, [&](RandomStream& s) {
        const WeightedDraw d = sampler.sample_Y(s);
        const double r = d.sample.norm_at(origin);
        double total = 0.0;
        for (Coord t = -k; t <= k; ++t) {
          double den = 0.0;
          for (Coord u = -k; u <= k; ++u) {
            const double y = d.sample.norm_at(GridPoint{u - t});
            if (y > 1.0) den += std::pow(y / r, c.tau);
          }
          total += 1.0 / den;  // den >= 1 from u = t
        }
        return std::pair{d.weight, total};
      });
      break;
    }
  }
  IdentityResult out;
  out.label = c.label();
  out.lhs = lhs.value;
  out.lhs_std_error = lhs.std_error;
  out.rhs = rhs.value;
  out.rhs_std_error = rhs.std_error;
  const double se = std::sqrt(lhs.std_error * lhs.std_error + rhs.std_error * rhs.std_error);
  out.z = se == 0.0 ? (lhs.value == rhs.value ? 0.0 : std::numeric_limits<double>::infinity()) : (lhs.value - rhs.value) / se;
  return out;
}

std::vector<IdentityCase> default_battery(std::size_t n, std::uint64_t seed) {
  ModelSpec ar1;
  ar1.kind = ModelKind::ar1_tail_chain;
  ar1.phi = 0.5;
  ar1.alpha = 1.0;
  ModelSpec mm;
  mm.kind = ModelKind::moving_max;
  mm.coeffs = {{2.0}, {1.0}};
  mm.alpha = 1.0;

  std::vector<IdentityCase> cases;
  auto add = [&](IdentityCase c) {
    c.n = n;
    c.seed = seed + 1000 * static_cast<std::uint64_t>(cases.size());
    cases.push_back(std::move(c));
  };
  for (const auto& [model, half] : {std::pair{ar1, Coord{32}}, std::pair{mm, Coord{8}}}) {
    IdentityCase base;
    base.model = model;
    base.window = Window::cube(1, half);
    // ratio_prev vanishes on both sides for a two-point profile
    const char* second_ratio = model.kind == ModelKind::moving_max ? "ratio_here" : "ratio_prev";
    for (const char* fid : {"ratio_next", second_ratio}) {
      IdentityCase c = base;
      c.identity = IdentityId::eqDo20;
      c.functional = fid;
      c.h = 1;
      add(c);
    }
    for (const char* fid : {"exceed_next", "ratio_next"}) {
      IdentityCase c = base;
      c.identity = IdentityId::tYY;
      c.functional = fid;
      c.h = 1;
      c.x = 2.0;
      add(c);
    }
    {
      IdentityCase c = base;
      c.identity = IdentityId::tYY;
      c.constant_functional = true;
      c.h = 0;
      c.x = 2.0;
      add(c);
    }
    for (IdentityId id : {IdentityId::stimmt, IdentityId::appendix_0e11A}) {
      for (const char* fid : {"sup_alpha", "pair_product"}) {
        for (int side = 1; side <= 3; ++side) {
          IdentityCase c = base;
          c.identity = id;
          c.functional = fid;
          c.side = side;
          add(c);
        }
      }
    }
    for (const char* fid : {"sup_above_2", "inverse_exceedance_count"}) {
      IdentityCase c = base;
      c.identity = IdentityId::appendix_gjelle;
      c.functional = fid;
      c.tau = 0.5 * model.alpha;
      add(c);
    }
    for (Coord k : {Coord{1}, Coord{2}}) {
      IdentityCase c = base;
      c.identity = IdentityId::nota_window;
      c.k_radius = k;
      c.tau = 0.0;
      add(c);
    }
  }
  return cases;
}

BatteryVerdict run_battery(const std::vector<IdentityCase>& cases) {
  BatteryVerdict v;
  for (const auto& c : cases) {
    IdentityResult r = run_identity(c);
    const double az = std::fabs(r.z);
    v.max_abs_z = std::max(v.max_abs_z, az);
    if (az >= 5.0) v.passed = false;
    if (az >= 4.0 && az < 5.0) ++v.flagged;
    v.results.push_back(std::move(r));
  }
  if (v.flagged > 2) v.passed = false;
  return v;
}

EventAgreement run_event_equality(const FieldSampler& sampler, std::size_t n, std::uint64_t seed,
                                  const ParallelOptions& parallel) {
  const Window& w = sampler.window();
  const double alpha = sampler.alpha();
  const LatticeSpec ambient = LatticeSpec::ambient(w.dim(), sampler.model().grid_spacing);
  const LatticeFunctionals fn(w, ambient);
  std::vector<unsigned char> outer(w.size(), 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const GridPoint t = w.point_at(i);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const Coord a = w.half_width()[k];
      if (2 * (t[k] < 0 ? -t[k] : t[k]) > a) outer[i] = 1;
    }
  }
  constexpr std::size_t kEvents = 5;
  struct Acc {
    std::size_t agree[kEvents][kEvents] = {};
    std::size_t n = 0;
    void merge(const Acc& o) {
      for (std::size_t i = 0; i < kEvents; ++i)
        for (std::size_t j = 0; j < kEvents; ++j) agree[i][j] += o.agree[i][j];
      n += o.n;
    }
  };
  const Acc acc = run_chunked<Acc>(seed, n, parallel, [&](std::size_t, RandomStream& s, Acc& a) {
    const WeightedDraw d = sampler.sample_Y(s);
    const PathNorms p = PathNorms::of(d.sample);
    const double r = p.norms[p.origin];
    double mass_in = 0.0, mass_out = 0.0, sup_in = 0.0, sup_out = 0.0;
    std::size_t exceed_out = 0;
    for (std::size_t i = 0; i < p.norms.size(); ++i) {
      const double v = std::pow(p.norms[i], alpha);
      if (outer[i]) {
        mass_out += v;
        sup_out = std::max(sup_out, p.norms[i] / r);
        if (p.norms[i] >= 1.0) ++exceed_out;
      } else {
        mass_in += v;
        sup_in = std::max(sup_in, p.norms[i] / r);
      }
    }
    const bool ev[kEvents] = {
        mass_out < 1e-4 * mass_in,
        std::pow(sup_out, alpha) < 1e-4 * std::pow(sup_in, alpha),
        fn.infargsup(p).has_value(),
        fn.first_exceedance(p).has_value(),
        exceed_out == 0,
    };
    for (std::size_t i = 0; i < kEvents; ++i)
      for (std::size_t j = 0; j < kEvents; ++j) a.agree[i][j] += (ev[i] == ev[j]) ? 1 : 0;
    ++a.n;
  });
  EventAgreement out;
  out.events = {"finite_sum", "vanishing_tail", "involution_defined", "anchor_defined", "finite_exceedances"};
  out.rates.assign(kEvents, std::vector<double>(kEvents, 1.0));
  for (std::size_t i = 0; i < kEvents; ++i) {
    for (std::size_t j = 0; j < kEvents; ++j) {
      out.rates[i][j] = static_cast<double>(acc.agree[i][j]) / static_cast<double>(acc.n);
      out.min_rate = std::min(out.min_rate, out.rates[i][j]);
    }
  }
  out.passed = out.min_rate >= 0.999;
  return out;
}

}  // namespace tailcluster
