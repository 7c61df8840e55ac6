#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tailcluster/errors.hpp"
#include "tailcluster/maxstable.hpp"
#include "tailcluster/stats.hpp"

using namespace tailcluster;

namespace {

ModelSpec moving_max(std::vector<double> a, double alpha = 1.0) {
  ModelSpec m;
  m.kind = ModelKind::moving_max;
  for (double v : a) m.coeffs.push_back({v});
  m.alpha = alpha;
  return m;
}

DrawSource dehaan(const FieldSampler& s) {
  return [&s](RandomStream& st) { return WeightedDraw{s.sample_Z(st), 1.0}; };
}

MaxStableSampleSpec spec_for(std::vector<GridPoint> points, double eps = 0.01, double moment = 1.0) {
  MaxStableSampleSpec spec;
  spec.points = std::move(points);
  spec.stopping_epsilon = eps;
  spec.sup_moment = moment;
  return spec;
}

std::vector<double> column(const std::vector<MaxStableSample>& v, std::size_t k) {
  std::vector<double> out;
  for (const auto& s : v) out.push_back(s.values[k]);
  return out;
}

}  // namespace

TEST_CASE("spec validation") {
  const Window w = Window::cube(1, 4);
  CHECK_THROWS_AS(spec_for({{0}}, 0.0).validate(w), ConfigError);
  CHECK_THROWS_AS(spec_for({{0}}, 0.2).validate(w), ConfigError);
  CHECK_THROWS_AS(spec_for({{5}}).validate(w), ConfigError);
  CHECK_THROWS_AS(spec_for({}).validate(w), ConfigError);
  CHECK_NOTHROW(spec_for({{0}, {4}}, 0.1).validate(w));
}

TEST_CASE("de Haan samples have unit Frechet marginals") {
  const FieldSampler s(moving_max({2.0, 1.0}), Window::cube(1, 8));
  const auto batch = max_stable_batch(dehaan(s), 1.0, s.window(), spec_for({{0}}), 10'000, 1);
  const auto x = column(batch, 0);
  CHECK(ks_one_sample(x, [](double v) { return oracle::frechet_cdf(v, 1.0); }) < 0.02);
  for (double level : {0.5, 1.0, 2.0}) {
    const double p = static_cast<double>(std::ranges::count_if(x, [&](double v) { return v <= level; })) / x.size();
    const double se = std::sqrt((1.0 - p) / (p * x.size()));
    CHECK(std::fabs(-std::log(p) - 1.0 / level) <= 3.0 * se);
  }
  for (const auto& b : batch) CHECK_FALSE(b.truncated);
}

TEST_CASE("fidi: normalization, duplicates and the enumeration oracle") {
  const FieldSampler s(moving_max({2.0, 1.0}), Window::cube(1, 8));
  EstimatorOptions o;
  o.seed = 2;
  o.n = 50'000;
  const std::vector<GridPoint> one = {{0}};
  const std::vector<double> unit = {1.0};
  const FidiEstimate f1 = fidi_neglog(s, one, unit, o);
  CHECK(std::fabs(f1.value - 1.0) <= 3.0 * f1.std_error);

  const std::vector<GridPoint> twice = {{0}, {0}};
  const std::vector<double> units = {1.0, 1.0};
  const FidiEstimate f2 = fidi_neglog(s, twice, units, o);
  CHECK(f2.value == f1.value);
  CHECK(f2.std_error == f1.std_error);

  const std::vector<GridPoint> pair = {{0}, {1}};
  for (const std::vector<double>& levels : {std::vector<double>{1.0, 1.0}, std::vector<double>{0.5, 2.0}}) {
    const FidiEstimate f = fidi_neglog(s, pair, levels, o);
    const double expected = oracle::moving_max_exponent({2.0, 1.0}, 1.0, {0, 1}, {1.0 / levels[0], 1.0 / levels[1]});
    CHECK(std::fabs(f.value - expected) <= 3.0 * f.std_error);
  }
  const std::vector<double> bad = {0.0};
  CHECK_THROWS_AS(fidi_neglog(s, one, bad, o), ConfigError);
}

TEST_CASE("joint law of the de Haan sampler matches the exponent measure") {
  const FieldSampler s(moving_max({2.0, 1.0}), Window::cube(1, 8));
  const auto batch = max_stable_batch(dehaan(s), 1.0, s.window(), spec_for({{0}, {1}}, 0.01, 4.0 / 3.0), 20'000, 3);
  const double n = static_cast<double>(batch.size());
  const double p =
      static_cast<double>(std::ranges::count_if(batch, [](const auto& b) { return b.values[0] <= 1.0 && b.values[1] <= 1.0; })) / n;
  const double expected = oracle::moving_max_exponent({2.0, 1.0}, 1.0, {0, 1}, {1.0, 1.0});
  const double se = std::sqrt((1.0 - p) / (p * n));
  CHECK(std::fabs(-std::log(p) - expected) <= 3.0 * se);
}

TEST_CASE("max-stability") {
  const double alpha = 2.0;
  const FieldSampler s(moving_max({2.0, 1.0}, alpha), Window::cube(1, 8));
  const std::size_t k = 4, n = 10'000;
  const auto block = max_stable_batch(dehaan(s), alpha, s.window(), spec_for({{0}}), n * k, 4);
  const auto single = max_stable_batch(dehaan(s), alpha, s.window(), spec_for({{0}}), n, 5);
  std::vector<double> maxima;
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < k; ++j) m = std::max(m, block[i * k + j].values[0]);
    maxima.push_back(m / std::pow(static_cast<double>(k), 1.0 / alpha));
  }
  CHECK(ks_two_sample(maxima, column(single, 0)) < 0.03);
}

TEST_CASE("halving the stopping epsilon moves CDF values by less than epsilon") {
  const FieldSampler s(moving_max({2.0, 1.0}), Window::cube(1, 8));
  const std::vector<GridPoint> pts = {{-2}, {0}, {3}};
  const double eps = 0.05;
  const auto coarse = max_stable_batch(dehaan(s), 1.0, s.window(), spec_for(pts, eps, 3.0), 10'000, 6);
  const auto fine = max_stable_batch(dehaan(s), 1.0, s.window(), spec_for(pts, eps / 2, 3.0), 10'000, 6);
  for (double level : {0.5, 1.0, 3.0}) {
    auto cdf = [&](const std::vector<MaxStableSample>& v) {
      return static_cast<double>(std::ranges::count_if(v, [&](const auto& b) {
               return std::ranges::all_of(b.values, [&](double x) { return x <= level; });
             })) / v.size();
    };
    CHECK(std::fabs(cdf(coarse) - cdf(fine)) < eps);
  }
  for (const auto& b : fine) CHECK(b.achieved_epsilon <= eps / 2);
}

TEST_CASE("Rosinski and de Haan agree on the moving maximum") {
  const FieldSampler s(moving_max({2.0, 1.0}), Window::cube(1, 8));
  ClusterConstructionSpec c;
  c.method = ClusterMethod::ffd_theta;
  const ClusterBuilder builder(c, s);
  const auto shift = ShiftDistribution::covering(s.window(), s.window());
  const DrawSource ros = rosinski_representer(builder, shift, s.window());
  const std::vector<GridPoint> pts = {{0}};
  EstimatorOptions o;
  o.seed = 7;
  o.n = 10'000;
  const double moment = pilot_sup_moment(ros, s.window(), 1.0, pts, o);
  const auto a = max_stable_batch(ros, 1.0, s.window(), spec_for(pts, 0.01, moment), 10'000, 8);
  const auto b = max_stable_batch(dehaan(s), 1.0, s.window(), spec_for(pts), 10'000, 9);
  CHECK(ks_two_sample(column(a, 0), column(b, 0)) < 0.03);
  CHECK(ks_one_sample(column(a, 0), [](double v) { return oracle::frechet_cdf(v, 1.0); }) < 0.02);
}

TEST_CASE("point-mass cluster with a point-mass shift") {
  const FieldSampler s(moving_max({1.0}), Window::cube(1, 4));
  ClusterConstructionSpec c;
  c.method = ClusterMethod::ffd_theta;
  const ClusterBuilder builder(c, s);
  const auto shift = ShiftDistribution::uniform_box({0}, {0});
  const DrawSource ros = rosinski_representer(builder, shift, s.window());
  for (std::uint64_t i = 0; i < 20; ++i) {
    RandomStream a(10, i), b(10, i);
    const WeightedDraw q = fold_weight(builder.draw(a), 1.0);
    const WeightedDraw z = ros(b);
    CHECK(z.sample.raw_values() == q.sample.raw_values());
    CHECK(z.sample.norm_at(GridPoint{0}) == 1.0);
  }
  // X(0) = max 1 / Gamma_i = 1 / Gamma_1.
  const auto batch = max_stable_batch(ros, 1.0, s.window(), spec_for({{0}}), 10'000, 11);
  CHECK(ks_one_sample(column(batch, 0), [](double v) { return oracle::frechet_cdf(v, 1.0); }) < 0.02);
}

TEST_CASE("Rosinski form rejects a Brown-Resnick model outside the dissipative range") {
  ModelSpec m;
  m.kind = ModelKind::brown_resnick;
  m.variogram_slope = 5.0;
  const FieldSampler s(m, Window::cube(1, 4));
  const ClusterBuilder builder(ClusterConstructionSpec{}, s);
  const auto shift = ShiftDistribution::covering(s.window(), s.window());
  CHECK_THROWS_AS(rosinski_representer(builder, shift, s.window()), ConfigError);
  RandomStream st(1, 0);
  CHECK_THROWS_AS(rosinski_sample(builder, shift, spec_for({{0}}), st), ConfigError);
  CHECK_NOTHROW(dehaan_sample(s, spec_for({{0}}), st));
}
