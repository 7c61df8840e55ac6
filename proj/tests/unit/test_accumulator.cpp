#include <cmath>
#include <vector>

#include "doctest.h"
#include "tailcluster/accumulator.hpp"
#include "tailcluster/montecarlo.hpp"
#include "tailcluster/random.hpp"

using namespace tailcluster;

namespace {

std::vector<std::pair<double, double>> pairs(std::size_t n, std::uint64_t seed) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream s(seed, i);
    const double w = s.exponential();
    out.emplace_back(w, w * (s.uniform() + 2.0));
  }
  return out;
}

PairAccumulator fill(const std::vector<std::pair<double, double>>& v, std::size_t lo, std::size_t hi) {
  PairAccumulator a;
  for (std::size_t i = lo; i < hi; ++i) a.add(v[i].first, v[i].second);
  return a;
}

void check_close(const MeanEstimate& a, const MeanEstimate& b) {
  CHECK(a.n == b.n);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  CHECK(a.std_error == doctest::Approx(b.std_error).epsilon(1e-10));
  CHECK(a.sample_variance == doctest::Approx(b.sample_variance).epsilon(1e-10));
  CHECK(a.n_effective == doctest::Approx(b.n_effective).epsilon(1e-10));
}

}  // namespace

TEST_CASE("merge equals the concatenated stream") {
  const auto v = pairs(1000, 1);
  PairAccumulator all = fill(v, 0, 1000);
  PairAccumulator a = fill(v, 0, 123), b = fill(v, 123, 700), c = fill(v, 700, 1000);
  PairAccumulator left = a;
  left.merge(b);
  left.merge(c);
  PairAccumulator bc = b;
  bc.merge(c);
  PairAccumulator right = a;
  right.merge(bc);
  PairAccumulator swapped = c;
  swapped.merge(a);
  swapped.merge(b);
  for (const PairAccumulator* x : {&left, &right, &swapped}) {
    check_close(x->plain(), all.plain());
    check_close(x->ratio(), all.ratio());
  }
  PairAccumulator empty;
  PairAccumulator with_empty = all;
  with_empty.merge(empty);
  check_close(with_empty.plain(), all.plain());
  empty.merge(all);
  check_close(empty.plain(), all.plain());
}

TEST_CASE("plain mean and standard error") {
  PairAccumulator a;
  for (double y : {1.0, 2.0, 3.0, 4.0}) a.add(1.0, y);
  const MeanEstimate m = a.plain();
  CHECK(m.value == doctest::Approx(2.5));
  CHECK(m.sample_variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(m.n_effective == doctest::Approx(4.0));
}

TEST_CASE("ratio estimate and delta-method error") {
  const auto v = pairs(20'000, 2);
  const PairAccumulator a = fill(v, 0, v.size());
  // Reference delta-method computation.
  double sw = 0, sy = 0;
  for (auto [w, y] : v) {
    sw += w;
    sy += y;
  }
  const double r = sy / sw;
  const double n = static_cast<double>(v.size());
  double ss = 0, sw2 = 0;
  for (auto [w, y] : v) {
    ss += (y - r * w) * (y - r * w);
    sw2 += w * w;
  }
  const double mw = sw / n;
  const double se = std::sqrt(ss / (n - 1) / n) / mw;
  const MeanEstimate m = a.ratio();
  CHECK(m.value == doctest::Approx(r).epsilon(1e-12));
  CHECK(m.std_error == doctest::Approx(se).epsilon(1e-6));
  CHECK(m.n_effective == doctest::Approx(sw * sw / sw2).epsilon(1e-9));
  CHECK(m.n_effective <= n);
  CHECK(m.std_error >= 0.0);
  // E[y | w] has mean 2.5 for every w.
  CHECK(std::fabs(m.value - 2.5) < 4.0 * m.std_error);
}

TEST_CASE("run_chunked is independent of thread count") {
  auto fn = [](std::size_t, RandomStream& s, PairAccumulator& acc) {
    const double w = s.exponential();
    acc.add(w, w * s.standard_normal());
  };
  const auto one = run_chunked<PairAccumulator>(42, 10'000, {1, 256}, fn);
  const auto four = run_chunked<PairAccumulator>(42, 10'000, {4, 256}, fn);
  const MeanEstimate a = one.ratio(), b = four.ratio();
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(one.count() == 10'000);
}

TEST_CASE("run_chunked rethrows worker exceptions") {
  auto fn = [](std::size_t i, RandomStream&, PairAccumulator&) {
    if (i == 777) throw std::runtime_error("boom");
  };
  CHECK_THROWS_AS(run_chunked<PairAccumulator>(1, 2000, {3, 100}, fn), std::runtime_error);
}
