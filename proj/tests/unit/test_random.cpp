#include <cmath>
#include <vector>

#include "doctest.h"
#include "tailcluster/random.hpp"

using namespace tailcluster;

TEST_CASE("streams are pure functions of (seed, index)") {
  RandomStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  std::vector<double> va, vb, vc, vd;
  for (int i = 0; i < 20; ++i) {
    va.push_back(a.uniform());
    vb.push_back(b.uniform());
    vc.push_back(c.uniform());
    vd.push_back(d.uniform());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("uniform and normal moments") {
  const int n = 200'000;
  double su = 0.0, sn = 0.0, sn2 = 0.0, se = 0.0;
  for (int i = 0; i < n; ++i) {
    RandomStream s(11, static_cast<std::uint64_t>(i));
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    su += u;
    const double z = s.standard_normal();
    sn += z;
    sn2 += z * z;
    se += s.exponential();
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(sn / n) < 3.0 / std::sqrt(n) * 1.5);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(se / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("neighbouring streams are uncorrelated") {
  const int n = 100'000;
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    RandomStream a(5, static_cast<std::uint64_t>(2 * i)), b(5, static_cast<std::uint64_t>(2 * i + 1));
    sxy += (a.uniform() - 0.5) * (b.uniform() - 0.5);
  }
  // sd of the mean of a product of two centered uniforms is (1/12)/sqrt(n).
  CHECK(std::fabs(sxy / n) < 4.0 * (1.0 / 12.0) / std::sqrt(n));
}

TEST_CASE("discrete draws follow the weights") {
  const double w[] = {1.0, 2.0, 7.0};
  int counts[3] = {0, 0, 0};
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    RandomStream s(9, static_cast<std::uint64_t>(i));
    ++counts[s.discrete(w, 3, 10.0)];
  }
  for (int k = 0; k < 3; ++k) {
    const double p = w[k] / 10.0;
    CHECK(std::fabs(counts[k] / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("uniform_open excludes zero") {
  for (int i = 0; i < 10'000; ++i) {
    RandomStream s(1, static_cast<std::uint64_t>(i));
    const double u = s.uniform_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}
