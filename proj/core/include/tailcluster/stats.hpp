#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tailcluster {

/// sup_x |F_n(x) - F(x)| for a continuous reference CDF. Sorts a copy.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
/// sup_x |F_n(x) - G_m(x)|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// |x - y| / sqrt(se_x^2 + se_y^2), 0 when both errors vanish and x == y.
double z_score(double x, double se_x, double y, double se_y);

}  // namespace tailcluster
