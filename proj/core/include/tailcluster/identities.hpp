#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tailcluster/extremal.hpp"

namespace tailcluster {

enum class FunctionalKind { bounded_ratio, alpha_weighted, indicator_exceedance };

/// A test functional F on field samples, with its declared properties.
struct TestFunctional {
  std::string id;
  FunctionalKind kind = FunctionalKind::bounded_ratio;
  bool shift_invariant = false;
  /// Outputs lie in [0, bound]; infinity for unbounded alpha-weighted functionals.
  double bound = 1.0;
  std::function<double(const FieldSample&, double alpha)> eval;
};

/// Built-in functionals: ratio_next, ratio_prev, ratio_here, exceed_next, sup_alpha,
/// pair_product, sup_above_2, inverse_exceedance_count.
const TestFunctional& find_functional(std::string_view id);
const std::vector<TestFunctional>& builtin_functionals();

enum class IdentityId { eqDo20, tYY, stimmt, appendix_0e11A, appendix_gjelle, nota_window };

std::string_view to_string(IdentityId id);
IdentityId parse_identity(std::string_view text);

struct IdentityCase {
  IdentityId identity = IdentityId::eqDo20;
  ModelSpec model;
  Window window = Window::cube(1, 32);
  std::string functional = "ratio_next";
  Coord h = 1;
  double x = 2.0;
  double tau = 0.0;
  /// Which right-hand side of a multi-way identity to compare with the first (1-based).
  int side = 1;
  /// Half-width of K for nota_window.
  Coord k_radius = 1;
  /// Replace the functional by the constant 1 (tYY closed-form case).
  bool constant_functional = false;
  std::size_t n = 100'000;
  std::uint64_t seed = 1;
  /// Estimate the left side on the right side's seed and vice versa.
  bool swap_seeds = false;
  ParallelOptions parallel;

  std::string label() const;
};

struct IdentityResult {
  std::string label;
  double lhs = 0.0;
  double lhs_std_error = 0.0;
  double rhs = 0.0;
  double rhs_std_error = 0.0;
  /// (lhs - rhs) / sqrt(se_l^2 + se_r^2), signed.
  double z = 0.0;
};

/// Both sides are estimated on independent seeds.
IdentityResult run_identity(const IdentityCase& c);

/// The default battery over {ar1, moving_max} models.
std::vector<IdentityCase> default_battery(std::size_t n, std::uint64_t seed);

struct BatteryVerdict {
  std::vector<IdentityResult> results;
  bool passed = true;
  std::size_t flagged = 0;
  double max_abs_z = 0.0;
};

BatteryVerdict run_battery(const std::vector<IdentityCase>& cases);

struct EventAgreement {
  std::vector<std::string> events;
  /// rates[i][j]: fraction of draws on which events i and j agree.
  std::vector<std::vector<double>> rates;
  double min_rate = 1.0;
  bool passed = true;
};

/// Finite-window proxies of the events {S(Y) < inf}, {Theta(t) -> 0},
/// {J1(Theta) exists}, {J2(Y) exists}, {B(Y) < inf}; diagnostic only.
EventAgreement run_event_equality(const FieldSampler& sampler, std::size_t n, std::uint64_t seed,
                                  const ParallelOptions& parallel = {});

}  // namespace tailcluster
