#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tailcluster/extremal.hpp"

namespace tailcluster {

enum class MaxStableRepresentation { dehaan, rosinski };

struct MaxStableSampleSpec {
  std::vector<GridPoint> points;
  double stopping_epsilon = 1e-3;
  std::size_t max_terms = 1'000'000;
  /// Estimate of E[max over the points of ||Z(t)||^alpha] used by the stopping rule.
  double sup_moment = 1.0;

  void validate(const Window& window) const;
};

struct MaxStableSample {
  std::vector<double> values;
  std::size_t terms = 0;
  /// Gamma / (C / m_min^alpha) at stop; the stopping rule needs this >= 1 / epsilon.
  double achieved_epsilon = 0.0;
  bool truncated = false;
};

/// X(t) = max_i Gamma_i^(-1/alpha) ||Z_i(t)|| with unit-rate Poisson arrivals
/// Gamma_i and i.i.d. representer draws Z_i (weights folded into the field).
///
/// Stops once Gamma > C / (epsilon m_min^alpha), where m_min is the smallest
/// running maximum over the points and C = spec.sup_moment.
MaxStableSample max_stable_sample(const DrawSource& representer, double alpha, const Window& window,
                                  const MaxStableSampleSpec& spec, RandomStream& stream);

MaxStableSample dehaan_sample(const FieldSampler& sampler, const MaxStableSampleSpec& spec, RandomStream& stream);

/// Representer for the Rosinski form: Z_N = random_shift(construct_Q(...)),
/// weight folded so every term is a plain field on `target`.
DrawSource rosinski_representer(const ClusterBuilder& builder, const ShiftDistribution& shift_dist,
                                const Window& target);

MaxStableSample rosinski_sample(const ClusterBuilder& builder, const ShiftDistribution& shift_dist,
                                const MaxStableSampleSpec& spec, RandomStream& stream);

struct FidiEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo E[max_i x_i^(-alpha) ||Z(t_i)||^alpha].
FidiEstimate fidi_neglog(const DrawSource& representer, const Window& window, double alpha,
                         std::span<const GridPoint> points, std::span<const double> levels,
                         const EstimatorOptions& options);
FidiEstimate fidi_neglog(const FieldSampler& sampler, std::span<const GridPoint> points,
                         std::span<const double> levels, const EstimatorOptions& options);

/// Pilot estimate of E[max over the points of ||Z(t)||^alpha] for the stopping rule.
double pilot_sup_moment(const DrawSource& representer, const Window& window, double alpha,
                        std::span<const GridPoint> points, const EstimatorOptions& options);

/// n independent samples of X at the points, sample i on stream (seed, i).
std::vector<MaxStableSample> max_stable_batch(const DrawSource& representer, double alpha, const Window& window,
                                              const MaxStableSampleSpec& spec, std::size_t n, std::uint64_t seed,
                                              const ParallelOptions& parallel = {});

}  // namespace tailcluster
