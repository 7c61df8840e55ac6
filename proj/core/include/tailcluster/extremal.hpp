#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tailcluster/accumulator.hpp"
#include "tailcluster/cluster.hpp"
#include "tailcluster/models.hpp"
#include "tailcluster/montecarlo.hpp"

namespace tailcluster {

struct EstimateReport {
  std::string representation;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double n_effective = 0.0;
  /// Sample variance of the per-draw quantity.
  double sample_variance = 0.0;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
};

struct EstimatorOptions {
  std::uint64_t seed = 0;
  std::size_t n = 10'000;
  ParallelOptions parallel;
  /// Divide by the realized weight sum instead of its known expectation.
  bool self_normalized = false;
};

using DrawSource = std::function<WeightedDraw(RandomStream&)>;

/// Which event the Berman representation uses for b > 1.
/// corrected: 1{M_L(Y) > b}. literal: 1{B_L(bY) > 0}, which overshoots by b^alpha.
enum class BermanVariant { corrected, literal };
/// Albin event: no exceedance strictly after the origin, or strictly before it.
enum class AlbinAnchor { after_origin, before_origin };

/// E[sup_L ||Theta||^alpha / (Delta(L) S_L(Theta))].
EstimateReport estimate_samorodnitsky(const FieldSampler& sampler, const LatticeSpec& lattice,
                                      const EstimatorOptions& options);
/// b^alpha E[||Y(0)||^tau 1{event} / (Delta(L) B_{L,tau}(Y))].
EstimateReport estimate_berman(const FieldSampler& sampler, const LatticeSpec& lattice, double tau,
                               const EstimatorOptions& options, double b = 1.0,
                               BermanVariant variant = BermanVariant::corrected);
/// (b^alpha / Delta(L)) P(sup_{t > 0, t in L} ||Y(t)|| <= 1, M_L(Y) > b).
EstimateReport estimate_albin(const FieldSampler& sampler, const LatticeSpec& lattice, double b,
                              const EstimatorOptions& options, AlbinAnchor anchor = AlbinAnchor::after_origin);
/// E[sup_{t >= 0} ||f||^alpha - sup_{t > 0} ||f||^alpha] / Delta(L), f = Theta or Z.
EstimateReport estimate_difference(const FieldSampler& sampler, const LatticeSpec& lattice, bool use_Z,
                                   const EstimatorOptions& options);
EstimateReport estimate_difference(const DrawSource& source, const Window& window, const LatticeSpec& lattice,
                                   double alpha, const EstimatorOptions& options, std::string name);
/// E[sup_{t in L} ||Q(t)||^alpha] over construct_Q draws.
EstimateReport estimate_cluster_sup(const ClusterConstructionSpec& construction, const FieldSampler& sampler,
                                    const EstimatorOptions& options);
EstimateReport estimate_cluster_sup(const DrawSource& source, const Window& window, const LatticeSpec& lattice,
                                    double alpha, const EstimatorOptions& options, std::string name);
/// Ambient-grid index from a sublattice L (requires ||Z(0)|| > 0 almost surely). Experimental.
EstimateReport estimate_mixed(const FieldSampler& sampler, const LatticeSpec& lattice, double tau, double b,
                              const EstimatorOptions& options);

struct GridLimitPoint {
  double n = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

/// n^(-l) E[sup_{[0,n]^l and L} ||Z||^alpha] for each n; windows grow to contain [0,n]^l.
std::vector<GridLimitPoint> estimate_grid_limit(const ModelSpec& model, const LatticeSpec& lattice,
                                                const Window& window, std::span<const double> n_list,
                                                const EstimatorOptions& options);

struct TruncationPoint {
  double m = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

/// scale^(-1) E[sup_target ||Z_N - Z_N^(m)||^alpha] for each m, where
/// Z_N = random_shift(Q) and Z_N^(m) shifts the m-truncated Q by the same N.
/// All m share each draw of (Q, N).
std::vector<TruncationPoint> estimate_m_truncation(const ClusterBuilder& builder, const ShiftDistribution& shift_dist,
                                                   const Window& target, double scale,
                                                   std::span<const double> m_list, const EstimatorOptions& options);

struct ParetoCheck {
  double ks = 1.0;
  std::size_t accepted = 0;
  std::size_t attempts = 0;
  double min_value = 0.0;
};

/// KS distance of M_L(Y) / b given {first exceedance at 0, M_L(Y) > b}
/// to the alpha-Pareto law. Each conditional draw rejects at most max_attempts times.
ParetoCheck pareto_conditional_check(const FieldSampler& sampler, const LatticeSpec& lattice, double b,
                                     std::size_t n_conditional, std::uint64_t seed,
                                     const ParallelOptions& parallel = {}, std::size_t max_attempts = 1'000'000);

struct ConsistencyPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double z = 0.0;
};

struct ConsistencyVerdict {
  std::vector<ConsistencyPair> pairs;
  bool passed = true;
  std::size_t flagged = 0;  // pairs with z in [4, 5)
  double max_z = 0.0;
};

ConsistencyVerdict consistency_report(std::span<const EstimateReport> reports);

/// Runs `estimate` on the window and on the doubled window and records the
/// drift of the first against the second in the returned report.
EstimateReport with_window_drift(const ModelSpec& model, const Window& window,
                                 const std::function<EstimateReport(const FieldSampler&)>& estimate);

}  // namespace tailcluster
