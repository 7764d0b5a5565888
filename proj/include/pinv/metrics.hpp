/**
 * @file metrics.hpp
 * @brief Hypervolume, non-uniformity summaries, and front coverage.
 */

#ifndef PINV_METRICS_HPP
#define PINV_METRICS_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinv/core.hpp"

namespace pinv {

class UnsupportedDimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact Lebesgue measure of ⋃_p [p, ref] for 2 ≤ m ≤ 4. Points that do not
/// strictly dominate ref in every coordinate are clipped (they may still add
/// a zero-measure sliver).
[[nodiscard]] double hypervolume(std::span<const ObjectiveVector> points,
                                 std::span<const double> ref);

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Uniform sampling of the box [min over points, ref]. Any m ≥ 1.
[[nodiscard]] MonteCarloEstimate hypervolume_monte_carlo(
    std::span<const ObjectiveVector> points, std::span<const double> ref,
    std::size_t samples, std::uint64_t seed);

/// Mean of the k smallest per-entry μ values.
[[nodiscard]] double nonuniformity_report(const ParetoArchive& archive,
                                          const WeightVector& weights, std::size_t k);

/// Fraction of truth samples with a front point within `radius` (Euclidean).
/// An empty front covers nothing.
[[nodiscard]] double front_coverage(std::span<const ObjectiveVector> front,
                                    std::span<const ObjectiveVector> truth,
                                    double radius = 0.05);

}  // namespace pinv

#endif  // PINV_METRICS_HPP
