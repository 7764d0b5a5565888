/**
 * @file checks.hpp
 * @brief Seeded verification suites comparing fast paths against the
 * reference computations in oracles.hpp. Used by `selftest` and by the
 * acceptance runner with larger counts.
 */

#ifndef PINV_CHECKS_HPP
#define PINV_CHECKS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pinv/core.hpp"

namespace pinv {

struct CheckResult {
  std::string group;  ///< qp, hv, grad, weights
  std::string name;
  bool passed = false;
  double worst = 0.0;  ///< worst observed error (meaning depends on the check)
  std::string detail;
};

/// solve_qp vs qp_grid_oracle on random instances with m ∈ {2,3,4}, n = 10.
/// Passes when every objective gap is ≤ tolerance and every reported
/// feasible solution has slacks ≥ −1e-8.
[[nodiscard]] CheckResult check_qp_oracle(int instances, std::uint64_t seed,
                                          double tolerance = 1e-4);

using HypervolumeFn = std::function<double(std::span<const ObjectiveVector>,
                                           std::span<const double>)>;

/// Exact hypervolume vs Monte Carlo on random fronts, m cycling over 2, 3, 4.
/// Passes when every |exact − estimate| ≤ 3 standard errors. exact_hv
/// replaces the hypervolume under test (empty means metrics' hypervolume).
[[nodiscard]] CheckResult check_hv_monte_carlo(int fronts, std::size_t samples,
                                               std::uint64_t seed,
                                               const HypervolumeFn& exact_hv = {});

/// Analytic vs central-difference gradients at `points` random points.
/// which: synthetic, ngram-uni, ngram-bi, net-input, net-params.
[[nodiscard]] CheckResult check_gradients(const std::string& which, int points,
                                          std::uint64_t seed, double tolerance = 1e-5);

/// Unit norm, non-negativity, monotonicity, and lifting of the generators.
[[nodiscard]] CheckResult check_weight_generators(std::uint64_t seed);

/// The quick suite behind `selftest`; rows whose group or name contains
/// filter (all rows when filter is empty).
[[nodiscard]] std::vector<CheckResult> run_selftest(const std::string& filter);

}  // namespace pinv

#endif  // PINV_CHECKS_HPP
