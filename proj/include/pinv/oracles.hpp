/**
 * @file oracles.hpp
 * @brief Slow, independent reference computations used to check the fast
 * paths: a lattice search for the direction QP and central differences.
 */

#ifndef PINV_ORACLES_HPP
#define PINV_ORACLES_HPP

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <span>

namespace pinv {

struct GridOracleResult {
  Eigen::VectorXd beta;
  double objective = 0.0;
};

/// Minimizes ‖Mβ − a‖² over simplex lattice points with (Mβ)_j ≥ 0 for j in
/// active, then repeatedly searches a lattice box around the best point,
/// halving it zoom_levels times. Returns nothing when no lattice point is
/// feasible. m ≤ 4.
[[nodiscard]] std::optional<GridOracleResult> qp_grid_oracle(
    const Eigen::MatrixXd& gram, const Eigen::VectorXd& anchor,
    std::span<const std::size_t> active, int zoom_levels = 40);

/// Central-difference Jacobian of f: R^n → R^m, returned n×m (column i is
/// the gradient of output i).
[[nodiscard]] Eigen::MatrixXd central_difference(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h);

/// Normwise relative error max|a − b| / max|b| (denominator floored at
/// 1e-8 so an all-zero reference does not divide by zero).
[[nodiscard]] double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace pinv

#endif  // PINV_ORACLES_HPP
