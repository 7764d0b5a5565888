/**
 * @file epo_qp.hpp
 * @brief Non-dominating descent direction for weight-conditioned Pareto
 * search.
 *
 * Given per-objective gradients G = [g_1..g_m] at a relaxed point, the
 * direction d = G β* uses simplex coefficients β* minimizing
 *
 *     ‖GᵀG β − a‖²   s.t.  β ≥ 0, Σβ = 1,  βᵀGᵀg_j ≥ 0 for j ∈ J,
 *
 * where a is an anchor that either pulls the weighted losses toward the
 * λ⁻¹ ray (balance mode) or shrinks them all (descent mode). J is the set of
 * objectives that must not increase to first order.
 */

#ifndef PINV_EPO_QP_HPP
#define PINV_EPO_QP_HPP

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "pinv/core.hpp"

namespace pinv {

/// n×m; column i is the gradient of objective i.
using GradientMatrix = Eigen::MatrixXd;

/// Raised when Σ λ_i l_i = 0, where the weighted normalization is undefined.
class DegenerateLossError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// ĥ_i = λ_i l_i / Σ λ_i' l_i'.
[[nodiscard]] std::vector<double> normalized_weighted_losses(
    const ObjectiveVector& losses, const WeightVector& weights);

/// μ = KL(ĥ ‖ uniform). Zero exactly on the λ⁻¹ ray.
[[nodiscard]] double nonuniformity(const ObjectiveVector& losses,
                                   const WeightVector& weights);

/// Indices attaining max_j l_j λ_j (exact ties all included).
[[nodiscard]] std::vector<std::size_t> argmax_relative(
    const ObjectiveVector& losses, const WeightVector& weights);

/// J* when μ ≤ ε, otherwise every index.
[[nodiscard]] std::vector<std::size_t> active_index_set(
    const ObjectiveVector& losses, const WeightVector& weights, double epsilon);

enum class AnchorMode { kBalance, kDescent };

struct AnchorDirection {
  Eigen::VectorXd a;
  AnchorMode mode = AnchorMode::kDescent;
};

/// Balance mode (μ > ε): a_j = λ_j (log(m ĥ_j) − μ), zero where ĥ_j = 0.
/// Descent mode (μ ≤ ε): a_j = λ_j l_j.
[[nodiscard]] AnchorDirection anchor_direction(const ObjectiveVector& losses,
                                               const WeightVector& weights,
                                               double epsilon);

/// Convex-combination weights β on the m-simplex.
struct SimplexCoefficients {
  Eigen::VectorXd beta;

  [[nodiscard]] bool valid(double tol = 1e-9) const;
};

enum class QpMethod {
  kAuto,               ///< active-set enumeration for small m, else kProjectedGradient
  kActiveSet,          ///< exact enumeration of working sets
  kProjectedGradient,  ///< accelerated projected gradient with escalating penalty
};

struct QpOptions {
  QpMethod method = QpMethod::kAuto;
  /// kAuto switches to projected gradient above this many objectives.
  std::size_t active_set_max_m = 6;
  int penalty_escalations = 6;
};

struct QpResult {
  SimplexCoefficients coefficients;
  double objective = 0.0;
  /// (GᵀGβ)_j for each j in J, in J order.
  std::vector<double> slacks;
  /// The J constraints could not be met; β solves the simplex-only problem.
  bool infeasible = false;
  /// G was identically zero; β is uniform and the direction vanishes.
  bool degenerate = false;
};

/// ‖Mβ − a‖² for a Gram matrix M.
[[nodiscard]] double qp_objective(const Eigen::MatrixXd& gram,
                                  const Eigen::VectorXd& anchor,
                                  const Eigen::VectorXd& beta);

[[nodiscard]] QpResult solve_qp(const GradientMatrix& gradients,
                                const Eigen::VectorXd& anchor,
                                std::span<const std::size_t> active,
                                const QpOptions& options = {});

/// d = G β.
[[nodiscard]] Eigen::VectorXd non_dominating_direction(
    const GradientMatrix& gradients, const SimplexCoefficients& coefficients);

/// d = G λ, the linear-scalarization baseline.
[[nodiscard]] Eigen::VectorXd ls_direction(const GradientMatrix& gradients,
                                           const WeightVector& weights);

/// Verbose dump: Gram matrix, anchor, J, β, slacks.
[[nodiscard]] nlohmann::json qp_diagnostics(const GradientMatrix& gradients,
                                            const Eigen::VectorXd& anchor,
                                            std::span<const std::size_t> active,
                                            const QpResult& result);

}  // namespace pinv

#endif  // PINV_EPO_QP_HPP
