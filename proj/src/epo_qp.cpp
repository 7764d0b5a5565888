#include "pinv/epo_qp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "pinv/simplex.hpp"

namespace pinv {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch");
  }
}

double weighted_sum(const ObjectiveVector& losses, const WeightVector& weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) sum += losses[i] * weights[i];
  return sum;
}

std::vector<double> constraint_slacks(const Eigen::MatrixXd& gram,
                                      const Eigen::VectorXd& beta,
                                      std::span<const std::size_t> active) {
  Eigen::VectorXd products = gram * beta;
  std::vector<double> slacks;
  slacks.reserve(active.size());
  for (std::size_t j : active) slacks.push_back(products(Eigen::Index(j)));
  return slacks;
}

Eigen::VectorXd clean_simplex(Eigen::VectorXd beta) {
  beta = beta.cwiseMax(0.0);
  double total = beta.sum();
  if (total <= 0.0) {
    return Eigen::VectorXd::Constant(beta.size(), 1.0 / double(beta.size()));
  }
  return beta / total;
}

// Exhaustive working-set enumeration. Every candidate that passes the
// feasibility check is a genuine feasible point with an exactly evaluated
// objective, so the best one is optimal whenever the optimum's working set
// is solved accurately (always the case at vertices).
std::optional<Eigen::VectorXd> solve_by_enumeration(
    const Eigen::MatrixXd& gram, const Eigen::VectorXd& anchor,
    std::span<const std::size_t> active) {
  const Eigen::Index m = gram.rows();
  std::vector<Eigen::RowVectorXd> rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    rows.push_back(Eigen::RowVectorXd::Unit(m, i));
  }
  for (std::size_t j : active) rows.push_back(gram.row(Eigen::Index(j)));

  const Eigen::MatrixXd hessian = 2.0 * gram.transpose() * gram;
  const Eigen::VectorXd linear = 2.0 * gram.transpose() * anchor;
  constexpr double kFeasTol = 1e-11;

  std::optional<Eigen::VectorXd> best;
  double best_value = std::numeric_limits<double>::infinity();
  const std::uint32_t masks = std::uint32_t{1} << rows.size();
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    const int working = std::popcount(mask);
    if (working > m - 1) continue;
    const Eigen::Index dim = m + 1 + working;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    kkt.topLeftCorner(m, m) = hessian;
    rhs.head(m) = linear;
    kkt.block(m, 0, 1, m).setOnes();
    kkt.block(0, m, m, 1).setOnes();
    rhs(m) = 1.0;
    Eigen::Index r = m + 1;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (!(mask & (std::uint32_t{1} << k))) continue;
      kkt.block(r, 0, 1, m) = rows[k];
      kkt.block(0, r, m, 1) = rows[k].transpose();
      ++r;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
    Eigen::VectorXd solution = cod.solve(rhs);
    const double residual = (kkt * solution - rhs).norm();
    if (!solution.allFinite() ||
        residual > 1e-9 * (1.0 + kkt.norm() * solution.norm() + rhs.norm())) {
      continue;
    }
    Eigen::VectorXd beta = solution.head(m);
    if (beta.minCoeff() < -kFeasTol) continue;
    Eigen::VectorXd products = gram * beta;
    bool feasible = true;
    for (std::size_t j : active) {
      if (products(Eigen::Index(j)) < -kFeasTol) feasible = false;
    }
    if (!feasible) continue;
    double value = (products - anchor).squaredNorm();
    if (value < best_value) {
      best_value = value;
      best = std::move(beta);
    }
  }
  return best;
}

Eigen::VectorXd fista_on_simplex(const Eigen::MatrixXd& gram,
                                 const Eigen::VectorXd& anchor,
                                 std::span<const std::size_t> active,
                                 double penalty, Eigen::VectorXd start) {
  const double lipschitz =
      2.0 * gram.squaredNorm() * (1.0 + penalty * double(active.size())) + 1e-300;
  auto gradient = [&](const Eigen::VectorXd& beta) {
    Eigen::VectorXd products = gram * beta;
    Eigen::VectorXd g = 2.0 * gram.transpose() * (products - anchor);
    for (std::size_t j : active) {
      double violation = std::min(0.0, products(Eigen::Index(j)));
      if (violation < 0.0) {
        g += 2.0 * penalty * violation * gram.row(Eigen::Index(j)).transpose();
      }
    }
    return g;
  };
  Eigen::VectorXd beta = std::move(start);
  Eigen::VectorXd y = beta;
  double t = 1.0;
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd next = project_to_simplex(y - gradient(y) / lipschitz);
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - beta);
    double change = (next - beta).lpNorm<Eigen::Infinity>();
    beta = std::move(next);
    t = t_next;
    if (change < 1e-15) break;
  }
  return beta;
}

double min_slack(const Eigen::MatrixXd& gram, const Eigen::VectorXd& beta,
                 std::span<const std::size_t> active) {
  double worst = std::numeric_limits<double>::infinity();
  Eigen::VectorXd products = gram * beta;
  for (std::size_t j : active) worst = std::min(worst, products(Eigen::Index(j)));
  return worst;
}

// Penalty escalation; when the penalized solution is still marginally
// infeasible, slide toward the min-norm point, whose slacks are all ≥ ‖Gβ‖².
std::optional<Eigen::VectorXd> solve_by_projected_gradient(
    const Eigen::MatrixXd& gram, const Eigen::VectorXd& anchor,
    std::span<const std::size_t> active, int escalations) {
  const Eigen::Index m = gram.rows();
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(m, 1.0 / double(m));
  double penalty = 10.0;
  for (int round = 0; round <= escalations; ++round) {
    beta = fista_on_simplex(gram, anchor, active, penalty, beta);
    if (active.empty() || min_slack(gram, beta, active) >= 0.0) return beta;
    penalty *= 10.0;
  }
  Eigen::VectorXd min_norm = fista_on_simplex(
      gram, Eigen::VectorXd::Zero(m), {}, 0.0,
      Eigen::VectorXd::Constant(m, 1.0 / double(m)));
  Eigen::VectorXd here = gram * beta;
  Eigen::VectorXd there = gram * min_norm;
  double step = 0.0;
  for (std::size_t j : active) {
    const auto jj = Eigen::Index(j);
    if (here(jj) >= 0.0) continue;
    if (there(jj) <= 0.0) return std::nullopt;
    step = std::max(step, -here(jj) / (there(jj) - here(jj)));
  }
  if (step > 1e-3) return std::nullopt;
  return ((1.0 - step) * beta + step * min_norm).eval();
}

}  // namespace

std::vector<double> normalized_weighted_losses(const ObjectiveVector& losses,
                                               const WeightVector& weights) {
  require_same_length(losses.size(), weights.size(), "normalized_weighted_losses");
  const double total = weighted_sum(losses, weights);
  if (!(total > 0.0)) {
    throw DegenerateLossError("weighted losses sum to zero");
  }
  std::vector<double> h(losses.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = weights[i] * losses[i] / total;
  return h;
}

double nonuniformity(const ObjectiveVector& losses, const WeightVector& weights) {
  const auto h = normalized_weighted_losses(losses, weights);
  const double m = double(h.size());
  double mu = 0.0;
  for (double hi : h) {
    if (hi > 0.0) mu += hi * std::log(hi * m);
  }
  return std::max(mu, 0.0);
}

std::vector<std::size_t> argmax_relative(const ObjectiveVector& losses,
                                         const WeightVector& weights) {
  const double top = relative_max(losses, weights);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < losses.size(); ++j) {
    if (losses[j] * weights[j] == top) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> active_index_set(const ObjectiveVector& losses,
                                          const WeightVector& weights,
                                          double epsilon) {
  if (nonuniformity(losses, weights) <= epsilon) {
    return argmax_relative(losses, weights);
  }
  std::vector<std::size_t> all(losses.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

AnchorDirection anchor_direction(const ObjectiveVector& losses,
                                 const WeightVector& weights, double epsilon) {
  const auto h = normalized_weighted_losses(losses, weights);
  const double mu = nonuniformity(losses, weights);
  const auto m = Eigen::Index(h.size());
  AnchorDirection out;
  out.a = Eigen::VectorXd::Zero(m);
  if (mu > epsilon) {
    out.mode = AnchorMode::kBalance;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (h[j] > 0.0) out.a(j) = weights[j] * (std::log(double(m) * h[j]) - mu);
    }
  } else {
    out.mode = AnchorMode::kDescent;
    for (Eigen::Index j = 0; j < m; ++j) out.a(j) = weights[j] * losses[j];
  }
  return out;
}

bool SimplexCoefficients::valid(double tol) const {
  return beta.size() > 0 && beta.minCoeff() >= 0.0 &&
         std::abs(beta.sum() - 1.0) <= tol;
}

double qp_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& anchor,
                    const Eigen::VectorXd& beta) {
  return (gram * beta - anchor).squaredNorm();
}

QpResult solve_qp(const GradientMatrix& gradients, const Eigen::VectorXd& anchor,
                  std::span<const std::size_t> active, const QpOptions& options) {
  const Eigen::Index m = gradients.cols();
  if (m < 1 || gradients.rows() < 1) {
    throw DimensionError("solve_qp: gradient matrix must be non-empty");
  }
  require_same_length(std::size_t(anchor.size()), std::size_t(m), "solve_qp");
  if (!gradients.allFinite() || !anchor.allFinite()) {
    throw std::invalid_argument("solve_qp: non-finite input");
  }
  for (std::size_t j : active) {
    if (j >= std::size_t(m)) throw DimensionError("solve_qp: J index out of range");
  }

  const Eigen::MatrixXd gram = gradients.transpose() * gradients;
  QpResult result;
  auto finish = [&](Eigen::VectorXd beta) {
    result.coefficients.beta = clean_simplex(std::move(beta));
    result.objective = qp_objective(gram, anchor, result.coefficients.beta);
    result.slacks = constraint_slacks(gram, result.coefficients.beta, active);
    return result;
  };

  if (m == 1) return finish(Eigen::VectorXd::Ones(1));
  const double scale = gram.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    result.degenerate = true;
    return finish(Eigen::VectorXd::Constant(m, 1.0 / double(m)));
  }

  // Work with the Gram matrix normalized to unit max entry; the minimizer of
  // ‖Mβ − a‖² equals that of ‖(M/s)β − a/s‖² and the J constraints are
  // scale-free.
  const Eigen::MatrixXd scaled_gram = gram / scale;
  const Eigen::VectorXd scaled_anchor = anchor / scale;

  const bool enumerate =
      options.method == QpMethod::kActiveSet ||
      (options.method == QpMethod::kAuto && std::size_t(m) <= options.active_set_max_m);
  auto solve = [&](std::span<const std::size_t> constraints) {
    return enumerate
               ? solve_by_enumeration(scaled_gram, scaled_anchor, constraints)
               : solve_by_projected_gradient(scaled_gram, scaled_anchor, constraints,
                                             options.penalty_escalations);
  };

  if (auto beta = solve(active)) return finish(std::move(*beta));
  result.infeasible = true;
  auto fallback = solve({});
  return finish(fallback ? std::move(*fallback)
                         : Eigen::VectorXd::Constant(m, 1.0 / double(m)));
}

Eigen::VectorXd non_dominating_direction(const GradientMatrix& gradients,
                                         const SimplexCoefficients& coefficients) {
  require_same_length(std::size_t(gradients.cols()),
                      std::size_t(coefficients.beta.size()),
                      "non_dominating_direction");
  return gradients * coefficients.beta;
}

Eigen::VectorXd ls_direction(const GradientMatrix& gradients,
                             const WeightVector& weights) {
  require_same_length(std::size_t(gradients.cols()), weights.size(), "ls_direction");
  Eigen::Map<const Eigen::VectorXd> lambda(weights.vec().data(),
                                           Eigen::Index(weights.size()));
  return gradients * lambda;
}

nlohmann::json qp_diagnostics(const GradientMatrix& gradients,
                              const Eigen::VectorXd& anchor,
                              std::span<const std::size_t> active,
                              const QpResult& result) {
  const Eigen::MatrixXd gram = gradients.transpose() * gradients;
  nlohmann::json gram_rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    gram_rows.push_back(std::vector<double>(gram.row(i).begin(), gram.row(i).end()));
  }
  const auto& beta = result.coefficients.beta;
  return {
      {"gram", gram_rows},
      {"anchor", std::vector<double>(anchor.begin(), anchor.end())},
      {"active", std::vector<std::size_t>(active.begin(), active.end())},
      {"beta", std::vector<double>(beta.begin(), beta.end())},
      {"slacks", result.slacks},
      {"objective", result.objective},
      {"infeasible", result.infeasible},
      {"degenerate", result.degenerate},
  };
}

}  // namespace pinv
