#include "pinv/relax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pinv/simplex.hpp"

namespace pinv {

namespace {

double weighted_sum(std::span<const double> losses, const WeightVector& weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) sum += losses[i] * weights[i];
  return sum;
}

std::vector<std::size_t> all_indices(std::size_t m) {
  std::vector<std::size_t> out(m);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

RelaxedPoint project_to_region(RelaxedPoint point) {
  auto& p = point.params;
  switch (point.region.kind) {
    case RegionKind::kUnconstrained:
      break;
    case RegionKind::kBox:
      p = p.cwiseMax(point.region.lower).cwiseMin(point.region.upper);
      break;
    case RegionKind::kRowSimplex: {
      const auto rows = point.region.rows;
      const auto cols = point.region.cols;
      for (Eigen::Index r = 0; r < rows; ++r) {
        p.segment(r * cols, cols) = project_to_simplex(p.segment(r * cols, cols));
      }
      break;
    }
  }
  return point;
}

DescentStep descent_direction(const ObjectiveVector& losses,
                              const GradientMatrix& gradients,
                              const WeightVector& weights, DirectionMode mode,
                              const DescentOptions& options) {
  DescentStep step;
  if (mode == DirectionMode::kLs) {
    step.direction = ls_direction(gradients, weights);
    step.mode = "ls";
    return step;
  }
  if (!(weighted_sum(losses.values(), weights) > 0.0)) {
    // Every weighted loss is zero: nothing left to improve.
    step.direction = Eigen::VectorXd::Zero(gradients.rows());
    step.mode = "converged";
    return step;
  }
  const auto anchor = anchor_direction(losses, weights, options.epsilon);
  const bool balancing = anchor.mode == AnchorMode::kBalance;
  std::vector<std::size_t> active;
  switch (options.active_rule) {
    case ActiveSetRule::kBalanceProtectsMax:
      active = balancing ? argmax_relative(losses, weights) : all_indices(losses.size());
      break;
    case ActiveSetRule::kBalanceProtectsAll:
      active = active_index_set(losses, weights, options.epsilon);
      break;
  }
  const auto qp = solve_qp(gradients, anchor.a, active, options.qp);
  step.direction = non_dominating_direction(gradients, qp.coefficients);
  step.mode = qp.degenerate ? "converged" : (balancing ? "balance" : "descent");
  step.qp_infeasible = qp.infeasible;
  if (options.record_qp) step.qp = qp_diagnostics(gradients, anchor.a, active, qp);
  return step;
}

InnerDescentResult inner_descent(const Task& task, RelaxedPoint start,
                                 const WeightVector& weights, double step_size,
                                 int rounds, DirectionMode mode,
                                 const DescentOptions& options) {
  if (!(step_size >= 0.0)) throw std::invalid_argument("inner_descent: step size < 0");
  if (rounds < 1) throw std::invalid_argument("inner_descent: need at least one round");

  auto checked_losses = [&](const RelaxedPoint& point, int round) {
    auto values = task.relaxed_loss_values(point);
    for (double v : values) {
      if (!std::isfinite(v)) throw NumericalFailure("non-finite relaxed loss", round);
    }
    return ObjectiveVector(std::move(values));
  };

  InnerDescentResult result;
  result.point = std::move(start);
  result.converged = true;
  for (int k = 0; k < rounds; ++k) {
    const auto losses = checked_losses(result.point, k);
    const auto gradients = task.gradients(result.point);
    if (!gradients.allFinite()) throw NumericalFailure("non-finite gradient", k);

    const auto step = descent_direction(losses, gradients, weights, mode, options);
    InnerRound record;
    record.round = k;
    record.losses = losses.vec();
    record.r_check = relative_max(losses, weights);
    record.mu = weighted_sum(losses.values(), weights) > 0.0
                    ? nonuniformity(losses, weights)
                    : 0.0;
    record.mode = step.mode;
    record.direction_norm = step.direction.norm();
    record.qp_infeasible = step.qp_infeasible;
    record.qp = step.qp;
    result.trace.push_back(std::move(record));

    if (!step.direction.allFinite()) throw NumericalFailure("non-finite direction", k);
    if (step.direction.norm() >= 1e-9) result.converged = false;
    result.point.params -= step_size * step.direction;
    result.point = task.clamp(std::move(result.point));
  }
  const auto exit_losses = checked_losses(result.point, rounds);
  result.exit_losses = exit_losses.vec();
  result.exit_mu = weighted_sum(exit_losses.values(), weights) > 0.0
                       ? nonuniformity(exit_losses, weights)
                       : 0.0;
  return result;
}

std::size_t select_best(const std::vector<Evaluation>& evaluations,
                        const WeightVector& weights) {
  if (evaluations.empty()) throw ExhaustedNeighborhoodError("no candidates to select");
  std::size_t best = 0;
  double best_r = relative_max(evaluations[0].objectives, weights);
  double best_sum = weighted_sum(evaluations[0].objectives.values(), weights);
  for (std::size_t i = 1; i < evaluations.size(); ++i) {
    const double r = relative_max(evaluations[i].objectives, weights);
    const double s = weighted_sum(evaluations[i].objectives.values(), weights);
    if (r < best_r || (r == best_r && s < best_sum)) {
      best = i;
      best_r = r;
      best_sum = s;
    }
  }
  return best;
}

Selection discretize_select(Task& task, const RelaxedPoint& point,
                            const WeightVector& weights, std::size_t count,
                            Rng& rng) {
  if (count < 1) throw std::invalid_argument("discretize_select: count must be >= 1");
  auto drawn = task.neighborhood_discretize(point, count, rng);
  if (drawn.empty()) throw ExhaustedNeighborhoodError("neighborhood produced no candidates");

  Selection selection;
  for (auto& candidate : drawn) {
    const bool seen = std::any_of(
        selection.evaluated.begin(), selection.evaluated.end(),
        [&](const Evaluation& e) { return e.candidate == candidate; });
    if (seen) continue;
    auto objectives = task.eval_discrete(candidate);
    selection.evaluated.push_back({std::move(candidate), std::move(objectives)});
  }
  selection.index = select_best(selection.evaluated, weights);
  selection.candidate = selection.evaluated[selection.index].candidate;
  selection.objectives = selection.evaluated[selection.index].objectives;
  return selection;
}

}  // namespace pinv
