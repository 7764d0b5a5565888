/**
 * @file relax.hpp
 * @brief The relax / descend / discretize contract shared by all tasks.
 *
 * A Task evaluates discrete candidates against its ground-truth oracle,
 * relaxes them to continuous points, exposes analytic gradients of the
 * relaxed losses, and samples discrete candidates back out of a relaxed
 * point. inner_descent and discretize_select drive one outer iteration.
 */

#ifndef PINV_RELAX_HPP
#define PINV_RELAX_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinv/core.hpp"
#include "pinv/epo_qp.hpp"

namespace pinv {

using Rng = std::mt19937_64;

enum class RegionKind { kUnconstrained, kBox, kRowSimplex };

/// Where relaxed parameters live. Row-simplex regions store a rows×cols
/// row-stochastic matrix flattened row-major.
struct FeasibleRegion {
  RegionKind kind = RegionKind::kUnconstrained;
  double lower = 0.0;
  double upper = 0.0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  static FeasibleRegion box(double lo, double hi) {
    return {RegionKind::kBox, lo, hi, 0, 0};
  }
  static FeasibleRegion row_simplex(Eigen::Index rows, Eigen::Index cols) {
    return {RegionKind::kRowSimplex, 0.0, 0.0, rows, cols};
  }
};

struct RelaxedPoint {
  Eigen::VectorXd params;
  FeasibleRegion region;
};

/// Euclidean projection onto the point's feasible region.
[[nodiscard]] RelaxedPoint project_to_region(RelaxedPoint point);

enum class OracleAccounting {
  kPerObjective,  ///< one discrete evaluation costs m oracle calls
  kPerCandidate,  ///< one discrete evaluation costs 1 oracle call
};

/// Non-finite loss or gradient during descent.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, int round)
      : std::runtime_error(what), round_(round) {}
  [[nodiscard]] int round() const { return round_; }

 private:
  int round_;
};

class ExhaustedNeighborhoodError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Task {
 public:
  explicit Task(std::size_t objectives,
                OracleAccounting accounting = OracleAccounting::kPerObjective)
      : objectives_(objectives), accounting_(accounting) {}
  virtual ~Task() = default;

  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;

  [[nodiscard]] std::size_t objective_count() const { return objectives_; }
  [[nodiscard]] std::uint64_t oracle_calls() const { return oracle_calls_; }
  [[nodiscard]] std::uint64_t calls_per_evaluation() const {
    return accounting_ == OracleAccounting::kPerObjective ? objectives_ : 1;
  }

  /// Ground-truth evaluation; the only operation that advances the counter.
  ObjectiveVector eval_discrete(const Candidate& candidate) {
    auto losses = evaluate(candidate);
    oracle_calls_ += calls_per_evaluation();
    return losses;
  }

  [[nodiscard]] virtual RelaxedPoint relax(const Candidate& candidate) const = 0;
  /// Relaxed losses as raw values (may be non-finite when descent diverges).
  [[nodiscard]] virtual std::vector<double> relaxed_loss_values(
      const RelaxedPoint& point) const = 0;
  [[nodiscard]] ObjectiveVector relaxed_losses(const RelaxedPoint& point) const {
    return ObjectiveVector(relaxed_loss_values(point));
  }
  [[nodiscard]] virtual GradientMatrix gradients(const RelaxedPoint& point) const = 0;
  [[nodiscard]] virtual std::vector<Candidate> neighborhood_discretize(
      const RelaxedPoint& point, std::size_t count, Rng& rng) const = 0;
  [[nodiscard]] virtual RelaxedPoint clamp(RelaxedPoint point) const {
    return project_to_region(std::move(point));
  }

  [[nodiscard]] virtual Candidate random_candidate(Rng& rng) const = 0;
  /// Stable text id for CSV output (no commas).
  [[nodiscard]] virtual std::string describe(const Candidate& candidate) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;

 protected:
  [[nodiscard]] virtual ObjectiveVector evaluate(const Candidate& candidate) const = 0;

 private:
  std::size_t objectives_;
  OracleAccounting accounting_;
  std::uint64_t oracle_calls_ = 0;
};

enum class DirectionMode { kEpo, kLs };

/// Which objectives the QP keeps from increasing.
enum class ActiveSetRule {
  /// μ > ε: only the max-relative objectives (J*); μ ≤ ε: all objectives.
  kBalanceProtectsMax,
  /// μ ≤ ε: J*; μ > ε: all objectives (the literal case split of the QP).
  kBalanceProtectsAll,
};

struct DescentOptions {
  double epsilon = 1e-3;
  ActiveSetRule active_rule = ActiveSetRule::kBalanceProtectsMax;
  QpOptions qp;
  /// Attach qp_diagnostics output to every round.
  bool record_qp = false;
};

struct InnerRound {
  int round = 0;
  std::vector<double> losses;
  double mu = 0.0;
  double r_check = 0.0;
  std::string mode;  ///< "balance", "descent", "ls", or "converged"
  double direction_norm = 0.0;
  bool qp_infeasible = false;
  nlohmann::json qp;  ///< null unless DescentOptions::record_qp
};

struct InnerDescentResult {
  RelaxedPoint point;
  std::vector<InnerRound> trace;
  std::vector<double> exit_losses;
  double exit_mu = 0.0;
  /// Every round produced a direction with norm below 1e-9.
  bool converged = false;
};

/// Direction for one round, plus the mode label recorded in traces.
struct DescentStep {
  Eigen::VectorXd direction;
  std::string mode;
  bool qp_infeasible = false;
  nlohmann::json qp;
};

[[nodiscard]] DescentStep descent_direction(const ObjectiveVector& losses,
                                            const GradientMatrix& gradients,
                                            const WeightVector& weights,
                                            DirectionMode mode,
                                            const DescentOptions& options);

/// K rounds of x̃ ← clamp(x̃ − η d).
[[nodiscard]] InnerDescentResult inner_descent(const Task& task, RelaxedPoint start,
                                               const WeightVector& weights,
                                               double step_size, int rounds,
                                               DirectionMode mode,
                                               const DescentOptions& options = {});

struct Evaluation {
  Candidate candidate;
  ObjectiveVector objectives;
};

struct Selection {
  Candidate candidate;
  ObjectiveVector objectives;
  std::size_t index = 0;
  /// Distinct candidates in draw order with their discrete losses.
  std::vector<Evaluation> evaluated;
};

/// Index of the best evaluation: lowest ř, then lowest Σ λ_i l_i, then
/// earliest.
[[nodiscard]] std::size_t select_best(const std::vector<Evaluation>& evaluations,
                                      const WeightVector& weights);

/// Draws count candidates around point, evaluates each distinct one, and
/// returns the one with the lowest ř.
[[nodiscard]] Selection discretize_select(Task& task, const RelaxedPoint& point,
                                          const WeightVector& weights,
                                          std::size_t count, Rng& rng);

}  // namespace pinv

#endif  // PINV_RELAX_HPP
