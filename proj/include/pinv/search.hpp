/**
 * @file search.hpp
 * @brief Outer relax / descend / discretize loop, the linear-scalarization
 * baseline, weight-grid front scans, and convergence diagnostics.
 */

#ifndef PINV_SEARCH_HPP
#define PINV_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinv/core.hpp"
#include "pinv/relax.hpp"
#include "pinv/tasks.hpp"

namespace pinv {

struct RunConfig {
  TaskConfig task;
  DirectionMode mode = DirectionMode::kEpo;
  WeightVector lambda;
  int T = 50;
  int K = 20;
  double eta = 0.05;
  std::size_t C = 10;
  /// Oracle-call cap for the run; 0 means unlimited.
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  /// Path-length bound N used by the approximation bound; 0 means T.
  int neighborhood_bound = 0;
  DescentOptions descent;
  /// Keep per-round inner traces in the result (memory heavy for long runs).
  bool record_inner = false;

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

struct TrajectoryRecord {
  int round = 0;
  Candidate candidate;
  std::string candidate_id;
  ObjectiveVector objectives;
  double mu = 0.0;
  double r_check = 0.0;
  std::uint64_t oracle_calls = 0;
};

struct BoundCheck {
  std::optional<double> alpha_hat;  ///< empty when no consecutive decreasing steps
  double alpha_used = 0.0;          ///< alpha_hat, or 0 when it is not applicable
  double gamma = 0.0;
  int steps = 0;                    ///< T, the number of outer steps taken
  int neighborhood_bound = 0;       ///< N
  double r_star = 0.0;              ///< best observed ř (optimum proxy)
  double r_initial = 0.0;
  std::vector<double> bound;        ///< (γ ř* + (1−γ) ř⁰) / λ_j
  bool satisfied = false;           ///< final L ⪯ bound (+1e-9)
};

struct TheoryReport {
  std::vector<int> admissible_violations;  ///< steps t where L^{t+1} left the box of L^t
  std::vector<double> r_check_sequence;
  double monotone_fraction = 1.0;
  BoundCheck bound_check;

  [[nodiscard]] std::size_t steps() const {
    return r_check_sequence.empty() ? 0 : r_check_sequence.size() - 1;
  }
  [[nodiscard]] double violation_rate() const {
    return steps() == 0 ? 0.0 : double(admissible_violations.size()) / double(steps());
  }
};

struct RunResult {
  std::vector<TrajectoryRecord> trajectory;
  Candidate final_candidate;
  ObjectiveVector final_objectives;
  ParetoArchive archive;
  TheoryReport theory;
  /// Per outer iteration, when RunConfig::record_inner is set.
  std::vector<std::vector<InnerRound>> inner_traces;
  bool converged = false;
  bool budget_exhausted = false;
  bool failed = false;
  std::string failure;
  std::uint64_t oracle_calls = 0;
};

/// Runs with config.mode. x⁰ is evaluated first (counted against the budget).
/// A batch of C candidates is only started when it cannot push the total
/// over the budget.
[[nodiscard]] RunResult run_search(Task& task, const RunConfig& config, const Candidate& x0);
[[nodiscard]] RunResult run_inversion(Task& task, RunConfig config, const Candidate& x0);
[[nodiscard]] RunResult run_ls(Task& task, RunConfig config, const Candidate& x0);

/// Requires at least two trajectory records.
[[nodiscard]] TheoryReport theory_diagnostics(const std::vector<TrajectoryRecord>& trajectory,
                                              const WeightVector& weights,
                                              int neighborhood_bound);

/// γ = (1 − α^T) / ((1 − α) N), with the α → 1 limit T / N.
[[nodiscard]] double approximation_gamma(double alpha, int steps, int neighborhood_bound);

enum class ScanMerge {
  kFinal,       ///< each ray contributes its final candidate
  kTrajectory,  ///< each ray contributes its whole trajectory archive
};

struct ScanConfig {
  RunConfig run;  ///< lambda is replaced per ray; budget is the scan total
  std::vector<WeightVector> weights;
  unsigned threads = 1;
  ScanMerge merge = ScanMerge::kFinal;
  std::size_t nu_k = 1;
  double coverage_radius = 0.05;
  std::size_t truth_samples = 1000;
};

struct RayOutcome {
  WeightVector lambda;
  RunResult result;
  double nu = 0.0;  ///< μ of the final candidate under this ray's λ
};

struct ScanResult {
  ParetoArchive archive;
  std::vector<RayOutcome> rays;
  double hv = 0.0;
  std::optional<double> coverage;  ///< only for tasks with a known front
  double nu_topk = 0.0;            ///< mean over rays of the best k μ in the ray archive
  std::uint64_t oracle_calls_total = 0;
  std::uint64_t pretraining_calls = 0;
  std::size_t failed_rays = 0;
};

/// x⁰ for every ray comes from one pool drawn with the base seed; ray i
/// samples with seed + i. Merge order is ray order, so results do not depend
/// on the thread count.
[[nodiscard]] ScanResult front_scan(TaskFactory& factory, const ScanConfig& config);

/// μ with the all-zero case mapped to 0.
[[nodiscard]] double safe_nonuniformity(const ObjectiveVector& losses,
                                        const WeightVector& weights);

[[nodiscard]] nlohmann::json theory_to_json(const TheoryReport& report);

}  // namespace pinv

#endif  // PINV_SEARCH_HPP
