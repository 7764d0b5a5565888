#include "pinv/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "pinv/epo_qp.hpp"
#include "pinv/metrics.hpp"

namespace pinv {

void RunConfig::validate() const {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (C < 1) throw std::invalid_argument("C must be >= 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be >= 0");
  if (!(descent.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (neighborhood_bound < 0) throw std::invalid_argument("neighborhood bound must be >= 0");
  const auto m = objective_count(task);
  if (lambda.size() != m) {
    throw DimensionError("lambda has " + std::to_string(lambda.size()) + " entries but task '" +
                         task.id + "' has " + std::to_string(m) + " objectives");
  }
}

double safe_nonuniformity(const ObjectiveVector& losses, const WeightVector& weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) sum += losses[i] * weights[i];
  return sum > 0.0 ? nonuniformity(losses, weights) : 0.0;
}

namespace {

TrajectoryRecord make_record(const Task& task, int round, Candidate candidate,
                             ObjectiveVector objectives, const WeightVector& weights,
                             std::uint64_t calls) {
  TrajectoryRecord r;
  r.round = round;
  r.candidate_id = task.describe(candidate);
  r.mu = safe_nonuniformity(objectives, weights);
  r.r_check = relative_max(objectives, weights);
  r.candidate = std::move(candidate);
  r.objectives = std::move(objectives);
  r.oracle_calls = calls;
  return r;
}

ArchiveEntry to_entry(const TrajectoryRecord& r, const WeightVector& weights) {
  return {r.candidate, r.candidate_id, r.objectives, weights, r.oracle_calls};
}

}  // namespace

RunResult run_search(Task& task, const RunConfig& config, const Candidate& x0) {
  if (config.T < 1 || config.K < 1 || config.C < 1 || !(config.eta >= 0.0)) {
    throw std::invalid_argument("run_search: T, K, C must be >= 1 and eta >= 0");
  }
  if (config.lambda.size() != task.objective_count()) {
    throw DimensionError("run_search: lambda length does not match the task");
  }
  const auto& lambda = config.lambda;
  const std::uint64_t start_calls = task.oracle_calls();
  auto spent = [&] { return task.oracle_calls() - start_calls; };

  RunResult result;
  Rng rng(config.seed);

  auto initial = task.eval_discrete(x0);
  result.trajectory.push_back(make_record(task, 0, x0, std::move(initial), lambda, spent()));
  result.archive.insert(to_entry(result.trajectory.back(), lambda));

  const std::uint64_t batch_cost = config.C * task.calls_per_evaluation();
  for (int t = 1; t <= config.T; ++t) {
    if (config.budget > 0 && spent() + batch_cost > config.budget) {
      result.budget_exhausted = true;
      break;
    }
    const auto& current = result.trajectory.back();
    InnerDescentResult inner;
    try {
      inner = inner_descent(task, task.relax(current.candidate), lambda, config.eta, config.K,
                            config.mode, config.descent);
    } catch (const NumericalFailure& e) {
      result.failed = true;
      result.failure = std::string(e.what()) + " at outer iteration " + std::to_string(t) +
                       ", inner round " + std::to_string(e.round());
      break;
    }
    const bool converged = inner.converged;
    if (config.record_inner) result.inner_traces.push_back(std::move(inner.trace));
    if (converged) {
      result.converged = true;
      break;
    }
    auto selection = discretize_select(task, inner.point, lambda, config.C, rng);
    result.trajectory.push_back(make_record(task, t, std::move(selection.candidate),
                                            std::move(selection.objectives), lambda, spent()));
    result.archive.insert(to_entry(result.trajectory.back(), lambda));
  }

  result.final_candidate = result.trajectory.back().candidate;
  result.final_objectives = result.trajectory.back().objectives;
  result.oracle_calls = spent();
  if (result.trajectory.size() >= 2) {
    const int n_bound = config.neighborhood_bound > 0 ? config.neighborhood_bound : config.T;
    result.theory = theory_diagnostics(result.trajectory, lambda, n_bound);
  } else {
    result.theory.r_check_sequence = {result.trajectory.front().r_check};
  }
  return result;
}

RunResult run_inversion(Task& task, RunConfig config, const Candidate& x0) {
  config.mode = DirectionMode::kEpo;
  return run_search(task, config, x0);
}

RunResult run_ls(Task& task, RunConfig config, const Candidate& x0) {
  config.mode = DirectionMode::kLs;
  return run_search(task, config, x0);
}

double approximation_gamma(double alpha, int steps, int neighborhood_bound) {
  if (steps < 1 || neighborhood_bound < 1) {
    throw std::invalid_argument("approximation_gamma: T and N must be >= 1");
  }
  if (steps == 1) return 1.0 / double(neighborhood_bound);
  if (alpha == 1.0) return double(steps) / double(neighborhood_bound);
  return (1.0 - std::pow(alpha, steps)) / ((1.0 - alpha) * double(neighborhood_bound));
}

TheoryReport theory_diagnostics(const std::vector<TrajectoryRecord>& trajectory,
                                const WeightVector& weights, int neighborhood_bound) {
  if (trajectory.size() < 2) {
    throw std::invalid_argument("theory_diagnostics: need at least two trajectory records");
  }
  constexpr double kTol = 1e-9;
  TheoryReport report;
  for (const auto& r : trajectory) report.r_check_sequence.push_back(r.r_check);
  const auto& r = report.r_check_sequence;
  const std::size_t steps = r.size() - 1;

  std::size_t monotone = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto& next = trajectory[t + 1].objectives;
    bool admissible = true;
    for (std::size_t j = 0; j < next.size(); ++j) {
      admissible = admissible && next[j] <= r[t] / weights[j] + kTol;
    }
    if (!admissible) report.admissible_violations.push_back(int(t));
    if (r[t + 1] <= r[t] + kTol) ++monotone;
  }
  report.monotone_fraction = double(monotone) / double(steps);

  std::vector<double> ratios;
  for (std::size_t t = 1; t < steps; ++t) {
    const double prev_gain = r[t - 1] - r[t];
    const double gain = r[t] - r[t + 1];
    if (prev_gain > 0.0 && gain > 0.0) ratios.push_back(gain / prev_gain);
  }
  auto& bc = report.bound_check;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    bc.alpha_hat = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  }
  bc.alpha_used = bc.alpha_hat.value_or(0.0);
  bc.steps = int(steps);
  bc.neighborhood_bound = neighborhood_bound;
  bc.gamma = approximation_gamma(bc.alpha_used, bc.steps, neighborhood_bound);
  bc.r_star = *std::min_element(r.begin(), r.end());
  bc.r_initial = r.front();
  const double level = bc.gamma * bc.r_star + (1.0 - bc.gamma) * bc.r_initial;
  const auto& final_l = trajectory.back().objectives;
  bc.satisfied = true;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    bc.bound.push_back(level / weights[j]);
    bc.satisfied = bc.satisfied && final_l[j] <= bc.bound.back() + kTol;
  }
  return report;
}

nlohmann::json theory_to_json(const TheoryReport& report) {
  const auto& bc = report.bound_check;
  nlohmann::json bound = {
      {"observational", true},
      {"alpha_hat", bc.alpha_hat ? nlohmann::json(*bc.alpha_hat) : nlohmann::json("not-applicable")},
      {"alpha_used", bc.alpha_used},
      {"gamma", bc.gamma},
      {"T", bc.steps},
      {"N", bc.neighborhood_bound},
      {"r_star", bc.r_star},
      {"r_initial", bc.r_initial},
      {"bound", bc.bound},
      {"satisfied", bc.satisfied},
  };
  // The one-step case has γ = 1 for any α, so the bound collapses to ř*·λ⁻¹.
  const double gamma_one_step = approximation_gamma(0.5, 1, 1);
  return {
      {"steps", report.steps()},
      {"admissible_violations", report.admissible_violations},
      {"admissible_violation_rate", report.violation_rate()},
      {"r_check_sequence", report.r_check_sequence},
      {"monotone_fraction", report.monotone_fraction},
      {"bound_check", bound},
      {"sanity_T1_N1", {{"gamma", gamma_one_step}, {"passed", gamma_one_step == 1.0}}},
  };
}

ScanResult front_scan(TaskFactory& factory, const ScanConfig& config) {
  if (config.weights.empty()) throw EmptyInputError("front_scan: no weights");
  const std::size_t rays = config.weights.size();
  const std::size_t m = factory.objectives();

  // Shared initial pool, drawn before any ray runs.
  std::vector<Candidate> starts;
  {
    auto probe = factory.make();
    Rng pool(config.run.seed);
    for (std::size_t i = 0; i < rays; ++i) starts.push_back(probe->random_candidate(pool));
  }

  ScanResult scan;
  scan.rays.resize(rays);
  auto run_ray = [&](std::size_t i) {
    RunConfig ray = config.run;
    ray.lambda = config.weights[i];
    ray.seed = config.run.seed + i;
    ray.budget = config.run.budget > 0 ? std::max<std::uint64_t>(config.run.budget / rays, 1) : 0;
    auto& out = scan.rays[i];
    out.lambda = ray.lambda;
    try {
      auto task = factory.make();
      out.result = run_search(*task, ray, starts[i]);
    } catch (const std::exception& e) {
      out.result.failed = true;
      out.result.failure = e.what();
    }
    if (!out.result.trajectory.empty()) {
      out.nu = safe_nonuniformity(out.result.final_objectives, out.lambda);
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, unsigned(rays)));
  if (threads == 1) {
    for (std::size_t i = 0; i < rays; ++i) run_ray(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < rays; i = next++) run_ray(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  double nu_sum = 0.0;
  std::size_t nu_count = 0;
  for (const auto& ray : scan.rays) {
    scan.oracle_calls_total += ray.result.oracle_calls;
    if (ray.result.failed) ++scan.failed_rays;
    if (ray.result.trajectory.empty()) continue;
    if (config.merge == ScanMerge::kFinal) {
      scan.archive.insert(to_entry(ray.result.trajectory.back(), ray.lambda));
    } else {
      scan.archive.merge(ray.result.archive);
    }
    nu_sum += nonuniformity_report(ray.result.archive, ray.lambda, config.nu_k);
    ++nu_count;
  }
  scan.nu_topk = nu_count ? nu_sum / double(nu_count) : 0.0;
  scan.pretraining_calls = factory.pretraining_calls();

  if (!scan.archive.empty()) {
    const auto points = scan.archive.objective_vectors();
    const std::vector<double> ref(m, 1.0);
    if (m >= 2 && m <= 4) scan.hv = hypervolume(points, ref);
    if (factory.config().id == "synthetic") {
      const auto truth = synthetic_true_front(config.truth_samples);
      scan.coverage = front_coverage(points, truth, config.coverage_radius);
    }
  } else if (factory.config().id == "synthetic") {
    scan.coverage = 0.0;
  }
  return scan;
}

}  // namespace pinv
