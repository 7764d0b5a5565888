/**
 * @file tasks.hpp
 * @brief Built-in tasks: a synthetic two-objective problem on a grid,
 * fixed-length n-gram sequence design, and surrogate-guided bit-vector
 * inversion.
 */

#ifndef PINV_TASKS_HPP
#define PINV_TASKS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinv/net.hpp"
#include "pinv/relax.hpp"

namespace pinv {

class InvalidRelaxationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- synthetic -------------------------------------------------------------

/// l_1 = 1 − exp(−‖x − c⁺‖²), l_2 = 1 − exp(−‖x − c⁻‖²), c± = ±𝟙/√n.
[[nodiscard]] ObjectiveVector synthetic_losses(const Eigen::VectorXd& x);
[[nodiscard]] std::vector<double> synthetic_loss_values(const Eigen::VectorXd& x);
[[nodiscard]] GradientMatrix synthetic_gradients(const Eigen::VectorXd& x);

/// Image of the segment x = t·c⁺, t evenly spaced over [−1, 1] (t = 1 first).
[[nodiscard]] std::vector<ObjectiveVector> synthetic_true_front(std::size_t samples);

/// Candidates are integer grid indices; coordinate i is index_i · grid_step.
class SyntheticTask final : public Task {
 public:
  explicit SyntheticTask(int n = 20, double grid_step = 0.01, double init_radius = 0.5);

  [[nodiscard]] int dimension() const { return n_; }
  [[nodiscard]] double grid_step() const { return step_; }
  [[nodiscard]] Eigen::VectorXd point(const Candidate& candidate) const;

  [[nodiscard]] RelaxedPoint relax(const Candidate& candidate) const override;
  [[nodiscard]] std::vector<double> relaxed_loss_values(
      const RelaxedPoint& point) const override;
  [[nodiscard]] GradientMatrix gradients(const RelaxedPoint& point) const override;
  /// First candidate rounds to the grid; the rest add U[−step, step] noise first.
  [[nodiscard]] std::vector<Candidate> neighborhood_discretize(
      const RelaxedPoint& point, std::size_t count, Rng& rng) const override;
  /// Uniform over grid points in [−init_radius, init_radius]^n.
  [[nodiscard]] Candidate random_candidate(Rng& rng) const override;
  [[nodiscard]] std::string describe(const Candidate& candidate) const override;
  [[nodiscard]] std::string name() const override { return "synthetic"; }

 protected:
  [[nodiscard]] ObjectiveVector evaluate(const Candidate& candidate) const override;

 private:
  [[nodiscard]] Candidate round_to_grid(const Eigen::VectorXd& x) const;

  int n_;
  double step_;
  double init_radius_;
  int max_index_;
};

// ---- n-gram ----------------------------------------------------------------

enum class NGramMode {
  kUnigram,  ///< objectives count C, V, A (conflicting)
  kBigram,   ///< objectives count CV, VA, AC (correlated)
};

inline constexpr int kAlphabetSize = 3;
inline constexpr char kAlphabet[kAlphabetSize] = {'C', 'V', 'A'};

/// Expected-count losses of an L×3 matrix, no simplex check.
[[nodiscard]] std::vector<double> ngram_polynomial(const Eigen::MatrixXd& p, NGramMode mode);
/// As ngram_polynomial, but rejects rows off the simplex by more than 1e-9.
[[nodiscard]] ObjectiveVector ngram_losses(const Eigen::MatrixXd& p, NGramMode mode);
/// Literal counts of a sequence of character indices.
[[nodiscard]] ObjectiveVector ngram_losses(const Candidate& sequence, NGramMode mode);
/// (3L)×3 gradient of ngram_polynomial w.r.t. the row-major flattening of p.
[[nodiscard]] GradientMatrix ngram_gradients(const Eigen::MatrixXd& p, NGramMode mode);

[[nodiscard]] Eigen::MatrixXd one_hot(const Candidate& sequence);

class NGramTask final : public Task {
 public:
  explicit NGramTask(NGramMode mode, int length = 8);

  [[nodiscard]] NGramMode mode() const { return mode_; }
  [[nodiscard]] int length() const { return length_; }
  [[nodiscard]] Eigen::MatrixXd matrix(const RelaxedPoint& point) const;

  [[nodiscard]] RelaxedPoint relax(const Candidate& candidate) const override;
  [[nodiscard]] std::vector<double> relaxed_loss_values(
      const RelaxedPoint& point) const override;
  [[nodiscard]] GradientMatrix gradients(const RelaxedPoint& point) const override;
  /// First candidate is the per-row argmax; the rest sample each row.
  [[nodiscard]] std::vector<Candidate> neighborhood_discretize(
      const RelaxedPoint& point, std::size_t count, Rng& rng) const override;
  [[nodiscard]] Candidate random_candidate(Rng& rng) const override;
  [[nodiscard]] std::string describe(const Candidate& candidate) const override;
  [[nodiscard]] std::string name() const override;

 protected:
  [[nodiscard]] ObjectiveVector evaluate(const Candidate& candidate) const override;

 private:
  NGramMode mode_;
  int length_;
};

// ---- surrogate -------------------------------------------------------------

/// O_i(x) = σ(w_i·x + b_i) over bit vectors; loss l_i = 1 − O_i(x).
struct SurrogateOracle {
  Eigen::MatrixXd w;  ///< m × n_b
  Eigen::VectorXd b;  ///< m

  /// Seeded oracle family: ‖w_i‖ = 4, consecutive w_i 120° apart (for m = 2),
  /// b_i = −w_i·(½𝟙) so that each property is balanced over random bits.
  static SurrogateOracle seeded(int n_bits, int heads, std::uint64_t seed);

  [[nodiscard]] Eigen::VectorXd properties(const Eigen::VectorXd& x) const;
};

[[nodiscard]] ObjectiveVector surrogate_ground_truth(const SurrogateOracle& oracle,
                                                     const Candidate& bits);

struct SurrogateTraining {
  int samples = 1024;
  int hidden = 32;
  int epochs = 300;
  double rate = 0.5;
  std::uint64_t seed = 0;
};

struct TrainedSurrogate {
  std::shared_ptr<const DualPathNet> net;
  std::vector<double> loss_curve;
  /// Oracle calls spent labeling the training set (samples × m).
  std::uint64_t pretraining_calls = 0;
};

/// Labels `samples` uniform bit vectors with the oracle and trains a net.
[[nodiscard]] TrainedSurrogate train_surrogate(const SurrogateOracle& oracle,
                                               const SurrogateTraining& options);

/// Gradients from the frozen net; discrete evaluation from the oracle.
class SurrogateTask final : public Task {
 public:
  SurrogateTask(SurrogateOracle oracle, std::shared_ptr<const DualPathNet> net,
                Eigen::VectorXd targets = {});

  [[nodiscard]] const DualPathNet& net() const { return *net_; }
  [[nodiscard]] const SurrogateOracle& oracle() const { return oracle_; }

  [[nodiscard]] RelaxedPoint relax(const Candidate& candidate) const override;
  /// BCE of each head against its target (default 1).
  [[nodiscard]] std::vector<double> relaxed_loss_values(
      const RelaxedPoint& point) const override;
  [[nodiscard]] GradientMatrix gradients(const RelaxedPoint& point) const override;
  /// First candidate rounds each coordinate; the rest draw bit i ~ Bernoulli(x_i).
  [[nodiscard]] std::vector<Candidate> neighborhood_discretize(
      const RelaxedPoint& point, std::size_t count, Rng& rng) const override;
  [[nodiscard]] Candidate random_candidate(Rng& rng) const override;
  [[nodiscard]] std::string describe(const Candidate& candidate) const override;
  [[nodiscard]] std::string name() const override { return "surrogate"; }

 protected:
  [[nodiscard]] ObjectiveVector evaluate(const Candidate& candidate) const override;

 private:
  SurrogateOracle oracle_;
  std::shared_ptr<const DualPathNet> net_;
  Eigen::VectorXd targets_;
};

// ---- configuration ---------------------------------------------------------

struct TaskConfig {
  std::string id = "synthetic";  ///< synthetic | ngram-uni | ngram-bi | surrogate
  int n = 20;
  double grid_step = 0.01;
  double init_radius = 0.5;
  int l_max = 8;
  int n_b = 16;
  int heads = 2;
  std::uint64_t seed = 0;  ///< surrogate oracle and training seed
  SurrogateTraining training;
};

[[nodiscard]] std::size_t objective_count(const TaskConfig& config);

/// Inner step size used when none is configured: 0.05 for synthetic and
/// n-gram tasks, 0.2 for the surrogate.
[[nodiscard]] double default_step_size(const std::string& task_id);

/// Builds fresh task instances for one configuration. The surrogate net is
/// trained on first use and then shared by every instance.
class TaskFactory {
 public:
  explicit TaskFactory(TaskConfig config);

  [[nodiscard]] const TaskConfig& config() const { return config_; }
  [[nodiscard]] std::size_t objectives() const { return objective_count(config_); }
  [[nodiscard]] std::unique_ptr<Task> make();
  /// Pretraining oracle calls (0 for tasks without a surrogate).
  [[nodiscard]] std::uint64_t pretraining_calls();
  [[nodiscard]] const TrainedSurrogate* surrogate();

 private:
  void ensure_surrogate();

  TaskConfig config_;
  std::mutex mutex_;
  std::optional<SurrogateOracle> oracle_;
  std::optional<TrainedSurrogate> surrogate_;
};

}  // namespace pinv

#endif  // PINV_TASKS_HPP
