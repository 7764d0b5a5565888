#include "pinv/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pinv {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string join(const Candidate& c, char sep) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(c[i]);
  }
  return out;
}

}  // namespace

// ---- synthetic -------------------------------------------------------------

std::vector<double> synthetic_loss_values(const Eigen::VectorXd& x) {
  const double c = 1.0 / std::sqrt(double(x.size()));
  const double d_plus = (x.array() - c).square().sum();
  const double d_minus = (x.array() + c).square().sum();
  return {-std::expm1(-d_plus), -std::expm1(-d_minus)};
}

ObjectiveVector synthetic_losses(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw DimensionError("synthetic_losses: empty point");
  if (!x.allFinite()) throw std::invalid_argument("synthetic_losses: non-finite point");
  return ObjectiveVector(synthetic_loss_values(x));
}

GradientMatrix synthetic_gradients(const Eigen::VectorXd& x) {
  const double c = 1.0 / std::sqrt(double(x.size()));
  const Eigen::ArrayXd plus = x.array() - c;
  const Eigen::ArrayXd minus = x.array() + c;
  GradientMatrix g(x.size(), 2);
  g.col(0) = (2.0 * std::exp(-plus.square().sum()) * plus).matrix();
  g.col(1) = (2.0 * std::exp(-minus.square().sum()) * minus).matrix();
  return g;
}

std::vector<ObjectiveVector> synthetic_true_front(std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("synthetic_true_front: need >= 2 samples");
  std::vector<ObjectiveVector> out;
  out.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = 1.0 - 2.0 * double(k) / double(samples - 1);
    out.push_back({-std::expm1(-(t - 1.0) * (t - 1.0)), -std::expm1(-(t + 1.0) * (t + 1.0))});
  }
  return out;
}

SyntheticTask::SyntheticTask(int n, double grid_step, double init_radius)
    : Task(2), n_(n), step_(grid_step), init_radius_(init_radius) {
  if (n < 1) throw std::invalid_argument("synthetic: n must be >= 1");
  if (!(grid_step > 0.0) || grid_step > 2.0) {
    throw std::invalid_argument("synthetic: grid_step must be in (0, 2]");
  }
  if (!(init_radius >= 0.0) || init_radius > 2.0) {
    throw std::invalid_argument("synthetic: init_radius must be in [0, 2]");
  }
  max_index_ = int(std::floor(2.0 / step_ + 1e-9));
}

Eigen::VectorXd SyntheticTask::point(const Candidate& candidate) const {
  if (candidate.size() != std::size_t(n_)) throw DimensionError("synthetic: wrong length");
  Eigen::VectorXd x(n_);
  for (int i = 0; i < n_; ++i) x(i) = candidate[std::size_t(i)] * step_;
  return x;
}

ObjectiveVector SyntheticTask::evaluate(const Candidate& candidate) const {
  return synthetic_losses(point(candidate));
}

RelaxedPoint SyntheticTask::relax(const Candidate& candidate) const {
  return {point(candidate), FeasibleRegion::box(-max_index_ * step_, max_index_ * step_)};
}

std::vector<double> SyntheticTask::relaxed_loss_values(const RelaxedPoint& point) const {
  return synthetic_loss_values(point.params);
}

GradientMatrix SyntheticTask::gradients(const RelaxedPoint& point) const {
  return synthetic_gradients(point.params);
}

Candidate SyntheticTask::round_to_grid(const Eigen::VectorXd& x) const {
  Candidate c(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    const double idx = std::nearbyint(x(i) / step_);
    c[std::size_t(i)] = int(std::clamp(idx, double(-max_index_), double(max_index_)));
  }
  return c;
}

std::vector<Candidate> SyntheticTask::neighborhood_discretize(const RelaxedPoint& point,
                                                              std::size_t count,
                                                              Rng& rng) const {
  std::vector<Candidate> out;
  out.reserve(count);
  out.push_back(round_to_grid(point.params));
  std::uniform_real_distribution<double> noise(-step_, step_);
  for (std::size_t k = 1; k < count; ++k) {
    Eigen::VectorXd x = point.params;
    for (int i = 0; i < n_; ++i) x(i) += noise(rng);
    out.push_back(round_to_grid(x));
  }
  return out;
}

Candidate SyntheticTask::random_candidate(Rng& rng) const {
  const int r = int(std::floor(init_radius_ / step_ + 1e-9));
  std::uniform_int_distribution<int> index(-r, r);
  Candidate c(static_cast<std::size_t>(n_));
  for (auto& v : c) v = index(rng);
  return c;
}

std::string SyntheticTask::describe(const Candidate& candidate) const {
  return join(candidate, ';');
}

// ---- n-gram ----------------------------------------------------------------

std::vector<double> ngram_polynomial(const Eigen::MatrixXd& p, NGramMode mode) {
  if (p.cols() != kAlphabetSize) throw DimensionError("ngram: matrix needs 3 columns");
  const Eigen::Index length = p.rows();
  std::vector<double> losses(kAlphabetSize);
  if (mode == NGramMode::kUnigram) {
    if (length < 1) throw DimensionError("ngram: empty sequence");
    for (int a = 0; a < kAlphabetSize; ++a) {
      double count = 0.0;
      for (Eigen::Index t = 0; t < length; ++t) count += p(t, a);
      losses[std::size_t(a)] = 1.0 - count / double(length);
    }
  } else {
    if (length < 2) throw DimensionError("ngram: bigram mode needs length >= 2");
    for (int a = 0; a < kAlphabetSize; ++a) {
      const int b = (a + 1) % kAlphabetSize;  // CV, VA, AC
      double count = 0.0;
      for (Eigen::Index t = 0; t + 1 < length; ++t) count += p(t, a) * p(t + 1, b);
      losses[std::size_t(a)] = 1.0 - count / double(length - 1);
    }
  }
  return losses;
}

ObjectiveVector ngram_losses(const Eigen::MatrixXd& p, NGramMode mode) {
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    const bool on_simplex = p.row(t).minCoeff() >= -1e-9 &&
                            std::abs(p.row(t).sum() - 1.0) <= 1e-9;
    if (!on_simplex) {
      throw InvalidRelaxationError("ngram: row " + std::to_string(t) +
                                   " is not on the probability simplex");
    }
  }
  auto values = ngram_polynomial(p, mode);
  // Rows within tolerance of the simplex can push a loss a hair below zero.
  for (auto& v : values) v = std::max(v, 0.0);
  return ObjectiveVector(std::move(values));
}

Eigen::MatrixXd one_hot(const Candidate& sequence) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(Eigen::Index(sequence.size()), kAlphabetSize);
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    const int a = sequence[t];
    if (a < 0 || a >= kAlphabetSize) {
      throw std::invalid_argument("ngram: character index out of range at position " +
                                  std::to_string(t));
    }
    p(Eigen::Index(t), a) = 1.0;
  }
  return p;
}

ObjectiveVector ngram_losses(const Candidate& sequence, NGramMode mode) {
  return ObjectiveVector(ngram_polynomial(one_hot(sequence), mode));
}

GradientMatrix ngram_gradients(const Eigen::MatrixXd& p, NGramMode mode) {
  const Eigen::Index length = p.rows();
  GradientMatrix g = GradientMatrix::Zero(length * kAlphabetSize, kAlphabetSize);
  auto at = [](Eigen::Index t, int a) { return t * kAlphabetSize + a; };
  if (mode == NGramMode::kUnigram) {
    for (int a = 0; a < kAlphabetSize; ++a) {
      for (Eigen::Index t = 0; t < length; ++t) g(at(t, a), a) = -1.0 / double(length);
    }
  } else {
    const double scale = -1.0 / double(length - 1);
    for (int a = 0; a < kAlphabetSize; ++a) {
      const int b = (a + 1) % kAlphabetSize;
      for (Eigen::Index t = 0; t + 1 < length; ++t) {
        g(at(t, a), a) += scale * p(t + 1, b);
        g(at(t + 1, b), a) += scale * p(t, a);
      }
    }
  }
  return g;
}

NGramTask::NGramTask(NGramMode mode, int length)
    : Task(kAlphabetSize), mode_(mode), length_(length) {
  if (length < 2) throw std::invalid_argument("ngram: l_max must be >= 2");
}

Eigen::MatrixXd NGramTask::matrix(const RelaxedPoint& point) const {
  Eigen::MatrixXd p(length_, kAlphabetSize);
  for (int t = 0; t < length_; ++t) {
    for (int a = 0; a < kAlphabetSize; ++a) p(t, a) = point.params(t * kAlphabetSize + a);
  }
  return p;
}

ObjectiveVector NGramTask::evaluate(const Candidate& candidate) const {
  if (candidate.size() != std::size_t(length_)) throw DimensionError("ngram: wrong length");
  return ngram_losses(candidate, mode_);
}

RelaxedPoint NGramTask::relax(const Candidate& candidate) const {
  if (candidate.size() != std::size_t(length_)) throw DimensionError("ngram: wrong length");
  const auto p = one_hot(candidate);
  Eigen::VectorXd flat(length_ * kAlphabetSize);
  for (int t = 0; t < length_; ++t) {
    for (int a = 0; a < kAlphabetSize; ++a) flat(t * kAlphabetSize + a) = p(t, a);
  }
  return {flat, FeasibleRegion::row_simplex(length_, kAlphabetSize)};
}

std::vector<double> NGramTask::relaxed_loss_values(const RelaxedPoint& point) const {
  return ngram_losses(matrix(point), mode_).vec();
}

GradientMatrix NGramTask::gradients(const RelaxedPoint& point) const {
  return ngram_gradients(matrix(point), mode_);
}

std::vector<Candidate> NGramTask::neighborhood_discretize(const RelaxedPoint& point,
                                                          std::size_t count,
                                                          Rng& rng) const {
  const auto p = matrix(point);
  std::vector<Candidate> out;
  out.reserve(count);
  Candidate argmax(static_cast<std::size_t>(length_));
  for (int t = 0; t < length_; ++t) {
    Eigen::Index best = 0;
    p.row(t).maxCoeff(&best);  // first maximum on ties
    argmax[std::size_t(t)] = int(best);
  }
  out.push_back(std::move(argmax));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 1; k < count; ++k) {
    Candidate c(static_cast<std::size_t>(length_));
    for (int t = 0; t < length_; ++t) {
      const double u = unit(rng) * p.row(t).sum();
      double acc = 0.0;
      int a = kAlphabetSize - 1;
      for (int j = 0; j < kAlphabetSize; ++j) {
        acc += p(t, j);
        if (u < acc) {
          a = j;
          break;
        }
      }
      c[std::size_t(t)] = a;
    }
    out.push_back(std::move(c));
  }
  return out;
}

Candidate NGramTask::random_candidate(Rng& rng) const {
  std::uniform_int_distribution<int> character(0, kAlphabetSize - 1);
  Candidate c(static_cast<std::size_t>(length_));
  for (auto& v : c) v = character(rng);
  return c;
}

std::string NGramTask::describe(const Candidate& candidate) const {
  std::string s;
  for (int a : candidate) s += kAlphabet[a];
  return s;
}

std::string NGramTask::name() const {
  return mode_ == NGramMode::kUnigram ? "ngram-uni" : "ngram-bi";
}

// ---- surrogate -------------------------------------------------------------

SurrogateOracle SurrogateOracle::seeded(int n_bits, int heads, std::uint64_t seed) {
  if (n_bits < 2) throw std::invalid_argument("surrogate: n_b must be >= 2");
  if (heads < 1) throw std::invalid_argument("surrogate: need at least one head");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&] {
    Eigen::VectorXd v(n_bits);
    for (auto& x : v) x = normal(rng);
    return Eigen::VectorXd(v.normalized());
  };
  constexpr double kNorm = 4.0;
  SurrogateOracle oracle;
  oracle.w.resize(heads, n_bits);
  const Eigen::VectorXd u1 = random_unit();
  oracle.w.row(0) = kNorm * u1.transpose();
  if (heads == 2) {
    Eigen::VectorXd u2 = random_unit();
    u2 = (u2 - u2.dot(u1) * u1).normalized();
    const double angle = 2.0 * std::numbers::pi / 3.0;
    oracle.w.row(1) = kNorm * (std::cos(angle) * u1 + std::sin(angle) * u2).transpose();
  } else {
    for (int i = 1; i < heads; ++i) oracle.w.row(i) = kNorm * random_unit().transpose();
  }
  oracle.b = -0.5 * oracle.w.rowwise().sum();
  return oracle;
}

Eigen::VectorXd SurrogateOracle::properties(const Eigen::VectorXd& x) const {
  return (w * x + b).unaryExpr(&sigmoid);
}

ObjectiveVector surrogate_ground_truth(const SurrogateOracle& oracle, const Candidate& bits) {
  if (bits.size() != std::size_t(oracle.w.cols())) {
    throw DimensionError("surrogate: bit vector has wrong length");
  }
  Eigen::VectorXd x(oracle.w.cols());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1) throw std::invalid_argument("surrogate: non-binary input");
    x(Eigen::Index(i)) = bits[i];
  }
  const Eigen::VectorXd o = oracle.properties(x);
  std::vector<double> losses(std::size_t(o.size()));
  for (Eigen::Index i = 0; i < o.size(); ++i) losses[std::size_t(i)] = 1.0 - o(i);
  return ObjectiveVector(std::move(losses));
}

TrainedSurrogate train_surrogate(const SurrogateOracle& oracle,
                                 const SurrogateTraining& options) {
  if (options.samples < 1) throw std::invalid_argument("surrogate: need training samples");
  const auto n_bits = oracle.w.cols();
  const auto heads = oracle.w.rows();
  Rng rng(options.seed);
  std::bernoulli_distribution coin(0.5);
  TrainingSet data;
  data.inputs.resize(options.samples, n_bits);
  data.targets.resize(options.samples, heads);
  for (int s = 0; s < options.samples; ++s) {
    for (Eigen::Index i = 0; i < n_bits; ++i) data.inputs(s, i) = coin(rng) ? 1.0 : 0.0;
    data.targets.row(s) = oracle.properties(data.inputs.row(s).transpose()).transpose();
  }
  auto net = DualPathNet::random(n_bits, options.hidden, heads, options.seed + 1);
  auto result = train(std::move(net), data, options.epochs, options.rate);
  TrainedSurrogate out;
  out.net = std::make_shared<const DualPathNet>(std::move(result.net));
  out.loss_curve = std::move(result.loss_curve);
  out.pretraining_calls = std::uint64_t(options.samples) * std::uint64_t(heads);
  return out;
}

SurrogateTask::SurrogateTask(SurrogateOracle oracle, std::shared_ptr<const DualPathNet> net,
                             Eigen::VectorXd targets)
    : Task(std::size_t(oracle.w.rows())),
      oracle_(std::move(oracle)),
      net_(std::move(net)),
      targets_(std::move(targets)) {
  if (!net_) throw std::invalid_argument("surrogate: null net");
  if (net_->input_size() != oracle_.w.cols() || net_->head_count() != oracle_.w.rows()) {
    throw DimensionError("surrogate: net shape does not match the oracle");
  }
  if (targets_.size() == 0) targets_ = Eigen::VectorXd::Ones(oracle_.w.rows());
  if (targets_.size() != oracle_.w.rows()) throw DimensionError("surrogate: target length");
}

ObjectiveVector SurrogateTask::evaluate(const Candidate& candidate) const {
  return surrogate_ground_truth(oracle_, candidate);
}

RelaxedPoint SurrogateTask::relax(const Candidate& candidate) const {
  if (candidate.size() != std::size_t(oracle_.w.cols())) {
    throw DimensionError("surrogate: bit vector has wrong length");
  }
  Eigen::VectorXd x(oracle_.w.cols());
  for (std::size_t i = 0; i < candidate.size(); ++i) x(Eigen::Index(i)) = candidate[i];
  return {x, FeasibleRegion::box(0.0, 1.0)};
}

std::vector<double> SurrogateTask::relaxed_loss_values(const RelaxedPoint& point) const {
  const Eigen::VectorXd l = net_->head_losses(point.params, targets_);
  return {l.begin(), l.end()};
}

GradientMatrix SurrogateTask::gradients(const RelaxedPoint& point) const {
  return net_->input_gradients(point.params, targets_);
}

std::vector<Candidate> SurrogateTask::neighborhood_discretize(const RelaxedPoint& point,
                                                              std::size_t count,
                                                              Rng& rng) const {
  const auto n = point.params.size();
  std::vector<Candidate> out;
  out.reserve(count);
  Candidate rounded(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    rounded[std::size_t(i)] = std::nearbyint(point.params(i)) >= 1.0 ? 1 : 0;
  }
  out.push_back(std::move(rounded));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 1; k < count; ++k) {
    Candidate c(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) c[std::size_t(i)] = unit(rng) < point.params(i) ? 1 : 0;
    out.push_back(std::move(c));
  }
  return out;
}

Candidate SurrogateTask::random_candidate(Rng& rng) const {
  std::bernoulli_distribution coin(0.5);
  Candidate c(std::size_t(oracle_.w.cols()));
  for (auto& v : c) v = coin(rng) ? 1 : 0;
  return c;
}

std::string SurrogateTask::describe(const Candidate& candidate) const {
  std::string s;
  for (int v : candidate) s += char('0' + v);
  return s;
}

// ---- configuration ---------------------------------------------------------

std::size_t objective_count(const TaskConfig& config) {
  if (config.id == "synthetic") return 2;
  if (config.id == "ngram-uni" || config.id == "ngram-bi") return kAlphabetSize;
  if (config.id == "surrogate") return std::size_t(config.heads);
  throw std::invalid_argument("unknown task '" + config.id +
                              "' (expected synthetic, ngram-uni, ngram-bi, surrogate)");
}

double default_step_size(const std::string& task_id) {
  return task_id == "surrogate" ? 0.2 : 0.05;
}

TaskFactory::TaskFactory(TaskConfig config) : config_(std::move(config)) {
  (void)objective_count(config_);
}

void TaskFactory::ensure_surrogate() {
  std::lock_guard lock(mutex_);
  if (surrogate_) return;
  oracle_ = SurrogateOracle::seeded(config_.n_b, config_.heads, config_.seed);
  auto training = config_.training;
  training.seed = config_.seed;
  surrogate_ = train_surrogate(*oracle_, training);
}

std::unique_ptr<Task> TaskFactory::make() {
  const auto& id = config_.id;
  if (id == "synthetic") {
    return std::make_unique<SyntheticTask>(config_.n, config_.grid_step, config_.init_radius);
  }
  if (id == "ngram-uni") return std::make_unique<NGramTask>(NGramMode::kUnigram, config_.l_max);
  if (id == "ngram-bi") return std::make_unique<NGramTask>(NGramMode::kBigram, config_.l_max);
  ensure_surrogate();
  return std::make_unique<SurrogateTask>(*oracle_, surrogate_->net);
}

std::uint64_t TaskFactory::pretraining_calls() {
  if (config_.id != "surrogate") return 0;
  ensure_surrogate();
  return surrogate_->pretraining_calls;
}

const TrainedSurrogate* TaskFactory::surrogate() {
  if (config_.id != "surrogate") return nullptr;
  ensure_surrogate();
  return &*surrogate_;
}

}  // namespace pinv
