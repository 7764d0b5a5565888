#include <doctest.h>

#include <cmath>
#include <memory>

#include "pinv/core.hpp"
#include "pinv/oracles.hpp"
#include "pinv/tasks.hpp"

using namespace pinv;

namespace {

// Frozen values from an independent evaluation of the closed forms.
constexpr double kOneMinusExpMinus4 = 0.9816843611112658;
constexpr double kOneMinusExpMinus1 = 0.6321205588285577;

Candidate sequence(const std::string& text) {
  Candidate c;
  for (char ch : text) c.push_back(ch == 'C' ? 0 : (ch == 'V' ? 1 : 2));
  return c;
}

// Synthetic tasks, both n-gram modes, and a surrogate with an untrained net.
std::vector<std::unique_ptr<Task>> all_tasks() {
  std::vector<std::unique_ptr<Task>> tasks;
  tasks.push_back(std::make_unique<SyntheticTask>());
  tasks.push_back(std::make_unique<NGramTask>(NGramMode::kUnigram));
  tasks.push_back(std::make_unique<NGramTask>(NGramMode::kBigram));
  tasks.push_back(std::make_unique<SurrogateTask>(
      SurrogateOracle::seeded(16, 2, 5),
      std::make_shared<const DualPathNet>(DualPathNet::random(16, 8, 2, 6))));
  return tasks;
}

}  // namespace

TEST_CASE("synthetic losses at the centers and the origin") {
  const double c = 1.0 / std::sqrt(20.0);
  const Eigen::VectorXd plus = Eigen::VectorXd::Constant(20, c);
  CHECK(std::abs(plus.squaredNorm() - 1.0) <= 1e-12);
  auto l = synthetic_losses(plus);
  CHECK(std::abs(l[0]) <= 1e-15);
  CHECK(std::abs(l[1] - kOneMinusExpMinus4) <= 1e-12);
  l = synthetic_losses(Eigen::VectorXd::Zero(20));
  CHECK(std::abs(l[0] - kOneMinusExpMinus1) <= 1e-12);
  CHECK(std::abs(l[1] - kOneMinusExpMinus1) <= 1e-12);
  CHECK(synthetic_gradients(plus).col(0).norm() <= 1e-15);
}

TEST_CASE("synthetic true front") {
  const auto front = synthetic_true_front(101);
  REQUIRE(front.size() == 101);
  CHECK(std::abs(front.front()[0]) <= 1e-15);
  CHECK(std::abs(front.front()[1] - kOneMinusExpMinus4) <= 1e-12);
  CHECK(std::abs(front.back()[0] - kOneMinusExpMinus4) <= 1e-12);
  CHECK(std::abs(front[50][0] - kOneMinusExpMinus1) <= 1e-12);
  CHECK(pareto_filter(front).size() == front.size());

  SyntheticTask task;
  Rng rng(8);
  int dominating = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto l = synthetic_losses(task.point(task.random_candidate(rng)));
    for (const auto& f : front) {
      if (l[0] < f[0] - 1e-9 && l[1] < f[1] - 1e-9) ++dominating;
    }
  }
  CHECK(dominating == 0);
}

TEST_CASE("synthetic gradients match finite differences") {
  Rng rng(12);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(20);
    for (auto& v : x) v = coord(rng);
    const auto fd = central_difference(
        [](const Eigen::VectorXd& p) {
          const auto l = synthetic_loss_values(p);
          return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(l.data(), 2));
        },
        x, 1e-6);
    CHECK(relative_error(synthetic_gradients(x), fd) <= 1e-6);
  }
}

TEST_CASE("synthetic discretization") {
  SyntheticTask task;
  RelaxedPoint p = task.relax(Candidate(20, 0));
  p.params.setConstant(0.224);
  Rng rng(1);
  const auto first = task.neighborhood_discretize(p, 1, rng);
  REQUIRE(first.size() == 1);
  for (int v : first[0]) CHECK(v == 22);
  CHECK(task.point(first[0])(0) == doctest::Approx(0.22).epsilon(1e-12));
  Rng untouched(1);
  CHECK(rng() == untouched());

  Rng a(42), b(42);
  CHECK(task.neighborhood_discretize(p, 3, a) == task.neighborhood_discretize(p, 3, b));

  p.params.setConstant(5.0);
  Rng c(3);
  for (const auto& cand : task.neighborhood_discretize(p, 5, c)) {
    CHECK(task.point(cand).maxCoeff() <= 2.0 + 1e-12);
  }
}

TEST_CASE("n-gram discrete losses") {
  auto l = ngram_losses(sequence("CCCCCCCC"), NGramMode::kUnigram);
  CHECK(l == ObjectiveVector{0.0, 1.0, 1.0});
  l = ngram_losses(sequence("CVACVACV"), NGramMode::kBigram);
  CHECK(std::abs(l[0] - 0.5714285714285714) <= 1e-15);
  CHECK(std::abs(l[1] - 0.7142857142857143) <= 1e-15);
  CHECK(std::abs(l[2] - 0.7142857142857143) <= 1e-15);
}

TEST_CASE("n-gram relaxed losses") {
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(8, 3, 1.0 / 3.0);
  const auto l = ngram_losses(uniform, NGramMode::kUnigram);
  for (std::size_t a = 0; a < 3; ++a) CHECK(std::abs(l[a] - 2.0 / 3.0) <= 1e-12);

  Eigen::MatrixXd bad = uniform;
  bad(2, 0) += 1e-6;
  CHECK_THROWS_AS((void)ngram_losses(bad, NGramMode::kUnigram), InvalidRelaxationError);

  Rng rng(6);
  NGramTask task(NGramMode::kUnigram);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::MatrixXd p(8, 3);
    for (auto& v : p.reshaped()) v = unit(rng);
    for (int r = 0; r < 8; ++r) p.row(r) /= p.row(r).sum();
    const auto lp = ngram_losses(p, NGramMode::kUnigram);
    CHECK(std::abs((1.0 - lp[0]) + (1.0 - lp[1]) + (1.0 - lp[2]) - 1.0) <= 1e-12);
  }
}

TEST_CASE("n-gram discretization") {
  NGramTask task(NGramMode::kBigram);
  const auto p = task.relax(sequence("VVVVVVVV"));
  Rng rng(4);
  const auto first = task.neighborhood_discretize(p, 1, rng);
  CHECK(task.describe(first[0]) == "VVVVVVVV");
  Rng a(11), b(11);
  const auto q = task.relax(sequence("CVACVACV"));
  RelaxedPoint soft = q;
  soft.params.setConstant(1.0 / 3.0);
  CHECK(task.neighborhood_discretize(soft, 6, a) == task.neighborhood_discretize(soft, 6, b));
}

TEST_CASE("n-gram gradients match finite differences") {
  Rng rng(21);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  for (auto mode : {NGramMode::kUnigram, NGramMode::kBigram}) {
    for (int i = 0; i < 20; ++i) {
      Eigen::MatrixXd p(8, 3);
      for (auto& v : p.reshaped()) v = unit(rng);
      Eigen::VectorXd flat(24);
      for (int t = 0; t < 8; ++t) {
        for (int a = 0; a < 3; ++a) flat(3 * t + a) = p(t, a);
      }
      const auto fd = central_difference(
          [&](const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(8, 3);
            for (int t = 0; t < 8; ++t) {
              for (int a = 0; a < 3; ++a) m(t, a) = x(3 * t + a);
            }
            const auto v = ngram_polynomial(m, mode);
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), 3));
          },
          flat, 1e-6);
      CHECK(relative_error(ngram_gradients(p, mode), fd) <= 1e-5);
    }
  }
}

TEST_CASE("surrogate ground truth") {
  SurrogateOracle constant;
  constant.w = Eigen::MatrixXd::Zero(1, 4);
  constant.b = Eigen::VectorXd::Zero(1);
  CHECK(surrogate_ground_truth(constant, {1, 0, 1, 1})[0] == 0.5);

  const auto seeded = SurrogateOracle::seeded(16, 2, 7);
  const auto zero = surrogate_ground_truth(seeded, Candidate(16, 0));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(zero[i] - (1.0 - 1.0 / (1.0 + std::exp(-seeded.b(Eigen::Index(i)))))) <= 1e-15);
  }

  // Hand-set head: sigmoid(1 + 2 - 1 + 0.5) = sigmoid(2.5) = 0.9241418199787566.
  SurrogateOracle hand;
  hand.w.resize(1, 3);
  hand.w << 1.0, 2.0, -1.0;
  hand.b = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(std::abs(surrogate_ground_truth(hand, {1, 1, 1})[0] - (1.0 - 0.9241418199787566)) <= 1e-15);

  CHECK(std::abs(seeded.w.row(0).norm() - 4.0) <= 1e-12);
  const double cosine = seeded.w.row(0).dot(seeded.w.row(1)) / 16.0;
  CHECK(std::abs(cosine + 0.5) <= 1e-12);
}

TEST_CASE("surrogate discrete evaluation ignores the net") {
  const auto oracle = SurrogateOracle::seeded(16, 2, 9);
  SurrogateTask a(oracle, std::make_shared<const DualPathNet>(DualPathNet::random(16, 8, 2, 1)));
  SurrogateTask b(oracle, std::make_shared<const DualPathNet>(DualPathNet::random(16, 8, 2, 2)));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto c = a.random_candidate(rng);
    CHECK(a.eval_discrete(c) == b.eval_discrete(c));
    CHECK(a.eval_discrete(c) == surrogate_ground_truth(oracle, c));
  }
  const auto p = a.relax(a.random_candidate(rng));
  CHECK((a.gradients(p) - b.gradients(p)).norm() > 0.0);
}

TEST_CASE("relaxation is exact at lattice points for n-gram and synthetic tasks") {
  for (auto& task : all_tasks()) {
    if (task->name() == "surrogate") continue;  // relaxed path is the net, not the oracle
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
      const auto c = task->random_candidate(rng);
      const auto relaxed = task->relaxed_losses(task->relax(c));
      const auto discrete = task->eval_discrete(c);
      for (std::size_t j = 0; j < discrete.size(); ++j) {
        CHECK(std::abs(relaxed[j] - discrete[j]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("task gradients match finite differences at interior points") {
  for (auto& task : all_tasks()) {
    Rng rng(41);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    for (int i = 0; i < 20; ++i) {
      RelaxedPoint p = task->relax(task->random_candidate(rng));
      if (p.region.kind == RegionKind::kUnconstrained) {
        for (auto& v : p.params) v += jitter(rng);
      } else {
        for (auto& v : p.params) v = 0.3 + 0.4 * (jitter(rng) + 0.2) / 0.4;
      }
      const auto fd = central_difference(
          [&](const Eigen::VectorXd& x) {
            RelaxedPoint q{x, p.region};
            if (task->name().rfind("ngram", 0) == 0) {
              Eigen::MatrixXd m(8, 3);
              for (int t = 0; t < 8; ++t) {
                for (int a = 0; a < 3; ++a) m(t, a) = x(3 * t + a);
              }
              const auto v = ngram_polynomial(m, dynamic_cast<NGramTask&>(*task).mode());
              return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), 3));
            }
            const auto v = task->relaxed_loss_values(q);
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size())));
          },
          p.params, 1e-5);
      INFO(task->name());
      CHECK(relative_error(task->gradients(p), fd) <= 1e-5);
    }
  }
}

TEST_CASE("task factory") {
  TaskConfig cfg;
  cfg.id = "ngram-bi";
  CHECK(objective_count(cfg) == 3);
  cfg.id = "nope";
  CHECK_THROWS((void)objective_count(cfg));
  CHECK(default_step_size("surrogate") == 0.2);
  CHECK(default_step_size("synthetic") == 0.05);
}
