#include <doctest.h>

#include <cmath>
#include <random>

#include "pinv/epo_qp.hpp"
#include "pinv/oracles.hpp"

using namespace pinv;

namespace {

// Frozen values from an independent evaluation of the closed forms.
constexpr double kMuTwoTwo = 0.13081203594113697;   // 0.25 ln 0.5 + 0.75 ln 1.5
constexpr double kAnchor0 = -0.8239592165010823;
constexpr double kAnchor1 = 0.8239592165010822;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(rows, cols);
  for (auto& x : g.reshaped()) x = normal(rng);
  return g;
}

}  // namespace

TEST_CASE("normalized weighted losses") {
  auto h = normalized_weighted_losses({1, 1}, {1, 3});
  CHECK(h[0] == doctest::Approx(0.25));
  CHECK(h[1] == doctest::Approx(0.75));
  h = normalized_weighted_losses({3, 1}, {1, 3});
  CHECK(h[0] == doctest::Approx(0.5));
  h = normalized_weighted_losses({0.2, 0.4, 0.4}, {1, 1, 1});
  CHECK(h[1] == doctest::Approx(0.4));
  CHECK_THROWS_AS((void)normalized_weighted_losses({0, 0}, {1, 1}), DegenerateLossError);
}

TEST_CASE("nonuniformity") {
  CHECK(nonuniformity({1, 1}, {1, 1}) == 0.0);
  CHECK(std::abs(nonuniformity({2, 2}, {1, 3}) - kMuTwoTwo) <= 1e-12);
  CHECK(std::abs(nonuniformity({1, 0}, {1, 1}) - std::log(2.0)) <= 1e-12);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int i = 0; i < 100; ++i) {
    const ObjectiveVector l{unit(rng), unit(rng), unit(rng)};
    const WeightVector w{unit(rng), unit(rng), unit(rng)};
    const double mu = nonuniformity(l, w);
    CHECK(mu >= 0.0);
    const ObjectiveVector scaled{3.7 * l[0], 3.7 * l[1], 3.7 * l[2]};
    CHECK(std::abs(nonuniformity(scaled, w) - mu) <= 1e-12);
  }
}

TEST_CASE("active index set") {
  CHECK(active_index_set({0.2, 0.4}, {1, 3}, 1e-4) == std::vector<std::size_t>{0, 1});
  CHECK(active_index_set({1, 1}, {1, 1}, 1e-4) == std::vector<std::size_t>{0, 1});
  CHECK(active_index_set({0.9, 0.1, 0.1}, {1, 1, 1}, 10) == std::vector<std::size_t>{0});
}

TEST_CASE("anchor direction") {
  auto a = anchor_direction({1, 1}, {1, 1}, 0.01);
  CHECK(a.mode == AnchorMode::kDescent);
  CHECK(a.a(0) == 1.0);
  CHECK(a.a(1) == 1.0);
  a = anchor_direction({2, 2}, {1, 3}, 0.01);
  CHECK(a.mode == AnchorMode::kBalance);
  CHECK(std::abs(a.a(0) - kAnchor0) <= 1e-12);
  CHECK(std::abs(a.a(1) - kAnchor1) <= 1e-12);
  a = anchor_direction({0.7}, {2.0}, 0.0);
  CHECK(a.mode == AnchorMode::kDescent);
  CHECK(a.a(0) == doctest::Approx(1.4));
}

TEST_CASE("solve_qp small cases") {
  const Eigen::MatrixXd g1 = Eigen::MatrixXd::Random(4, 1);
  const std::vector<std::size_t> j0{0};
  auto r = solve_qp(g1, Eigen::VectorXd::Constant(1, 3.0), j0);
  CHECK(r.coefficients.beta(0) == 1.0);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd a(2);
  a << 0.3, 0.7;
  const std::vector<std::size_t> both{0, 1};
  r = solve_qp(id, a, both);
  CHECK(r.coefficients.beta(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.coefficients.beta(1) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK_FALSE(r.infeasible);
}

TEST_CASE("solve_qp matches the lattice oracle and satisfies its certificate") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const int m = 2 + k % 3;
    const Eigen::MatrixXd g = random_matrix(10, m, rng);
    const Eigen::MatrixXd gram = g.transpose() * g;
    const Eigen::VectorXd a = random_matrix(m, 1, rng);
    std::vector<std::size_t> active;
    for (int j = 0; j < m; ++j) {
      if (unit(rng) < 0.5) active.push_back(std::size_t(j));
    }
    const auto r = solve_qp(g, a, active);
    const auto& beta = r.coefficients.beta;
    CHECK(beta.minCoeff() >= 0.0);
    CHECK(std::abs(beta.sum() - 1.0) <= 1e-9);
    const double value = qp_objective(gram, a, beta);
    if (!r.infeasible) {
      for (double s : r.slacks) CHECK(s >= -1e-8);
      const auto oracle = qp_grid_oracle(gram, a, active);
      if (oracle) CHECK(std::abs(value - oracle->objective) <= 1e-4);
      // Stationarity: feasible moves toward any vertex do not help.
      for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd moved = beta + 1e-4 * (Eigen::VectorXd::Unit(m, i) - beta);
        const Eigen::VectorXd mb = gram * moved;
        bool feasible = true;
        for (auto j : active) feasible = feasible && mb(Eigen::Index(j)) >= 0.0;
        if (feasible) CHECK(qp_objective(gram, a, moved) >= value - 1e-8);
      }
      // Never worse than a feasible vertex.
      for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(m, i);
        const Eigen::VectorXd me = gram * e;
        bool feasible = true;
        for (auto j : active) feasible = feasible && me(Eigen::Index(j)) >= 0.0;
        if (feasible) CHECK(value <= qp_objective(gram, a, e) + 1e-12);
      }
    }
  }
}

TEST_CASE("directions") {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXd g = random_matrix(6, 2, rng);
  Eigen::VectorXd beta(2);
  beta << 1.0, 0.0;
  CHECK((non_dominating_direction(g, {beta}) - g.col(0)).norm() == 0.0);

  Eigen::MatrixXd anti(3, 2);
  anti.col(0) << 1, 2, 3;
  anti.col(1) = -anti.col(0);
  beta << 0.5, 0.5;
  CHECK(non_dominating_direction(anti, {beta}).norm() == 0.0);

  const Eigen::MatrixXd r = random_matrix(7, 3, rng);
  Eigen::VectorXd b3(3);
  b3 << 0.2, 0.3, 0.5;
  Eigen::VectorXd naive = Eigen::VectorXd::Zero(7);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 3; ++j) naive(i) += r(i, j) * b3(j);
  }
  CHECK((non_dominating_direction(r, {b3}) - naive).norm() <= 1e-14);

  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd same(3, 2);
  same.col(0) << 1, -2, 0.5;
  same.col(1) = same.col(0);
  CHECK((ls_direction(same, {s, s}) - std::sqrt(2.0) * same.col(0)).norm() <= 1e-14);
  // Weights must be strictly positive, so (1, 0) is approached from inside.
  Eigen::MatrixXd pair = same;
  pair.col(1) << 4, 4, 4;
  CHECK((ls_direction(pair, {1.0, 1e-12}) - pair.col(0)).norm() <= 1e-11);
  CHECK_THROWS((void)ls_direction(same, {1.0, 1.0, 1.0}));
}

TEST_CASE("all-zero gradients give a uniform beta and zero direction") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 3);
  const std::vector<std::size_t> all{0, 1, 2};
  const auto r = solve_qp(zero, Eigen::VectorXd::Ones(3), all);
  CHECK(r.degenerate);
  CHECK(r.coefficients.beta(0) == doctest::Approx(1.0 / 3.0));
  CHECK(non_dominating_direction(zero, r.coefficients).norm() == 0.0);
}

TEST_CASE("projected-gradient path agrees with the active-set path") {
  std::mt19937_64 rng(29);
  QpOptions pg;
  pg.method = QpMethod::kProjectedGradient;
  for (int k = 0; k < 20; ++k) {
    const int m = 2 + k % 3;
    const Eigen::MatrixXd g = random_matrix(10, m, rng);
    const Eigen::VectorXd a = random_matrix(m, 1, rng);
    const std::vector<std::size_t> none;
    const auto exact = solve_qp(g, a, none);
    const auto approx = solve_qp(g, a, none, pg);
    const Eigen::MatrixXd gram = g.transpose() * g;
    CHECK(qp_objective(gram, a, approx.coefficients.beta) <=
          qp_objective(gram, a, exact.coefficients.beta) + 1e-4);
  }
}
