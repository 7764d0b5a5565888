#include <doctest.h>

#include <random>
#include <sstream>

#include "pinv/core.hpp"

using namespace pinv;

TEST_CASE("dominance relation") {
  CHECK(dominates(ObjectiveVector{0.1, 0.2}, ObjectiveVector{0.3, 0.4}) == Dominance::kStrict);
  CHECK(dominates(ObjectiveVector{0.1, 0.5}, ObjectiveVector{0.3, 0.4}) ==
        Dominance::kIncomparable);
  CHECK(dominates(ObjectiveVector{0.2, 0.2}, ObjectiveVector{0.2, 0.2}) == Dominance::kWeak);
  CHECK_THROWS_AS((void)dominates(ObjectiveVector{0.1}, ObjectiveVector{0.1, 0.2}),
                  DimensionError);
}

TEST_CASE("dominance is irreflexive, antisymmetric and transitive on random vectors") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 3);
  auto draw = [&] {
    return ObjectiveVector{double(level(rng)), double(level(rng)), double(level(rng))};
  };
  for (int i = 0; i < 500; ++i) {
    const auto a = draw(), b = draw(), c = draw();
    CHECK_FALSE(strictly_dominates(a, a));
    if (strictly_dominates(a, b)) CHECK_FALSE(strictly_dominates(b, a));
    if (strictly_dominates(a, b) && strictly_dominates(b, c)) CHECK(strictly_dominates(a, c));
  }
}

TEST_CASE("pareto filter") {
  const std::vector<ObjectiveVector> pts{{0, 1}, {1, 0}, {0.5, 0.5}, {0.6, 0.6}};
  CHECK(pareto_filter(pts) == std::vector<std::size_t>{0, 1, 2});
  const std::vector<ObjectiveVector> single{{0.2, 0.2}};
  CHECK(pareto_filter(single) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS((void)pareto_filter(std::vector<ObjectiveVector>{}), EmptyInputError);
}

TEST_CASE("pareto filter matches pairwise brute force") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ObjectiveVector> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({unit(rng), unit(rng), unit(rng)});
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        bool le = true, lt = false;
        for (std::size_t k = 0; k < 3; ++k) {
          le = le && pts[j][k] <= pts[i][k];
          lt = lt || pts[j][k] < pts[i][k];
        }
        dominated = dominated || (le && lt);
      }
      if (!dominated) expected.push_back(i);
    }
    CHECK(pareto_filter(pts) == expected);
  }
}

TEST_CASE("archive insertion") {
  ParetoArchive archive;
  CHECK(archive.insert({{}, "a", {0.4, 0.4}, {}, 0}) == InsertOutcome::kInserted);
  CHECK(archive.insert({{}, "b", {0.5, 0.5}, {}, 0}) == InsertOutcome::kRejectedDominated);
  CHECK(archive.insert({{}, "c", {0.3, 0.6}, {}, 0}) == InsertOutcome::kInserted);
  CHECK(archive.size() == 2);

  ParetoArchive two;
  (void)two.insert({{}, "a", {0.4, 0.4}, {}, 0});
  (void)two.insert({{}, "b", {0.2, 0.9}, {}, 0});
  CHECK(two.insert({{}, "c", {0.1, 0.1}, {}, 0}) == InsertOutcome::kInserted);
  REQUIRE(two.size() == 1);
  CHECK(two.entries()[0].candidate_id == "c");
  CHECK(two.insert({{}, "d", {0.1, 0.1}, {}, 0}) == InsertOutcome::kRejectedDuplicate);
}

TEST_CASE("archive stays mutually non-dominated under random inserts") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParetoArchive archive;
  for (int i = 0; i < 300; ++i) {
    (void)archive.insert({{}, std::to_string(i), {unit(rng), unit(rng)}, {}, 0});
  }
  for (const auto& a : archive.entries()) {
    for (const auto& b : archive.entries()) CHECK_FALSE(strictly_dominates(a.objectives, b.objectives));
  }
}

TEST_CASE("relative max") {
  CHECK(relative_max({0.2, 0.4}, {1, 3}) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(relative_max({1, 1}, {0.5, 0.5}) == 0.5);
  CHECK(relative_max({0.3, 0.3, 0.9}, {1, 1, 1}) == 0.9);
}

TEST_CASE("vector validation") {
  CHECK_THROWS_AS(ObjectiveVector(std::vector<double>{}), DimensionError);
  CHECK_THROWS(ObjectiveVector{0.1, std::nan("")});
  CHECK_THROWS(WeightVector{-1.0, 1.0});
}

TEST_CASE("archive CSV round-trips exactly") {
  ParetoArchive archive;
  (void)archive.insert({{1, 2}, "x", {0.1, 1.0 / 3.0}, {}, 4});
  (void)archive.insert({{3, 4}, "y", {0.7, 0.2}, {}, 8});
  std::stringstream s;
  write_archive_csv(s, archive);
  const auto back = read_archive_csv(s);
  REQUIRE(back.size() == 2);
  CHECK(back[0].objectives == archive.entries()[0].objectives);
  CHECK(back[1].objectives == archive.entries()[1].objectives);
  CHECK(back[1].candidate_id == "y");
}
