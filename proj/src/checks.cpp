#include "pinv/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "pinv/epo_qp.hpp"
#include "pinv/metrics.hpp"
#include "pinv/net.hpp"
#include "pinv/oracles.hpp"
#include "pinv/tasks.hpp"
#include "pinv/weights.hpp"

namespace pinv {

namespace {

using Rng64 = std::mt19937_64;

Eigen::VectorXd normal_vector(Eigen::Index n, Rng64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi, Rng64& rng) {
  std::uniform_real_distribution<double> unit(lo, hi);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = unit(rng);
  return v;
}

std::string format(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace

CheckResult check_qp_oracle(int instances, std::uint64_t seed, double tolerance) {
  CheckResult result{"qp", "solve_qp vs lattice oracle", true, 0.0, ""};
  Rng64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int infeasible = 0;
  int oracle_empty = 0;
  for (int k = 0; k < instances; ++k) {
    const int m = 2 + k % 3;
    const Eigen::MatrixXd g = [&] {
      Eigen::MatrixXd out(10, m);
      for (int i = 0; i < m; ++i) out.col(i) = normal_vector(10, rng);
      return out;
    }();
    Eigen::VectorXd anchor;
    std::vector<std::size_t> active;
    if (k % 2 == 0) {
      // Anchors as the descent loop builds them.
      std::vector<double> l(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        l[std::size_t(i)] = 0.05 + unit(rng);
        w[std::size_t(i)] = 0.05 + unit(rng);
      }
      const ObjectiveVector losses(l);
      const WeightVector weights(w);
      const auto a = anchor_direction(losses, weights, 1e-3);
      anchor = a.a;
      active = a.mode == AnchorMode::kBalance ? argmax_relative(losses, weights)
                                              : active_index_set(losses, weights, 1e-3);
    } else {
      anchor = normal_vector(m, rng);
      for (int j = 0; j < m; ++j) {
        if (unit(rng) < 0.5) active.push_back(static_cast<std::size_t>(j));
      }
    }
    const Eigen::MatrixXd gram = g.transpose() * g;
    const auto solved = solve_qp(g, anchor, active);
    const double value = qp_objective(gram, anchor, solved.coefficients.beta);
    if (!solved.coefficients.valid()) {
      result.passed = false;
      result.detail = "instance " + std::to_string(k) + ": beta off the simplex";
      continue;
    }
    auto oracle = qp_grid_oracle(gram, anchor, active);
    double gap = 0.0;
    double reference = 0.0;
    if (solved.infeasible) {
      ++infeasible;
      if (oracle) {
        result.passed = false;
        result.detail = "instance " + std::to_string(k) +
                        ": flagged infeasible but the oracle found a feasible point";
        continue;
      }
      const auto relaxed = qp_grid_oracle(gram, anchor, {});
      gap = std::abs(value - relaxed->objective);
      reference = relaxed->objective;
    } else {
      for (double s : solved.slacks) {
        if (s < -1e-8) {
          result.passed = false;
          result.detail = "instance " + std::to_string(k) + ": slack " + format(s);
        }
      }
      if (!oracle) {
        ++oracle_empty;  // feasible set too thin for the lattice; slacks still checked
        continue;
      }
      gap = std::abs(value - oracle->objective);
      reference = oracle->objective;
    }
    result.worst = std::max(result.worst, gap);
    if (gap > tolerance) {
      result.passed = false;
      result.detail = "instance " + std::to_string(k) + ": solver objective " + format_double(value) +
                      ", lattice " + format_double(reference);
    }
  }
  if (result.passed) {
    result.detail = std::to_string(instances) + " instances, worst gap " + format(result.worst) +
                    ", " + std::to_string(infeasible) + " infeasible, " +
                    std::to_string(oracle_empty) + " too thin for the lattice";
  }
  return result;
}

CheckResult check_hv_monte_carlo(int fronts, std::size_t samples, std::uint64_t seed,
                                 const HypervolumeFn& exact_hv) {
  CheckResult result{"hv", "hypervolume vs Monte Carlo", true, 0.0, ""};
  Rng64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < fronts; ++k) {
    const std::size_t m = 2 + std::size_t(k % 3);
    const std::size_t count = m == 2 ? 10 : 8;
    std::vector<ObjectiveVector> points;
    for (std::size_t i = 0; i < count; ++i) {
      // Jittered points on a curved trade-off surface, so most are non-dominated.
      const Eigen::VectorXd z = normal_vector(Eigen::Index(m), rng).cwiseAbs().normalized();
      std::vector<double> p(m);
      for (std::size_t j = 0; j < m; ++j) {
        p[j] = std::clamp(0.9 - 0.7 * z(Eigen::Index(j)) + 0.05 * unit(rng), 0.0, 1.0);
      }
      points.emplace_back(std::move(p));
    }
    const std::vector<double> ref(m, 1.0);
    const double exact = exact_hv ? exact_hv(points, ref) : hypervolume(points, ref);
    const auto mc = hypervolume_monte_carlo(points, ref, samples, seed + std::uint64_t(k) + 1);
    const double diff = std::abs(exact - mc.value);
    const double z_score = mc.standard_error > 0.0 ? diff / mc.standard_error
                                                   : (diff == 0.0 ? 0.0 : INFINITY);
    result.worst = std::max(result.worst, z_score);
    if (z_score > 3.0) {
      result.passed = false;
      result.detail = "front " + std::to_string(k) + " (m=" + std::to_string(m) +
                      "): exact " + format(exact) + " vs " + format(mc.value) + " ± " +
                      format(mc.standard_error);
    }
  }
  if (result.passed) {
    result.detail = std::to_string(fronts) + " fronts, worst deviation " + format(result.worst) +
                    " standard errors";
  }
  return result;
}

CheckResult check_gradients(const std::string& which, int points, std::uint64_t seed,
                            double tolerance) {
  CheckResult result{"grad", which + " gradients vs central differences", true, 0.0, ""};
  Rng64 rng(seed);
  constexpr double kStep = 1e-6;
  auto record = [&](double err, int k) {
    result.worst = std::max(result.worst, err);
    if (err > tolerance) {
      result.passed = false;
      result.detail = "point " + std::to_string(k) + ": relative error " + format(err);
    }
  };

  for (int k = 0; k < points; ++k) {
    if (which == "synthetic") {
      const Eigen::VectorXd x = uniform_vector(20, -1.0, 1.0, rng);
      auto f = [](const Eigen::VectorXd& p) {
        const auto v = synthetic_loss_values(p);
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), 2));
      };
      record(relative_error(synthetic_gradients(x), central_difference(f, x, kStep)), k);
    } else if (which == "ngram-uni" || which == "ngram-bi") {
      const auto mode = which == "ngram-uni" ? NGramMode::kUnigram : NGramMode::kBigram;
      Eigen::MatrixXd p = uniform_vector(24, 0.0, 1.0, rng).reshaped<Eigen::RowMajor>(8, 3);
      for (int t = 0; t < 8; ++t) p.row(t) /= p.row(t).sum();
      Eigen::VectorXd flat = p.reshaped<Eigen::RowMajor>();
      auto f = [mode](const Eigen::VectorXd& v) {
        const Eigen::MatrixXd q = v.reshaped<Eigen::RowMajor>(8, 3);
        const auto l = ngram_polynomial(q, mode);
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(l.data(), 3));
      };
      record(relative_error(ngram_gradients(p, mode), central_difference(f, flat, kStep)), k);
    } else if (which == "net-input") {
      const auto net = DualPathNet::random(16, 32, 2, seed + std::uint64_t(k));
      const Eigen::VectorXd x = uniform_vector(16, 0.0, 1.0, rng);
      const Eigen::VectorXd targets = uniform_vector(2, 0.0, 1.0, rng);
      auto f = [&](const Eigen::VectorXd& p) { return net.head_losses(p, targets); };
      record(relative_error(net.input_gradients(x, targets), central_difference(f, x, kStep)), k);
    } else if (which == "net-params") {
      const auto net = DualPathNet::random(6, 8, 2, seed + std::uint64_t(k));
      TrainingSet data;
      data.inputs = uniform_vector(5 * 6, 0.0, 1.0, rng).reshaped(5, 6);
      data.targets = uniform_vector(5 * 2, 0.0, 1.0, rng).reshaped(5, 2);
      auto f = [&](const Eigen::VectorXd& flat) {
        NetParameters p = net.parameters();
        p.assign(flat);
        Eigen::VectorXd out(1);
        out(0) = DualPathNet(std::move(p)).loss(data);
        return out;
      };
      const Eigen::VectorXd analytic = net.parameter_gradients(data).flatten();
      record(relative_error(analytic, central_difference(f, net.parameters().flatten(), kStep)),
             k);
    } else {
      throw std::invalid_argument("check_gradients: unknown target '" + which + "'");
    }
  }
  if (result.passed) {
    result.detail = std::to_string(points) + " points, worst relative error " +
                    format(result.worst);
  }
  return result;
}

CheckResult check_weight_generators(std::uint64_t seed) {
  CheckResult result{"weights", "weight generator properties", true, 0.0, ""};
  auto fail = [&](const std::string& why) {
    if (result.passed) result.detail = why;
    result.passed = false;
  };
  auto unit_norm = [&](const std::vector<double>& r, const std::string& where) {
    double n2 = 0.0;
    for (double x : r) {
      if (x < 0.0) fail(where + ": negative component");
      n2 += x * x;
    }
    const double err = std::abs(std::sqrt(n2) - 1.0);
    result.worst = std::max(result.worst, err);
    if (err > 1e-12) fail(where + ": norm off by " + format(err));
  };
  Rng64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double prev0 = 2.0, prev1 = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const auto r = weights_2d(i / 100.0);
    unit_norm(r, "weights_2d");
    if (r[0] > prev0 || r[1] < prev1) fail("weights_2d: not monotone in u");
    prev0 = r[0];
    prev1 = r[1];
  }
  for (int i = 0; i < 200; ++i) {
    unit_norm(weights_4d(unit(rng), unit(rng), unit(rng)), "weights_4d");
    unit_norm(weights_3d(unit(rng), unit(rng)), "weights_3d");
  }
  for (std::size_t m : {2u, 3u, 4u}) {
    for (const auto& w : weight_grid(m, 50, seed)) {
      unit_norm(w.vec(), "weight_grid m=" + std::to_string(m));
      if (*std::min_element(w.vec().begin(), w.vec().end()) <= 0.0) fail("lifted weight has zero");
    }
  }
  if (result.passed) result.detail = "worst norm error " + format(result.worst);
  return result;
}

std::vector<CheckResult> run_selftest(const std::string& filter) {
  struct Row {
    std::string group;
    std::string name;
    std::function<CheckResult()> run;
  };
  const std::vector<Row> rows = {
      {"qp", "qp", [] { return check_qp_oracle(20, 11); }},
      {"hv", "hv", [] { return check_hv_monte_carlo(5, 200000, 12); }},
      {"grad", "synthetic", [] { return check_gradients("synthetic", 5, 13); }},
      {"grad", "ngram-uni", [] { return check_gradients("ngram-uni", 5, 14); }},
      {"grad", "ngram-bi", [] { return check_gradients("ngram-bi", 5, 15); }},
      {"grad", "net-input", [] { return check_gradients("net-input", 5, 16); }},
      {"grad", "net-params", [] { return check_gradients("net-params", 3, 17); }},
      {"weights", "weights", [] { return check_weight_generators(18); }},
  };
  std::vector<CheckResult> out;
  for (const auto& row : rows) {
    const bool selected = filter.empty() || row.group.find(filter) != std::string::npos ||
                          row.name.find(filter) != std::string::npos;
    if (selected) out.push_back(row.run());
  }
  return out;
}

}  // namespace pinv
