#include "pinv/oracles.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pinv {

namespace {

// Points reached by sliding along a constraint boundary sit on it only up to
// rounding, so the oracle accepts violations at this level.
constexpr double kFeasibilityTolerance = 1e-12;

struct Search {
  const Eigen::MatrixXd& gram;
  const Eigen::VectorXd& anchor;
  std::span<const std::size_t> active;
  std::optional<GridOracleResult> best;

  void consider(const Eigen::VectorXd& beta) {
    const Eigen::VectorXd mb = gram * beta;
    for (std::size_t j : active) {
      if (mb(Eigen::Index(j)) < -kFeasibilityTolerance) return;
    }
    const double value = (mb - anchor).squaredNorm();
    if (!best || value < best->objective) best = GridOracleResult{beta, value};
  }
};

// Calls visit for every vector of `free` integers in [lo, hi] (inclusive).
void for_each_offset(int free, int lo, int hi, std::vector<int>& digits,
                     const std::function<void()>& visit, int depth = 0) {
  if (depth == free) {
    visit();
    return;
  }
  for (int k = lo; k <= hi; ++k) {
    digits[std::size_t(depth)] = k;
    for_each_offset(free, lo, hi, digits, visit, depth + 1);
  }
}

std::vector<Eigen::VectorXd> boundary_directions(const Eigen::MatrixXd& gram,
                                                 std::span<const std::size_t> active) {
  const Eigen::Index m = gram.rows();
  std::vector<Eigen::RowVectorXd> rows;
  for (std::size_t j : active) rows.push_back(gram.row(Eigen::Index(j)));
  for (Eigen::Index i = 0; i < m; ++i) rows.push_back(Eigen::RowVectorXd::Unit(m, i));
  std::vector<Eigen::VectorXd> out;
  const auto add_null_space = [&](const std::vector<std::size_t>& subset) {
    Eigen::MatrixXd a(Eigen::Index(subset.size()) + 1, m);
    a.row(0).setOnes();
    for (std::size_t r = 0; r < subset.size(); ++r) a.row(Eigen::Index(r) + 1) = rows[subset[r]];
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    for (Eigen::Index c = 0; c < m; ++c) {
      const double sigma = c < sv.size() ? sv(c) : 0.0;
      if (sigma > 1e-10 * sv(0)) continue;
      const Eigen::VectorXd d = svd.matrixV().col(c).normalized();
      out.push_back(d);
      out.push_back(-d);
    }
  };
  const std::size_t k = rows.size();
  add_null_space({});
  if (m >= 3) {
    for (std::size_t a = 0; a < k; ++a) add_null_space({a});
  }
  if (m >= 4) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) add_null_space({a, b});
    }
  }
  return out;
}

}  // namespace

std::optional<GridOracleResult> qp_grid_oracle(const Eigen::MatrixXd& gram,
                                               const Eigen::VectorXd& anchor,
                                               std::span<const std::size_t> active,
                                               int zoom_levels) {
  const int m = int(gram.rows());
  if (m < 1 || m > 4) throw std::invalid_argument("qp_grid_oracle: 1 <= m <= 4");
  Search search{gram, anchor, active, std::nullopt};
  if (m == 1) {
    search.consider(Eigen::VectorXd::Ones(1));
    return search.best;
  }

  // Coarse lattice over the whole simplex.
  const int resolution = m == 2 ? 2000 : (m == 3 ? 160 : 40);
  std::vector<int> digits(static_cast<std::size_t>(m - 1));
  for_each_offset(m - 1, 0, resolution, digits, [&] {
    int used = 0;
    for (int d : digits) used += d;
    if (used > resolution) return;
    Eigen::VectorXd beta(m);
    for (int i = 0; i < m - 1; ++i) beta(i) = double(digits[std::size_t(i)]) / resolution;
    beta(m - 1) = double(resolution - used) / resolution;
    search.consider(beta);
  });
  if (!search.best) return std::nullopt;

  // Zoom: a (2R+1)^(m−1) box of offsets around the incumbent. The box is
  // re-centred while it keeps improving and halves once it stalls.
  // Lattice boxes alone stall against constraints whose boundary is not
  // axis-aligned, so the box is paired with line searches along every edge
  // direction of the feasible region: null vectors of 1ᵀ together with up to
  // m−2 constraint rows (the J rows of M and the simplex facets).
  const int radius = m == 4 ? 8 : 16;
  const auto directions = boundary_directions(gram, active);
  double step = 1.0 / resolution;
  for (int level = 0; level < zoom_levels;) {
    const Eigen::VectorXd center = search.best->beta;
    const double before = search.best->objective;
    for_each_offset(m - 1, -radius, radius, digits, [&] {
      Eigen::VectorXd beta = center;
      double shift = 0.0;
      for (int i = 0; i < m - 1; ++i) {
        beta(i) += digits[std::size_t(i)] * step;
        shift += digits[std::size_t(i)] * step;
      }
      beta(m - 1) -= shift;
      if (beta.minCoeff() < 0.0) return;
      search.consider(beta);
    });
    for (const auto& d : directions) {
      for (int k = 1; k <= radius; ++k) {
        Eigen::VectorXd beta = center + (k * step) * d;
        if (beta.minCoeff() < -kFeasibilityTolerance) break;
        beta = beta.cwiseMax(0.0);
        search.consider(beta / beta.sum());
      }
    }
    if (search.best->objective >= before) {
      step /= 2.0;
      ++level;
    }
  }
  return search.best;
}

Eigen::MatrixXd central_difference(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  const Eigen::Index m = f(x).size();
  Eigen::MatrixXd jac(x.size(), m);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd plus = x, minus = x;
    plus(i) += h;
    minus(i) -= h;
    jac.row(i) = ((f(plus) - f(minus)) / (2.0 * h)).transpose();
  }
  return jac;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("relative_error: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  const double scale = std::max(1e-8, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace pinv
