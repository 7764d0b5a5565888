#include "pinv/simplex.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pinv {

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  if (m == 0) throw std::invalid_argument("project_to_simplex: empty vector");
  std::vector<double> sorted(v.data(), v.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    cumulative += sorted[k];
    double candidate = (cumulative - 1.0) / double(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace pinv
