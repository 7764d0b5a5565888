#ifndef PINV_SIMPLEX_HPP
#define PINV_SIMPLEX_HPP

#include <Eigen/Core>

namespace pinv {

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1},
/// sort-based (O(m log m)).
[[nodiscard]] Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

}  // namespace pinv

#endif  // PINV_SIMPLEX_HPP
