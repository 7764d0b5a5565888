/**
 * @file weights.hpp
 * @brief Weight vectors on the positive orthant of the unit sphere.
 *
 * Generators may emit exact zeros (e.g. u = 0 gives (1, 0)). lift_weight
 * raises zeros to a small floor so the result is a valid WeightVector.
 */

#ifndef PINV_WEIGHTS_HPP
#define PINV_WEIGHTS_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "pinv/core.hpp"

namespace pinv {

inline constexpr double kWeightFloor = 1e-3;

/// Parse or range failure in a weight file; row() is 1-based (header = 1).
class WeightFileError : public std::runtime_error {
 public:
  WeightFileError(const std::string& what, std::size_t row)
      : std::runtime_error(what), row_(row) {}
  [[nodiscard]] std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// θ = πu/2, r = (cos θ, sin θ). May contain zeros.
[[nodiscard]] std::vector<double> weights_2d(double u);

/// θ = πu/2, φ = arccos v, σ = arccos z;
/// r = (sinφ cosθ sinσ, sinφ sinθ sinσ, sinσ cosφ, cosσ).
[[nodiscard]] std::vector<double> weights_4d(double u, double v, double z);

/// The 4-D construction with σ = π/2, dropping the last (zero) coordinate.
/// Not one of the published generators; an extension for m = 3.
[[nodiscard]] std::vector<double> weights_3d(double u, double v);

/// Replaces zero components by kWeightFloor and renormalizes to unit norm.
[[nodiscard]] WeightVector lift_weight(std::vector<double> raw);

/// m = 2: u evenly spaced over [0, 1] (u = 0.5 when count = 1).
/// m = 3, 4: shifted Halton points seeded by `seed`, deduplicated.
/// Every vector is lifted.
[[nodiscard]] std::vector<WeightVector> weight_grid(std::size_t m, std::size_t count,
                                                    std::uint64_t seed = 0);

/// Header lambda_1..lambda_m, one vector per row.
void write_weights_csv(std::ostream& out, const std::vector<WeightVector>& weights);
[[nodiscard]] std::vector<WeightVector> read_weights_csv(std::istream& in);

}  // namespace pinv

#endif  // PINV_WEIGHTS_HPP
