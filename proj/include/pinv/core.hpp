/**
 * @file core.hpp
 * @brief Objective/weight value types, dominance, and the Pareto archive.
 *
 * Everything here uses the minimization orientation: smaller losses are
 * better, and a dominates b when a is componentwise no worse.
 */

#ifndef PINV_CORE_HPP
#define PINV_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinv {

/// Raised when two vectors that must share a length do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by operations that need at least one input element.
class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Discrete candidate handle. Each task gives the integers their meaning
/// (grid indices, characters, bits).
using Candidate = std::vector<int>;

/**
 * @brief m non-negative, finite loss values [l_1..l_m].
 */
class ObjectiveVector {
 public:
  ObjectiveVector() = default;
  explicit ObjectiveVector(std::vector<double> values);
  ObjectiveVector(std::initializer_list<double> values)
      : ObjectiveVector(std::vector<double>(values)) {}

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] const std::vector<double>& vec() const { return values_; }

  bool operator==(const ObjectiveVector&) const = default;
  auto operator<=>(const ObjectiveVector&) const = default;

 private:
  std::vector<double> values_;
};

/**
 * @brief Strictly positive importance weights λ.
 *
 * Generated weights lie on the unit sphere; hand-written ones (e.g. (1,3))
 * are accepted as long as every entry is positive and finite.
 */
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> weights);
  WeightVector(std::initializer_list<double> weights)
      : WeightVector(std::vector<double>(weights)) {}

  /// Uniform unit-norm weights 1/sqrt(m).
  static WeightVector uniform(std::size_t m);

  [[nodiscard]] std::size_t size() const { return weights_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }
  [[nodiscard]] std::span<const double> values() const { return weights_; }
  [[nodiscard]] const std::vector<double>& vec() const { return weights_; }
  [[nodiscard]] double norm() const;

  bool operator==(const WeightVector&) const = default;

 private:
  std::vector<double> weights_;
};

enum class Dominance { kStrict, kWeak, kIncomparable };

/// Dominance of a over b. kStrict implies kWeak semantics as well; the
/// stronger relation is reported.
[[nodiscard]] Dominance dominates(std::span<const double> a,
                                  std::span<const double> b);
[[nodiscard]] Dominance dominates(const ObjectiveVector& a,
                                  const ObjectiveVector& b);

[[nodiscard]] inline bool strictly_dominates(const ObjectiveVector& a,
                                             const ObjectiveVector& b) {
  return dominates(a, b) == Dominance::kStrict;
}

/// Indices (ascending) of the points no other point strictly dominates.
/// Exact duplicates of a retained point are all retained.
[[nodiscard]] std::vector<std::size_t> pareto_filter(
    std::span<const ObjectiveVector> points);

/// ř = max_j l_j λ_j.
[[nodiscard]] double relative_max(const ObjectiveVector& losses,
                                  const WeightVector& weights);

struct ArchiveEntry {
  Candidate candidate;
  std::string candidate_id;
  ObjectiveVector objectives;
  std::optional<WeightVector> weight_used;
  std::uint64_t oracle_calls_at_insert = 0;
};

enum class InsertOutcome { kInserted, kRejectedDominated, kRejectedDuplicate };

/**
 * @brief Mutually non-dominated set of evaluated candidates.
 *
 * Single writer. An exact duplicate of an incumbent objective vector is
 * rejected so the earliest insert wins.
 */
class ParetoArchive {
 public:
  InsertOutcome insert(ArchiveEntry entry);

  /// Inserts every entry of other in order.
  void merge(const ParetoArchive& other);

  [[nodiscard]] const std::vector<ArchiveEntry>& entries() const {
    return entries_;
  }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::vector<ObjectiveVector> objective_vectors() const;

 private:
  std::vector<ArchiveEntry> entries_;
};

/// CSV: candidate_id,l_1..l_m,lambda_1..lambda_m,oracle_calls
void write_archive_csv(std::ostream& out, const ParetoArchive& archive);

/// Parses the CSV written by write_archive_csv. Candidates are not
/// recoverable from the id alone, so the returned entries carry only
/// candidate_id, objectives, weights, and call counts.
[[nodiscard]] std::vector<ArchiveEntry> read_archive_csv(std::istream& in);

/// Shortest round-trip decimal form of a double, used by all CSV writers.
[[nodiscard]] std::string format_double(double value);

}  // namespace pinv

#endif  // PINV_CORE_HPP
