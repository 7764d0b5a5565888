#include "pinv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pinv/epo_qp.hpp"

namespace pinv {

namespace {

using Point = std::vector<double>;

double sweep_2d(std::vector<Point> pts, double ref_x, double ref_y) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double best_y = ref_y;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    best_y = std::min(best_y, pts[i][1]);
    const double next_x = i + 1 < pts.size() ? pts[i + 1][0] : ref_x;
    area += (next_x - pts[i][0]) * (ref_y - best_y);
  }
  return area;
}

// Slices along the last coordinate: between consecutive levels the cross
// section is the (d−1)-volume dominated by every point at or below the level.
double slice(std::vector<Point> pts, const Point& ref) {
  const std::size_t d = ref.size();
  if (pts.empty()) return 0.0;
  if (d == 2) return sweep_2d(std::move(pts), ref[0], ref[1]);
  std::sort(pts.begin(), pts.end(),
            [d](const Point& a, const Point& b) { return a[d - 1] < b[d - 1]; });
  const Point sub_ref(ref.begin(), ref.end() - 1);
  std::vector<Point> below;
  double volume = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    below.emplace_back(pts[i].begin(), pts[i].end() - 1);
    const double next = i + 1 < pts.size() ? pts[i + 1][d - 1] : ref[d - 1];
    const double depth = next - pts[i][d - 1];
    if (depth > 0.0) volume += depth * slice(below, sub_ref);
  }
  return volume;
}

std::vector<Point> usable_points(std::span<const ObjectiveVector> points,
                                 std::span<const double> ref) {
  std::vector<Point> out;
  for (const auto& p : points) {
    if (p.size() != ref.size()) throw DimensionError("hypervolume: point/ref length mismatch");
    bool inside = true;
    for (std::size_t i = 0; i < ref.size(); ++i) inside = inside && p[i] < ref[i];
    if (inside) out.emplace_back(p.values().begin(), p.values().end());
  }
  return out;
}

void check_ref(std::span<const double> ref) {
  for (double r : ref) {
    if (!std::isfinite(r)) throw std::invalid_argument("hypervolume: non-finite reference");
  }
}

}  // namespace

double hypervolume(std::span<const ObjectiveVector> points, std::span<const double> ref) {
  const std::size_t m = ref.size();
  if (m < 2 || m > 4) {
    throw UnsupportedDimensionError("hypervolume: exact computation supports 2 <= m <= 4, got " +
                                    std::to_string(m));
  }
  if (points.empty()) throw EmptyInputError("hypervolume: no points");
  check_ref(ref);
  auto pts = usable_points(points, ref);
  if (pts.empty()) return 0.0;

  // Dropping dominated points keeps the slices small.
  std::vector<ObjectiveVector> as_objectives;
  as_objectives.reserve(pts.size());
  for (auto& p : pts) as_objectives.emplace_back(p);
  std::vector<Point> front;
  for (std::size_t i : pareto_filter(as_objectives)) {
    if (std::find(front.begin(), front.end(), pts[i]) == front.end()) front.push_back(pts[i]);
  }
  return slice(std::move(front), Point(ref.begin(), ref.end()));
}

MonteCarloEstimate hypervolume_monte_carlo(std::span<const ObjectiveVector> points,
                                           std::span<const double> ref, std::size_t samples,
                                           std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("hypervolume_monte_carlo: samples must be >= 1");
  if (points.empty()) throw EmptyInputError("hypervolume_monte_carlo: no points");
  check_ref(ref);
  const auto pts = usable_points(points, ref);
  if (pts.empty()) return {};
  const std::size_t m = ref.size();
  Point lower(ref.begin(), ref.end());
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < m; ++i) lower[i] = std::min(lower[i], p[i]);
  }
  double box = 1.0;
  for (std::size_t i = 0; i < m; ++i) box *= ref[i] - lower[i];

  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> axis;
  for (std::size_t i = 0; i < m; ++i) axis.emplace_back(lower[i], ref[i]);
  Point s(m);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t i = 0; i < m; ++i) s[i] = axis[i](rng);
    for (const auto& p : pts) {
      bool covered = true;
      for (std::size_t i = 0; i < m && covered; ++i) covered = p[i] <= s[i];
      if (covered) {
        ++hits;
        break;
      }
    }
  }
  const double f = double(hits) / double(samples);
  return {box * f, box * std::sqrt(f * (1.0 - f) / double(samples))};
}

double nonuniformity_report(const ParetoArchive& archive, const WeightVector& weights,
                            std::size_t k) {
  if (archive.empty()) throw EmptyInputError("nonuniformity_report: empty archive");
  if (k < 1) throw std::invalid_argument("nonuniformity_report: k must be >= 1");
  std::vector<double> mu;
  mu.reserve(archive.size());
  for (const auto& e : archive.entries()) {
    try {
      mu.push_back(nonuniformity(e.objectives, weights));
    } catch (const DegenerateLossError&) {
      mu.push_back(0.0);  // all-zero losses sit at the origin of every ray
    }
  }
  std::sort(mu.begin(), mu.end());
  const std::size_t take = std::min(k, mu.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += mu[i];
  return sum / double(take);
}

double front_coverage(std::span<const ObjectiveVector> front,
                      std::span<const ObjectiveVector> truth, double radius) {
  if (truth.empty()) throw EmptyInputError("front_coverage: empty truth set");
  if (!(radius >= 0.0)) throw std::invalid_argument("front_coverage: radius must be >= 0");
  std::size_t covered = 0;
  for (const auto& t : truth) {
    for (const auto& f : front) {
      if (f.size() != t.size()) throw DimensionError("front_coverage: length mismatch");
      double d2 = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) d2 += (f[i] - t[i]) * (f[i] - t[i]);
      if (std::sqrt(d2) <= radius) {
        ++covered;
        break;
      }
    }
  }
  return double(covered) / double(truth.size());
}

}  // namespace pinv
