/**
 * @file report.hpp
 * @brief Run artifacts: trajectory and trace CSVs, metrics/theory JSON, and a
 * static SVG of the objective-space front.
 */

#ifndef PINV_REPORT_HPP
#define PINV_REPORT_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinv/search.hpp"

namespace pinv {

/// round,l_1..l_m,mu,r_check,oracle_calls
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& trajectory,
                          std::size_t m);

/// round,l_1..l_m,mu,r_check,mode. Rounds are numbered consecutively across
/// outer iterations (outer t, inner k → t·K + k).
void write_inner_trace_csv(std::ostream& out,
                           const std::vector<std::vector<InnerRound>>& traces, std::size_t m);

/// Keys shared by every metrics.json, whatever the mode or command.
struct MetricsSummary {
  double hv = 0.0;
  double nu_topk = 0.0;
  std::optional<double> coverage;
  std::uint64_t oracle_calls_total = 0;
  double wallclock_ms = 0.0;
  std::string task;
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t archive_size = 0;
  std::size_t rays = 1;
  std::size_t failed_rays = 0;
  std::uint64_t pretraining_calls = 0;
};

[[nodiscard]] nlohmann::json metrics_json(const MetricsSummary& summary);

struct FrontPlot {
  std::vector<ObjectiveVector> points;
  std::vector<ObjectiveVector> truth;  ///< drawn as a line when non-empty
  std::vector<WeightVector> rays;      ///< λ⁻¹ directions
  std::string title;
};

/// Scatter of the first two objectives on [0, 1]², with the true front and
/// λ⁻¹ rays when given.
void write_front_svg(std::ostream& out, const FrontPlot& plot);

/// Writes text to path, appending a newline if it lacks one.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pinv

#endif  // PINV_REPORT_HPP
