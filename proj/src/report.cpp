#include "pinv/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace pinv {

namespace {

void write_loss_header(std::ostream& out, std::size_t m) {
  out << "round";
  for (std::size_t i = 1; i <= m; ++i) out << ",l_" << i;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& trajectory,
                          std::size_t m) {
  write_loss_header(out, m);
  out << ",mu,r_check,oracle_calls\n";
  for (const auto& r : trajectory) {
    out << r.round;
    for (double v : r.objectives.values()) out << ',' << format_double(v);
    out << ',' << format_double(r.mu) << ',' << format_double(r.r_check) << ','
        << r.oracle_calls << '\n';
  }
}

void write_inner_trace_csv(std::ostream& out,
                           const std::vector<std::vector<InnerRound>>& traces, std::size_t m) {
  write_loss_header(out, m);
  out << ",mu,r_check,mode\n";
  std::size_t round = 0;
  for (const auto& trace : traces) {
    for (const auto& r : trace) {
      out << round++;
      for (double v : r.losses) out << ',' << format_double(v);
      out << ',' << format_double(r.mu) << ',' << format_double(r.r_check) << ',' << r.mode
          << '\n';
    }
  }
}

nlohmann::json metrics_json(const MetricsSummary& s) {
  return {
      {"hv", s.hv},
      {"nu_topk", s.nu_topk},
      {"coverage", s.coverage ? nlohmann::json(*s.coverage) : nlohmann::json(nullptr)},
      {"oracle_calls_total", s.oracle_calls_total},
      {"wallclock_ms", s.wallclock_ms},
      {"task", s.task},
      {"mode", s.mode},
      {"seed", s.seed},
      {"archive_size", s.archive_size},
      {"rays", s.rays},
      {"failed_rays", s.failed_rays},
      {"pretraining_calls", s.pretraining_calls},
  };
}

void write_front_svg(std::ostream& out, const FrontPlot& plot) {
  constexpr double kSize = 480.0;
  constexpr double kMargin = 50.0;
  constexpr double kSpan = kSize - 2.0 * kMargin;
  auto sx = [&](double v) { return fixed(kMargin + std::clamp(v, 0.0, 1.0) * kSpan); };
  auto sy = [&](double v) { return fixed(kSize - kMargin - std::clamp(v, 0.0, 1.0) * kSpan); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << plot.title << "</text>\n";
  // Axes with ticks at 0, 0.5, 1.
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\""
      << sy(0) << "\"/>\n";
  out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(0) << "\" y2=\""
      << sy(1) << "\"/>\n";
  out << "</g>\n<g font-size=\"11\">\n";
  for (double t : {0.0, 0.5, 1.0}) {
    out << "<text x=\"" << sx(t) << "\" y=\"" << fixed(kSize - kMargin + 16)
        << "\" text-anchor=\"middle\">" << fixed(t) << "</text>\n";
    out << "<text x=\"" << fixed(kMargin - 8) << "\" y=\"" << sy(t)
        << "\" text-anchor=\"end\">" << fixed(t) << "</text>\n";
  }
  out << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 12
      << "\" text-anchor=\"middle\">l_1</text>\n";
  out << "<text x=\"14\" y=\"" << kSize / 2 << "\" text-anchor=\"middle\">l_2</text>\n";
  out << "</g>\n";

  for (const auto& w : plot.rays) {
    if (w.size() < 2) continue;
    // Direction (1/λ_1, 1/λ_2), scaled to leave the unit square.
    const double dx = 1.0 / w[0];
    const double dy = 1.0 / w[1];
    const double s = 1.0 / std::max(dx, dy);
    out << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(dx * s)
        << "\" y2=\"" << sy(dy * s)
        << "\" stroke=\"#999999\" stroke-width=\"0.6\" stroke-dasharray=\"4 3\"/>\n";
  }
  if (!plot.truth.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < plot.truth.size(); ++i) {
      if (plot.truth[i].size() < 2) continue;
      out << (i ? " " : "") << sx(plot.truth[i][0]) << ',' << sy(plot.truth[i][1]);
    }
    out << "\"/>\n";
  }
  for (const auto& p : plot.points) {
    if (p.size() < 2) continue;
    out << "<circle cx=\"" << sx(p[0]) << "\" cy=\"" << sy(p[1])
        << "\" r=\"3\" fill=\"#d62728\" fill-opacity=\"0.8\"/>\n";
  }
  out << "</svg>\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file << text;
  if (text.empty() || text.back() != '\n') file << '\n';
}

}  // namespace pinv
