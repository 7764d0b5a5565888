#include "pinv/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace pinv {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": length mismatch (" << a << " vs " << b << ")";
    throw DimensionError(msg.str());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

ObjectiveVector::ObjectiveVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) {
    throw DimensionError("ObjectiveVector needs at least one objective");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(
          "ObjectiveVector entries must be finite and non-negative");
    }
  }
}

WeightVector::WeightVector(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw DimensionError("WeightVector needs at least one weight");
  }
  for (double w : weights_) {
    if (!std::isfinite(w) || w <= 0.0) {
      throw std::invalid_argument(
          "WeightVector entries must be finite and strictly positive");
    }
  }
}

WeightVector WeightVector::uniform(std::size_t m) {
  return WeightVector(std::vector<double>(m, 1.0 / std::sqrt(double(m))));
}

double WeightVector::norm() const {
  double sum = 0.0;
  for (double w : weights_) sum += w * w;
  return std::sqrt(sum);
}

Dominance dominates(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dominates");
  bool some_strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return Dominance::kIncomparable;
    if (a[i] < b[i]) some_strict = true;
  }
  return some_strict ? Dominance::kStrict : Dominance::kWeak;
}

Dominance dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  return dominates(a.values(), b.values());
}

std::vector<std::size_t> pareto_filter(std::span<const ObjectiveVector> points) {
  if (points.empty()) throw EmptyInputError("pareto_filter: empty input");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      if (j != i && strictly_dominates(points[j], points[i])) dominated = true;
    }
    if (!dominated) kept.push_back(i);
  }
  return kept;
}

double relative_max(const ObjectiveVector& losses, const WeightVector& weights) {
  require_same_length(losses.size(), weights.size(), "relative_max");
  double best = losses[0] * weights[0];
  for (std::size_t j = 1; j < losses.size(); ++j) {
    best = std::max(best, losses[j] * weights[j]);
  }
  return best;
}

InsertOutcome ParetoArchive::insert(ArchiveEntry entry) {
  for (const auto& incumbent : entries_) {
    switch (dominates(incumbent.objectives, entry.objectives)) {
      case Dominance::kStrict:
        return InsertOutcome::kRejectedDominated;
      case Dominance::kWeak:
        return InsertOutcome::kRejectedDuplicate;
      case Dominance::kIncomparable:
        break;
    }
  }
  std::erase_if(entries_, [&](const ArchiveEntry& incumbent) {
    return strictly_dominates(entry.objectives, incumbent.objectives);
  });
  entries_.push_back(std::move(entry));
  return InsertOutcome::kInserted;
}

void ParetoArchive::merge(const ParetoArchive& other) {
  for (const auto& entry : other.entries()) insert(entry);
}

std::vector<ObjectiveVector> ParetoArchive::objective_vectors() const {
  std::vector<ObjectiveVector> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.objectives);
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_archive_csv(std::ostream& out, const ParetoArchive& archive) {
  std::size_t m = archive.empty() ? 0 : archive.entries().front().objectives.size();
  out << "candidate_id";
  for (std::size_t i = 1; i <= m; ++i) out << ",l_" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",lambda_" << i;
  out << ",oracle_calls\n";
  for (const auto& e : archive.entries()) {
    out << e.candidate_id;
    for (double v : e.objectives.values()) out << ',' << format_double(v);
    for (std::size_t i = 0; i < m; ++i) {
      out << ',';
      if (e.weight_used) out << format_double((*e.weight_used)[i]);
    }
    out << ',' << e.oracle_calls_at_insert << '\n';
  }
}

std::vector<ArchiveEntry> read_archive_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  auto header = split_csv_line(line);
  if (header.size() < 4 || header.front() != "candidate_id" ||
      header.back() != "oracle_calls" || (header.size() - 2) % 2 != 0) {
    throw std::invalid_argument("archive CSV: unexpected header");
  }
  std::size_t m = (header.size() - 2) / 2;
  std::vector<ArchiveEntry> entries;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("archive CSV: wrong cell count on row " +
                                  std::to_string(row));
    }
    ArchiveEntry e;
    e.candidate_id = cells[0];
    std::vector<double> l(m), w;
    for (std::size_t i = 0; i < m; ++i) l[i] = parse_double(cells[1 + i]);
    if (!cells[1 + m].empty()) {
      w.resize(m);
      for (std::size_t i = 0; i < m; ++i) w[i] = parse_double(cells[1 + m + i]);
      e.weight_used = WeightVector(std::move(w));
    }
    e.objectives = ObjectiveVector(std::move(l));
    e.oracle_calls_at_insert = std::stoull(cells.back());
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace pinv
