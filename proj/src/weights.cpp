#include "pinv/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace pinv {

namespace {

void check_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::out_of_range(std::string(name) + " must lie in [0, 1]");
  }
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / double(base);
  while (index > 0) {
    result += f * double(index % base);
    index /= base;
    f /= double(base);
  }
  return result;
}

}  // namespace

std::vector<double> weights_2d(double u) {
  check_unit(u, "u");
  const double theta = std::numbers::pi / 2.0 * u;
  // cos(π/2) is 6e-17, not 0; snap the endpoints so they are exact.
  if (u == 1.0) return {0.0, 1.0};
  return {std::cos(theta), std::sin(theta)};
}

std::vector<double> weights_4d(double u, double v, double z) {
  check_unit(u, "u");
  check_unit(v, "v");
  check_unit(z, "z");
  const double theta = std::numbers::pi / 2.0 * u;
  const double phi = std::acos(v);
  const double sigma = std::acos(z);
  const double cos_theta = u == 1.0 ? 0.0 : std::cos(theta);
  const double cos_phi = v;
  const double cos_sigma = z;
  std::vector<double> r = {std::sin(phi) * cos_theta * std::sin(sigma),
                           std::sin(phi) * std::sin(theta) * std::sin(sigma),
                           std::sin(sigma) * cos_phi, cos_sigma};
  return r;
}

std::vector<double> weights_3d(double u, double v) {
  auto r = weights_4d(u, v, 0.0);
  r.pop_back();
  return r;
}

WeightVector lift_weight(std::vector<double> raw) {
  if (raw.empty()) throw EmptyInputError("lift_weight: empty vector");
  for (double& x : raw) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("lift_weight: components must be finite and >= 0");
    }
    if (x == 0.0) x = kWeightFloor;
  }
  double norm = 0.0;
  for (double x : raw) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : raw) x /= norm;
  return WeightVector(std::move(raw));
}

std::vector<WeightVector> weight_grid(std::size_t m, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("weight_grid: count must be >= 1");
  std::vector<WeightVector> out;
  out.reserve(count);
  if (m == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double u = count == 1 ? 0.5 : double(i) / double(count - 1);
      out.push_back(lift_weight(weights_2d(u)));
    }
    return out;
  }
  if (m != 3 && m != 4) {
    throw std::invalid_argument("weight_grid: unsupported objective count " + std::to_string(m));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double shift[3] = {unit(rng), unit(rng), unit(rng)};
  const std::uint64_t bases[3] = {2, 3, 5};
  for (std::uint64_t index = 1; out.size() < count; ++index) {
    double q[3];
    for (int d = 0; d < 3; ++d) {
      q[d] = std::fmod(radical_inverse(index, bases[d]) + shift[d], 1.0);
    }
    auto w = lift_weight(m == 3 ? weights_3d(q[0], q[1]) : weights_4d(q[0], q[1], q[2]));
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(std::move(w));
  }
  return out;
}

void write_weights_csv(std::ostream& out, const std::vector<WeightVector>& weights) {
  const std::size_t m = weights.empty() ? 0 : weights.front().size();
  for (std::size_t i = 1; i <= m; ++i) out << (i > 1 ? "," : "") << "lambda_" << i;
  out << '\n';
  for (const auto& w : weights) {
    if (w.size() != m) throw DimensionError("write_weights_csv: mixed lengths");
    for (std::size_t i = 0; i < m; ++i) out << (i ? "," : "") << format_double(w[i]);
    out << '\n';
  }
}

std::vector<WeightVector> read_weights_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw WeightFileError("weights CSV: missing header", 1);
  std::size_t m = std::count(line.begin(), line.end(), ',') + 1;
  if (line.rfind("lambda_1", 0) != 0) {
    throw WeightFileError("weights CSV: header must start with lambda_1", 1);
  }
  std::vector<WeightVector> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || end != cell.data() + cell.size()) {
        throw WeightFileError("weights CSV: row " + std::to_string(row) +
                                  ": cannot parse '" + cell + "'",
                              row);
      }
      values.push_back(v);
    }
    if (values.size() != m) {
      throw WeightFileError("weights CSV: row " + std::to_string(row) + ": expected " +
                                std::to_string(m) + " values, got " +
                                std::to_string(values.size()),
                            row);
    }
    try {
      out.emplace_back(std::move(values));
    } catch (const std::invalid_argument& e) {
      throw WeightFileError("weights CSV: row " + std::to_string(row) + ": " + e.what(), row);
    }
  }
  if (out.empty()) throw WeightFileError("weights CSV: no weight rows", row);
  return out;
}

}  // namespace pinv
