#include "pinv/net.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace pinv {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(std::size_t(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Eigen::MatrixXd from_row_major(const std::vector<double>& v, Eigen::Index rows,
                               Eigen::Index cols) {
  if (std::size_t(rows * cols) != v.size()) {
    throw std::invalid_argument("net checkpoint: weight array has wrong size");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[std::size_t(r * cols + c)];
  }
  return m;
}

struct Activations {
  Eigen::MatrixXd hidden;  // N × h, post-tanh
  Eigen::MatrixXd logits;  // N × m
};

Activations run_forward(const NetParameters& p, const Eigen::MatrixXd& inputs) {
  Activations a;
  a.hidden = ((inputs * p.w1.transpose()).rowwise() + p.b1.transpose())
                 .array()
                 .tanh()
                 .matrix();
  a.logits = (a.hidden * p.w2.transpose()).rowwise() + p.b2.transpose();
  return a;
}

}  // namespace

Eigen::VectorXd NetParameters::flatten() const {
  Eigen::VectorXd flat(count());
  Eigen::Index k = 0;
  for (double v : row_major(w1)) flat(k++) = v;
  for (Eigen::Index i = 0; i < b1.size(); ++i) flat(k++) = b1(i);
  for (double v : row_major(w2)) flat(k++) = v;
  for (Eigen::Index i = 0; i < b2.size(); ++i) flat(k++) = b2(i);
  return flat;
}

void NetParameters::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != count()) throw std::invalid_argument("NetParameters::assign: size");
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) w1(r, c) = flat(k++);
  for (Eigen::Index i = 0; i < b1.size(); ++i) b1(i) = flat(k++);
  for (Eigen::Index r = 0; r < w2.rows(); ++r)
    for (Eigen::Index c = 0; c < w2.cols(); ++c) w2(r, c) = flat(k++);
  for (Eigen::Index i = 0; i < b2.size(); ++i) b2(i) = flat(k++);
}

bool NetParameters::operator==(const NetParameters& other) const {
  return w1 == other.w1 && b1 == other.b1 && w2 == other.w2 && b2 == other.b2;
}

DualPathNet::DualPathNet(NetParameters params, std::uint64_t seed)
    : params_(std::move(params)), seed_(seed) {
  if (params_.b1.size() != params_.w1.rows() || params_.w2.cols() != params_.w1.rows() ||
      params_.b2.size() != params_.w2.rows()) {
    throw std::invalid_argument("DualPathNet: inconsistent layer shapes");
  }
  if (!params_.flatten().allFinite()) {
    throw std::invalid_argument("DualPathNet: non-finite parameters");
  }
}

DualPathNet DualPathNet::random(Eigen::Index inputs, Eigen::Index hidden,
                                Eigen::Index heads, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  NetParameters p;
  p.w1 = Eigen::MatrixXd::NullaryExpr(hidden, inputs, [&] { return normal(rng); }) /
         std::sqrt(double(inputs));
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.w2 = Eigen::MatrixXd::NullaryExpr(heads, hidden, [&] { return normal(rng); }) /
         std::sqrt(double(hidden));
  p.b2 = Eigen::VectorXd::Zero(heads);
  return DualPathNet(std::move(p), seed);
}

DualPathNet DualPathNet::zeros(Eigen::Index inputs, Eigen::Index hidden,
                               Eigen::Index heads) {
  NetParameters p;
  p.w1 = Eigen::MatrixXd::Zero(hidden, inputs);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.w2 = Eigen::MatrixXd::Zero(heads, hidden);
  p.b2 = Eigen::VectorXd::Zero(heads);
  return DualPathNet(std::move(p));
}

Eigen::VectorXd DualPathNet::forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd h = (params_.w1 * x + params_.b1).array().tanh().matrix();
  Eigen::VectorXd z = params_.w2 * h + params_.b2;
  return z.unaryExpr(&sigmoid);
}

double DualPathNet::loss(const TrainingSet& data) const {
  const auto act = run_forward(params_, data.inputs);
  double total = 0.0;
  for (Eigen::Index n = 0; n < act.logits.rows(); ++n) {
    for (Eigen::Index i = 0; i < act.logits.cols(); ++i) {
      const double z = act.logits(n, i);
      total += softplus(z) - data.targets(n, i) * z;
    }
  }
  return total / double(data.inputs.rows());
}

NetParameters DualPathNet::parameter_gradients(const TrainingSet& data) const {
  const auto act = run_forward(params_, data.inputs);
  const double n = double(data.inputs.rows());
  Eigen::MatrixXd d_logits =
      (act.logits.unaryExpr(&sigmoid) - data.targets) / n;  // N × m
  NetParameters g;
  g.w2 = d_logits.transpose() * act.hidden;
  g.b2 = d_logits.colwise().sum().transpose();
  Eigen::MatrixXd d_pre =
      ((d_logits * params_.w2).array() * (1.0 - act.hidden.array().square())).matrix();
  g.w1 = d_pre.transpose() * data.inputs;
  g.b1 = d_pre.colwise().sum().transpose();
  return g;
}

Eigen::VectorXd DualPathNet::head_losses(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& targets) const {
  Eigen::VectorXd h = (params_.w1 * x + params_.b1).array().tanh().matrix();
  Eigen::VectorXd z = params_.w2 * h + params_.b2;
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out(i) = softplus(z(i)) - targets(i) * z(i);
  return out;
}

Eigen::MatrixXd DualPathNet::input_gradients(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& targets) const {
  if (x.size() != input_size() || targets.size() != head_count()) {
    throw std::invalid_argument("input_gradients: dimension mismatch");
  }
  Eigen::VectorXd h = (params_.w1 * x + params_.b1).array().tanh().matrix();
  Eigen::VectorXd z = params_.w2 * h + params_.b2;
  Eigen::ArrayXd slope = 1.0 - h.array().square();
  Eigen::MatrixXd out(input_size(), head_count());
  for (Eigen::Index i = 0; i < head_count(); ++i) {
    const double d_logit = sigmoid(z(i)) - targets(i);
    Eigen::VectorXd d_pre = (params_.w2.row(i).transpose().array() * slope).matrix();
    out.col(i) = d_logit * (params_.w1.transpose() * d_pre);
  }
  return out;
}

Eigen::MatrixXd DualPathNet::input_gradients(const Eigen::VectorXd& x) const {
  return input_gradients(x, Eigen::VectorXd::Ones(head_count()));
}

nlohmann::json DualPathNet::to_json() const {
  return {
      {"layer_sizes", {input_size(), hidden_size(), head_count()}},
      {"w1", row_major(params_.w1)},
      {"b1", std::vector<double>(params_.b1.begin(), params_.b1.end())},
      {"w2", row_major(params_.w2)},
      {"b2", std::vector<double>(params_.b2.begin(), params_.b2.end())},
      {"seed", seed_},
      {"final_loss", final_loss_},
  };
}

DualPathNet DualPathNet::from_json(const nlohmann::json& j) {
  const auto sizes = j.at("layer_sizes").get<std::vector<Eigen::Index>>();
  if (sizes.size() != 3) throw std::invalid_argument("net checkpoint: need 3 layer sizes");
  NetParameters p;
  p.w1 = from_row_major(j.at("w1").get<std::vector<double>>(), sizes[1], sizes[0]);
  auto b1 = j.at("b1").get<std::vector<double>>();
  p.b1 = Eigen::Map<Eigen::VectorXd>(b1.data(), Eigen::Index(b1.size()));
  p.w2 = from_row_major(j.at("w2").get<std::vector<double>>(), sizes[2], sizes[1]);
  auto b2 = j.at("b2").get<std::vector<double>>();
  p.b2 = Eigen::Map<Eigen::VectorXd>(b2.data(), Eigen::Index(b2.size()));
  DualPathNet net(std::move(p), j.value("seed", std::uint64_t{0}));
  net.final_loss_ = j.value("final_loss", 0.0);
  return net;
}

TrainResult train(DualPathNet net, const TrainingSet& data, int epochs, double rate) {
  if (data.inputs.rows() == 0) throw std::invalid_argument("train: empty dataset");
  if (data.inputs.rows() != data.targets.rows() ||
      data.inputs.cols() != net.input_size() || data.targets.cols() != net.head_count()) {
    throw std::invalid_argument("train: dataset shape does not match the net");
  }
  if (data.targets.minCoeff() < 0.0 || data.targets.maxCoeff() > 1.0) {
    throw std::invalid_argument("train: labels must lie in [0, 1]");
  }
  TrainResult result;
  result.loss_curve.reserve(std::size_t(std::max(epochs, 0)) + 1);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double current = net.loss(data);
    if (!std::isfinite(current)) {
      throw DivergenceError("training loss became non-finite; try a smaller rate");
    }
    result.loss_curve.push_back(current);
    const auto g = net.parameter_gradients(data);
    net.params_.w1 -= rate * g.w1;
    net.params_.b1 -= rate * g.b1;
    net.params_.w2 -= rate * g.w2;
    net.params_.b2 -= rate * g.b2;
  }
  const double final_loss = net.loss(data);
  if (!std::isfinite(final_loss)) {
    throw DivergenceError("training loss became non-finite; try a smaller rate");
  }
  result.loss_curve.push_back(final_loss);
  if (epochs > 0) net.final_loss_ = final_loss;
  result.net = std::move(net);
  return result;
}

}  // namespace pinv
