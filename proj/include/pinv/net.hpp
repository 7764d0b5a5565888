/**
 * @file net.hpp
 * @brief Two-layer multi-head surrogate used two ways: forward to predict
 * properties, and differentiated w.r.t. its input to steer candidates.
 *
 * Layout: x (n_in) -> tanh(W1 x + b1) (hidden) -> sigmoid(W2 h + b2) (m heads).
 */

#ifndef PINV_NET_HPP
#define PINV_NET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace pinv {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter-shaped container; also used for parameter gradients.
struct NetParameters {
  Eigen::MatrixXd w1;  ///< hidden × n_in
  Eigen::VectorXd b1;  ///< hidden
  Eigen::MatrixXd w2;  ///< m × hidden
  Eigen::VectorXd b2;  ///< m

  [[nodiscard]] Eigen::Index count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
  /// Flat view in order w1 (row-major), b1, w2 (row-major), b2.
  [[nodiscard]] Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  bool operator==(const NetParameters& other) const;
};

struct TrainingSet {
  Eigen::MatrixXd inputs;   ///< N × n_in
  Eigen::MatrixXd targets;  ///< N × m, entries in [0, 1]
};

class DualPathNet;

struct TrainResult;

class DualPathNet {
 public:
  DualPathNet() = default;
  explicit DualPathNet(NetParameters params, std::uint64_t seed = 0);

  /// Xavier-style normal initialization from seed.
  static DualPathNet random(Eigen::Index inputs, Eigen::Index hidden,
                            Eigen::Index heads, std::uint64_t seed);
  static DualPathNet zeros(Eigen::Index inputs, Eigen::Index hidden,
                           Eigen::Index heads);

  [[nodiscard]] Eigen::Index input_size() const { return params_.w1.cols(); }
  [[nodiscard]] Eigen::Index hidden_size() const { return params_.w1.rows(); }
  [[nodiscard]] Eigen::Index head_count() const { return params_.w2.rows(); }
  [[nodiscard]] const NetParameters& parameters() const { return params_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] double final_loss() const { return final_loss_; }

  /// Direct path: ŷ in (0,1)^m.
  [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  /// Mean over samples of Σ_heads BCE(ŷ, y).
  [[nodiscard]] double loss(const TrainingSet& data) const;
  [[nodiscard]] NetParameters parameter_gradients(const TrainingSet& data) const;

  /// Inversion path: column i = ∂ BCE(ŷ_i, target_i) / ∂x.
  [[nodiscard]] Eigen::MatrixXd input_gradients(const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& targets) const;
  [[nodiscard]] Eigen::MatrixXd input_gradients(const Eigen::VectorXd& x) const;
  /// BCE(ŷ_i, target_i) per head, the losses input_gradients differentiates.
  [[nodiscard]] Eigen::VectorXd head_losses(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& targets) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static DualPathNet from_json(const nlohmann::json& j);

  friend TrainResult train(DualPathNet net, const TrainingSet& data, int epochs,
                           double rate);

 private:
  NetParameters params_;
  std::uint64_t seed_ = 0;
  double final_loss_ = 0.0;
};

struct TrainResult {
  DualPathNet net;
  /// Loss before each epoch, then the final loss (epochs + 1 values).
  std::vector<double> loss_curve;
};

/// Full-batch gradient descent on the summed-head mean BCE. The returned
/// net is the frozen surrogate.
[[nodiscard]] TrainResult train(DualPathNet net, const TrainingSet& data, int epochs,
                                double rate = 1e-2);

}  // namespace pinv

#endif  // PINV_NET_HPP
