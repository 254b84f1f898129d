#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace spar {

/// Fully-connected ReLU network shape. L hidden layers plus a final affine
/// layer whose raw output is returned untransformed; output transforms are
/// applied by the regression heads that own the network.
struct MlpArchitecture {
  int input_dim = 0;
  std::vector<int> hidden_widths;
  int output_dim = 0;

  int n_layers() const { return static_cast<int>(hidden_widths.size()) + 1; }
  bool operator==(const MlpArchitecture&) const = default;
};

/// Weights a^l (h_l x h_{l-1}) and biases b^l per layer, l = 1..L+1.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

using MlpGrads = MlpParams;

/// He-scaled random initialization (variance 2 / fan-in), suited to the
/// ReLU hidden layers.
MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed);

/// Architecture implied by parameter shapes.
MlpArchitecture params_architecture(const MlpParams& params);

/// Raw network output for a single input; rejects non-finite inputs.
Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& w);

/// Raw outputs for a batch of inputs (rows).
Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& x);

/// Exact reverse-mode gradient of a scalar loss with the given output
/// cotangent; ReLU takes subgradient 0 at 0.
MlpGrads backward(const MlpParams& params, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& dloss_doutput);

/// ADAM moment state.
struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long step = 0;

  static AdamState zeros_like(const MlpParams& params);
};

/// One bias-corrected ADAM update (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
/// Returns false, leaving params and state untouched, if any gradient entry
/// is non-finite; the caller then runs the restart protocol.
bool adam_step(MlpParams& params, AdamState& state, const MlpGrads& grads, double learning_rate,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Per-example loss on the raw network output. Returns the loss and writes
/// d loss / d raw_output into `grad`.
using ExampleLoss = std::function<double(const Eigen::VectorXd& raw_output,
                                         const Eigen::VectorXd& target, Eigen::VectorXd& grad)>;

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 256;
  int max_epochs = 1000;
  double validation_fraction = 0.2;
  int patience = 50;        // epochs without validation improvement
  double restart_shrink = 0.5;  // learning-rate multiplier per restart event
  int max_restarts = 20;
  std::uint64_t seed = 1;
};

struct TrainHistory {
  std::vector<double> train_loss;      // mean finite-batch loss per epoch
  std::vector<double> val_loss;        // index 0 is the initialization
  std::vector<int> restart_epochs;     // one entry per restart event
  double best_val = 0.0;
  int best_epoch = 0;
  int restarts = 0;
  double final_learning_rate = 0.0;
};

struct TrainResult {
  MlpParams params;  // parameters from the best validation epoch
  TrainHistory history;
  bool degraded = false;  // max_restarts exhausted
};

/// Minibatch ADAM with a seeded shuffle/split, early stopping on the
/// validation loss, and the infinite-loss restart protocol: whenever a
/// batch loss is non-finite the last snapshot with verified finite loss is
/// restored (parameters and moments) and the learning rate is multiplied
/// by restart_shrink, up to max_restarts. Rejects data whose loss is not
/// finite at initialization.
TrainResult train(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const ExampleLoss& loss, const MlpArchitecture& arch, const TrainConfig& config,
                  std::optional<MlpParams> initial = std::nullopt);

}  // namespace spar
