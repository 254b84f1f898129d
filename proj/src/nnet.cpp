#include "spar/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spar/rng.hpp"

namespace spar {

namespace {

void check_arch(const MlpArchitecture& arch) {
  if (arch.input_dim < 1 || arch.output_dim < 1 || arch.hidden_widths.empty()) {
    throw std::invalid_argument("MlpArchitecture: need input, output and at least one hidden layer");
  }
  for (int h : arch.hidden_widths) {
    if (h < 1) throw std::invalid_argument("MlpArchitecture: widths must be >= 1");
  }
}

bool all_finite(const MlpParams& p) {
  for (const auto& w : p.weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : p.biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

// Forward pass over a batch keeping the post-activation of every layer;
// activations[0] is the input, activations.back() the raw output.
std::vector<Eigen::MatrixXd> forward_cached(const MlpParams& params, const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(params.weights.size() + 1);
  acts.push_back(x);
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Eigen::MatrixXd z =
        (acts.back() * params.weights[l].transpose()).rowwise() + params.biases[l].transpose();
    if (l != last) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

// Reverse pass: `cotangent` is d loss / d raw_output for each batch row.
MlpGrads backward_cached(const MlpParams& params, const std::vector<Eigen::MatrixXd>& acts,
                         const Eigen::MatrixXd& cotangent) {
  MlpGrads grads;
  grads.weights.resize(params.weights.size());
  grads.biases.resize(params.biases.size());
  Eigen::MatrixXd delta = cotangent;
  for (std::size_t l = params.weights.size(); l-- > 0;) {
    grads.weights[l] = delta.transpose() * acts[l];
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * params.weights[l]).eval();
      // ReLU subgradient: 0 where the activation was clipped (or exactly 0)
      delta.array() *= (acts[l].array() > 0.0).cast<double>();
    }
  }
  return grads;
}

struct Snapshot {
  MlpParams params;
  AdamState adam;
};

}  // namespace

MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed) {
  check_arch(arch);
  Rng rng(seed);
  std::vector<int> widths;
  widths.push_back(arch.input_dim);
  widths.insert(widths.end(), arch.hidden_widths.begin(), arch.hidden_widths.end());
  widths.push_back(arch.output_dim);

  MlpParams params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double sd = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = sd * rng.normal();
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return params;
}

MlpArchitecture params_architecture(const MlpParams& params) {
  MlpArchitecture arch;
  arch.input_dim = static_cast<int>(params.weights.front().cols());
  arch.output_dim = static_cast<int>(params.weights.back().rows());
  for (std::size_t l = 0; l + 1 < params.weights.size(); ++l) {
    arch.hidden_widths.push_back(static_cast<int>(params.weights[l].rows()));
  }
  return arch;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& w) {
  if (!w.allFinite()) throw std::invalid_argument("forward: non-finite input");
  Eigen::VectorXd a = w;
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    a = (params.weights[l] * a + params.biases[l]).eval();
    if (l != last) a = a.cwiseMax(0.0);
  }
  return a;
}

Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& x) {
  if (!x.allFinite()) throw std::invalid_argument("forward_batch: non-finite input");
  Eigen::MatrixXd a = x;
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    a = ((a * params.weights[l].transpose()).rowwise() + params.biases[l].transpose()).eval();
    if (l != last) a = a.cwiseMax(0.0);
  }
  return a;
}

MlpGrads backward(const MlpParams& params, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& dloss_doutput) {
  if (!dloss_doutput.allFinite()) throw std::invalid_argument("backward: non-finite cotangent");
  const auto acts = forward_cached(params, w.transpose());
  return backward_cached(params, acts, dloss_doutput.transpose());
}

AdamState AdamState::zeros_like(const MlpParams& params) {
  AdamState s;
  for (const auto& w : params.weights) {
    s.m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    s.v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : params.biases) {
    s.m_b.push_back(Eigen::VectorXd::Zero(b.size()));
    s.v_b.push_back(Eigen::VectorXd::Zero(b.size()));
  }
  return s;
}

bool adam_step(MlpParams& params, AdamState& state, const MlpGrads& grads, double learning_rate,
               double beta1, double beta2, double eps) {
  if (!all_finite(grads)) return false;
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    state.m_w[l] = beta1 * state.m_w[l] + (1.0 - beta1) * grads.weights[l];
    state.v_w[l] = beta2 * state.v_w[l] + (1.0 - beta2) * grads.weights[l].array().square().matrix();
    params.weights[l].array() -=
        learning_rate * (state.m_w[l].array() / bc1) / ((state.v_w[l].array() / bc2).sqrt() + eps);
    state.m_b[l] = beta1 * state.m_b[l] + (1.0 - beta1) * grads.biases[l];
    state.v_b[l] = beta2 * state.v_b[l] + (1.0 - beta2) * grads.biases[l].array().square().matrix();
    params.biases[l].array() -=
        learning_rate * (state.m_b[l].array() / bc1) / ((state.v_b[l].array() / bc2).sqrt() + eps);
  }
  return true;
}

TrainResult train(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const ExampleLoss& loss, const MlpArchitecture& arch, const TrainConfig& config,
                  std::optional<MlpParams> initial) {
  check_arch(arch);
  const Eigen::Index n = inputs.rows();
  if (n < 2) throw std::invalid_argument("train: need at least two examples");
  if (targets.rows() != n) throw std::invalid_argument("train: inputs/targets row mismatch");
  if (inputs.cols() != arch.input_dim) throw std::invalid_argument("train: input width mismatch");
  if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0)) {
    throw std::invalid_argument("train: validation_fraction must be in (0,1)");
  }
  if (!(config.restart_shrink > 0.0 && config.restart_shrink < 1.0)) {
    throw std::invalid_argument("train: restart_shrink must be in (0,1)");
  }

  Rng rng(config.seed);
  MlpParams params = initial ? std::move(*initial) : init_params(arch, Rng::derive_seed(config.seed, 0));

  // Seeded shuffle, then holdout split.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
  }
  Eigen::Index n_val = static_cast<Eigen::Index>(
      std::llround(config.validation_fraction * static_cast<double>(n)));
  n_val = std::clamp<Eigen::Index>(n_val, 1, n - 1);
  const Eigen::Index n_train = n - n_val;

  auto gather = [&](Eigen::Index begin, Eigen::Index count, const Eigen::MatrixXd& src) {
    Eigen::MatrixXd out(count, src.cols());
    for (Eigen::Index i = 0; i < count; ++i) out.row(i) = src.row(order[static_cast<std::size_t>(begin + i)]);
    return out;
  };
  const Eigen::MatrixXd train_x = gather(0, n_train, inputs);
  const Eigen::MatrixXd train_y = gather(0, n_train, targets);
  const Eigen::MatrixXd val_x = gather(n_train, n_val, inputs);
  const Eigen::MatrixXd val_y = gather(n_train, n_val, targets);

  Eigen::VectorXd grad_buf(arch.output_dim);
  // Mean loss over a full set, no gradient.
  auto eval_set = [&](const MlpParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const Eigen::MatrixXd raw = forward_batch(p, x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      total += loss(raw.row(i).transpose(), y.row(i).transpose(), grad_buf);
      if (!std::isfinite(total)) return total;
    }
    return total / static_cast<double>(x.rows());
  };

  if (!std::isfinite(eval_set(params, train_x, train_y)) ||
      !std::isfinite(eval_set(params, val_x, val_y))) {
    throw std::runtime_error("train: loss is not finite at initialization");
  }

  AdamState adam = AdamState::zeros_like(params);
  Snapshot snapshot{params, adam};  // initialization has verified finite loss

  TrainResult result;
  result.history.val_loss.push_back(eval_set(params, val_x, val_y));
  result.history.best_val = result.history.val_loss[0];
  result.history.best_epoch = 0;
  MlpParams best = params;

  double lr = config.learning_rate;
  int stale_epochs = 0;
  const int batch_size = std::max(1, config.batch_size);
  std::vector<Eigen::Index> batch_order(static_cast<std::size_t>(n_train));
  std::iota(batch_order.begin(), batch_order.end(), Eigen::Index{0});

  bool stop = false;
  for (int epoch = 1; epoch <= config.max_epochs && !stop; ++epoch) {
    for (std::size_t i = 0; i + 1 < batch_order.size(); ++i) {
      std::swap(batch_order[i], batch_order[i + rng.uniform_index(batch_order.size() - i)]);
    }

    double epoch_loss = 0.0;
    Eigen::Index batches_seen = 0;
    for (Eigen::Index start = 0; start < n_train; start += batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(batch_size, n_train - start);
      Eigen::MatrixXd bx(b, train_x.cols());
      Eigen::MatrixXd by(b, train_y.cols());
      for (Eigen::Index i = 0; i < b; ++i) {
        bx.row(i) = train_x.row(batch_order[static_cast<std::size_t>(start + i)]);
        by.row(i) = train_y.row(batch_order[static_cast<std::size_t>(start + i)]);
      }

      const auto acts = forward_cached(params, bx);
      const Eigen::MatrixXd& raw = acts.back();
      Eigen::MatrixXd cotangent(b, arch.output_dim);
      double batch_loss = 0.0;
      for (Eigen::Index i = 0; i < b; ++i) {
        batch_loss += loss(raw.row(i).transpose(), by.row(i).transpose(), grad_buf);
        cotangent.row(i) = grad_buf.transpose() / static_cast<double>(b);
        if (!std::isfinite(batch_loss)) break;
      }
      batch_loss /= static_cast<double>(b);

      bool stepped = false;
      if (std::isfinite(batch_loss)) {
        const MlpGrads grads = backward_cached(params, acts, cotangent);
        snapshot.params = params;
        snapshot.adam = adam;
        stepped = adam_step(params, adam, grads, lr);
        if (stepped) {
          epoch_loss += batch_loss;
          ++batches_seen;
        }
      }
      if (!stepped) {
        // Restart protocol: back to the last state with verified finite
        // loss, then resume with a smaller learning rate.
        params = snapshot.params;
        adam = snapshot.adam;
        lr *= config.restart_shrink;
        result.history.restarts += 1;
        result.history.restart_epochs.push_back(epoch);
        if (result.history.restarts > config.max_restarts) {
          result.degraded = true;
          stop = true;
          break;
        }
      }
    }

    if (stop) break;
    result.history.train_loss.push_back(batches_seen > 0 ? epoch_loss / static_cast<double>(batches_seen)
                                                         : std::numeric_limits<double>::quiet_NaN());
    const double val = eval_set(params, val_x, val_y);
    result.history.val_loss.push_back(val);
    if (val < result.history.best_val) {
      result.history.best_val = val;
      result.history.best_epoch = epoch;
      best = params;
      stale_epochs = 0;
    } else {
      ++stale_epochs;
    }
    if (stale_epochs > config.patience) break;
  }

  result.history.final_learning_rate = lr;
  result.params = std::move(best);
  return result;
}

}  // namespace spar
