#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eloss/entropy_loss.hpp"
#include "eloss/matrix.hpp"

namespace eloss {

enum class Activation { kRelu, kTanh };

/// Input layer, hidden_count equal-width hidden layers, linear output head.
struct NetworkDims {
  int input_dim = 2;
  int hidden_width = 32;
  int hidden_count = 4;
  int output_dim = 2;
};

struct ToyNetwork {
  NetworkDims dims;
  Activation activation = Activation::kRelu;
  // hidden_count + 1 layers; layer l maps via x * weights[l] + biases[l].
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::RowVectorXd> biases;
};

/// Centered uniform init with half-width sqrt(6 / (fan_in + fan_out)), zero
/// biases. Deterministic per seed. hidden_count < 2 is refused: with fewer
/// layers there is no entropy delta to train against.
ToyNetwork init_network(const NetworkDims& dims, Activation activation,
                        std::uint64_t seed);

struct ForwardPass {
  std::vector<SampleMatrix> pre_activations;  // hidden layers, before act()
  std::vector<SampleMatrix> activations;      // hidden layers, after act()
  SampleMatrix logits;
};

ForwardPass forward(const ToyNetwork& net, const SampleMatrix& batch);

struct TaskLoss {
  double value = 0.0;
  Eigen::MatrixXd logit_gradient;
};

/// Mean per-sample cross-entropy of row-wise softmax. Labels index classes;
/// out-of-range labels raise InvalidDataError.
TaskLoss softmax_cross_entropy(const Eigen::MatrixXd& logits,
                               const Eigen::VectorXi& labels);

/// Mean over all entries of the squared difference.
TaskLoss mean_squared_error(const Eigen::MatrixXd& logits,
                            const Eigen::MatrixXd& targets);

enum class OptimizerKind { kSgd, kMomentum, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 0.05;
  double momentum = 0.9;  // momentum kind only
  double beta1 = 0.9;     // adam
  double beta2 = 0.999;   // adam
  double epsilon = 1e-8;  // adam
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::RowVectorXd> biases;
};

struct OptimizerState {
  OptimizerConfig config;
  // First and second moment accumulators; momentum uses m_* as velocity.
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::RowVectorXd> m_b, v_b;
  long step = 0;
};

OptimizerState init_optimizer(const OptimizerConfig& config,
                              const ToyNetwork& net);

/// One optimizer update over every parameter tensor. Increments step once.
void apply_update(OptimizerState& state, ToyNetwork& net,
                  const Gradients& grads);

// Single-tensor update rules. P/A are parameter/accumulator tensors of
// matching shape.
template <typename P, typename G>
void sgd_step(P& param, const G& grad, double lr) {
  param -= lr * grad;
}

template <typename P, typename A, typename G>
void momentum_step(P& param, A& velocity, const G& grad, double lr,
                   double mu) {
  velocity = mu * velocity + grad;
  param -= lr * velocity;
}

template <typename P, typename A, typename G>
void adam_step(P& param, A& m, A& v, const G& grad, double lr, double beta1,
               double beta2, double epsilon, long t) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + epsilon);
}

/// Where the entropy loss reads the hidden layers.
enum class MeasurePoint { kPostActivation, kPreActivation };

struct StepMetrics {
  double task_loss = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double entropy_total = 0.0;  // w_variance * l1 + w_direction * l2
  double total_loss = 0.0;     // task_loss + entropy_total
  // Per measured layer, from the training batch; empty when the entropy
  // loss is disabled.
  std::vector<double> layer_entropies;
  double sum_deltas = 0.0;  // signed sum of the entropy deltas
};

struct ObjectiveEval {
  StepMetrics metrics;
  Gradients gradients;
  Eigen::MatrixXd input_gradient;  // d(objective)/d(batch)
};

/// Value and parameter gradient of task loss + entropy loss, before any
/// optimizer update. The entropy term is skipped entirely when both weights
/// are zero. Entropy gradients enter each measured layer's activation (or
/// pre-activation) gradient and then flow through the full backward pass.
ObjectiveEval objective_with_gradients(
    const ToyNetwork& net, const SampleMatrix& batch,
    const Eigen::VectorXi& labels, const EntropyLossConfig& entropy,
    MeasurePoint measure = MeasurePoint::kPostActivation);
ObjectiveEval objective_with_gradients(
    const ToyNetwork& net, const SampleMatrix& batch,
    const SampleMatrix& targets, const EntropyLossConfig& entropy,
    MeasurePoint measure = MeasurePoint::kPostActivation);

StepMetrics train_step(ToyNetwork& net, OptimizerState& state,
                       const SampleMatrix& batch, const Eigen::VectorXi& labels,
                       const EntropyLossConfig& entropy,
                       MeasurePoint measure = MeasurePoint::kPostActivation);
StepMetrics train_step(ToyNetwork& net, OptimizerState& state,
                       const SampleMatrix& batch, const SampleMatrix& targets,
                       const EntropyLossConfig& entropy,
                       MeasurePoint measure = MeasurePoint::kPostActivation);

/// Reference task-only trainer with its own backward pass; the disabled-loss
/// regression guard diffs train_step against this.
StepMetrics plain_train_step(ToyNetwork& net, OptimizerState& state,
                             const SampleMatrix& batch,
                             const Eigen::VectorXi& labels);
StepMetrics plain_train_step(ToyNetwork& net, OptimizerState& state,
                             const SampleMatrix& batch,
                             const SampleMatrix& targets);

/// Fraction of rows whose argmax logit equals the label.
double evaluate_accuracy(const ToyNetwork& net, const SampleMatrix& inputs,
                         const Eigen::VectorXi& labels);

/// Mean squared error of the logits against the targets.
double evaluate_mse(const ToyNetwork& net, const SampleMatrix& inputs,
                    const SampleMatrix& targets);

/// One post-epoch evaluation row. Losses are means over the epoch's training
/// steps; entropy statistics (l1, l2, layer_entropies, sum_deltas) come from
/// a fixed probe batch so baseline and entropy-loss runs stay comparable.
struct EpochRecord {
  int epoch = 0;
  double task_loss = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double total_loss = 0.0;
  std::vector<double> layer_entropies;
  double sum_deltas = 0.0;
  double val_metric = 0.0;  // accuracy for classification, MSE for regression
  double wall_seconds = 0.0;
};

/// Pre-training evaluation of the same quantities.
struct InitialEval {
  double val_metric = 0.0;
  std::vector<double> layer_entropies;
  double l1 = 0.0;
  double l2 = 0.0;
  double sum_deltas = 0.0;
};

struct RunRecord {
  InitialEval initial;
  std::vector<EpochRecord> epochs;
};

}  // namespace eloss
