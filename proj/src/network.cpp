#include "eloss/network.hpp"

#include <numeric>
#include <string>

#include "eloss/errors.hpp"
#include "eloss/rng.hpp"

namespace eloss {
namespace {

void validate_dims(const NetworkDims& dims) {
  if (dims.input_dim < 1 || dims.hidden_width < 1 || dims.output_dim < 1) {
    throw InvalidArgumentError("network dims must be positive");
  }
  if (dims.hidden_count < 2) {
    throw InvalidArgumentError(
        "hidden_count must be >= 2; a single hidden layer has no entropy delta");
  }
}

SampleMatrix activate(const SampleMatrix& z, Activation activation) {
  if (activation == Activation::kRelu) return z.cwiseMax(0.0);
  return z.array().tanh();
}

// d(activation)/dz expressed through z and a = activation(z).
SampleMatrix activation_derivative(const SampleMatrix& z, const SampleMatrix& a,
                                   Activation activation) {
  if (activation == Activation::kRelu) {
    return (z.array() > 0.0).cast<double>().matrix();
  }
  return (1.0 - a.array().square()).matrix();
}

void check_batch(const ToyNetwork& net, const SampleMatrix& batch) {
  if (batch.rows() < 1) {
    throw InvalidArgumentError("forward: empty batch");
  }
  if (batch.cols() != net.dims.input_dim) {
    throw InvalidArgumentError(
        "forward: batch has " + std::to_string(batch.cols()) +
        " columns, network expects " + std::to_string(net.dims.input_dim));
  }
  require_finite(batch, "network input");
}

Gradients zero_gradients(const ToyNetwork& net) {
  Gradients g;
  g.weights.reserve(net.weights.size());
  g.biases.reserve(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights.push_back(
        Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.push_back(Eigen::RowVectorXd::Zero(net.biases[l].cols()));
  }
  return g;
}

// Backward pass from d(loss)/d(logits), with optional per-layer injections
// added to the hidden activation (or pre-activation) gradients. Fills
// input_gradient with d(loss)/d(batch) when non-null.
Gradients backward(const ToyNetwork& net, const SampleMatrix& batch,
                   const ForwardPass& fp, const Eigen::MatrixXd& dlogits,
                   const std::vector<Eigen::MatrixXd>* injections,
                   MeasurePoint measure,
                   Eigen::MatrixXd* input_gradient = nullptr) {
  const int hidden = net.dims.hidden_count;
  Gradients g = zero_gradients(net);

  const SampleMatrix& last_hidden =
      fp.activations[static_cast<std::size_t>(hidden - 1)];
  g.weights[static_cast<std::size_t>(hidden)] =
      last_hidden.transpose() * dlogits;
  g.biases[static_cast<std::size_t>(hidden)] = dlogits.colwise().sum();
  Eigen::MatrixXd da =
      dlogits * net.weights[static_cast<std::size_t>(hidden)].transpose();

  for (int l = hidden - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    if (injections && measure == MeasurePoint::kPostActivation) {
      da += (*injections)[li];
    }
    Eigen::MatrixXd dz = da.cwiseProduct(
        activation_derivative(fp.pre_activations[li], fp.activations[li],
                              net.activation));
    if (injections && measure == MeasurePoint::kPreActivation) {
      dz += (*injections)[li];
    }
    const SampleMatrix& below = l == 0 ? batch : fp.activations[li - 1];
    g.weights[li] = below.transpose() * dz;
    g.biases[li] = dz.colwise().sum();
    if (l > 0 || input_gradient) da = dz * net.weights[li].transpose();
  }
  if (input_gradient) *input_gradient = std::move(da);
  return g;
}

template <typename TaskFn>
ObjectiveEval objective_impl(const ToyNetwork& net, const SampleMatrix& batch,
                             TaskFn&& task_fn,
                             const EntropyLossConfig& entropy,
                             MeasurePoint measure) {
  const ForwardPass fp = forward(net, batch);
  const TaskLoss task = task_fn(fp.logits);

  ObjectiveEval out;
  out.metrics.task_loss = task.value;

  const bool enabled = entropy.w_variance > 0.0 || entropy.w_direction > 0.0;
  if (!enabled) {
    out.metrics.total_loss = task.value;
    out.gradients = backward(net, batch, fp, task.logit_gradient, nullptr,
                             measure, &out.input_gradient);
    return out;
  }

  const std::vector<SampleMatrix>& measured =
      measure == MeasurePoint::kPostActivation ? fp.activations
                                               : fp.pre_activations;
  const EntropyLossGradients el = entropy_loss_with_gradients(measured, entropy);

  out.metrics.l1 = el.value.l1;
  out.metrics.l2 = el.value.l2;
  out.metrics.entropy_total = el.value.total;
  out.metrics.total_loss = task.value + el.value.total;
  out.metrics.layer_entropies = el.value.profile.layer_entropies;
  out.metrics.sum_deltas =
      std::accumulate(el.value.profile.deltas.begin(),
                      el.value.profile.deltas.end(), 0.0);
  out.gradients = backward(net, batch, fp, task.logit_gradient,
                           &el.layer_gradients, measure, &out.input_gradient);
  return out;
}

// Deliberately re-derives the backward pass instead of calling backward():
// the disabled-loss regression guard diffs train_step against this, so the
// two must not share the code being guarded.
template <typename TaskFn>
StepMetrics plain_step_impl(ToyNetwork& net, OptimizerState& state,
                            const SampleMatrix& batch, TaskFn&& task_fn) {
  const ForwardPass fp = forward(net, batch);
  const TaskLoss task = task_fn(fp.logits);

  const int hidden = net.dims.hidden_count;
  Gradients g = zero_gradients(net);
  const auto out = static_cast<std::size_t>(hidden);
  g.weights[out] =
      fp.activations[out - 1].transpose() * task.logit_gradient;
  g.biases[out] = task.logit_gradient.colwise().sum();
  Eigen::MatrixXd da = task.logit_gradient * net.weights[out].transpose();
  for (int l = hidden - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    Eigen::MatrixXd dz = da.cwiseProduct(
        activation_derivative(fp.pre_activations[li], fp.activations[li],
                              net.activation));
    const SampleMatrix& below = l == 0 ? batch : fp.activations[li - 1];
    g.weights[li] = below.transpose() * dz;
    g.biases[li] = dz.colwise().sum();
    if (l > 0) da = dz * net.weights[li].transpose();
  }

  apply_update(state, net, g);
  StepMetrics metrics;
  metrics.task_loss = task.value;
  metrics.total_loss = task.value;
  return metrics;
}

void check_shapes(const OptimizerState& state, const ToyNetwork& net,
                  const Gradients& grads) {
  if (grads.weights.size() != net.weights.size() ||
      grads.biases.size() != net.biases.size() ||
      state.m_w.size() != net.weights.size()) {
    throw InvalidArgumentError("optimizer: layer count mismatch");
  }
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    if (grads.weights[l].rows() != net.weights[l].rows() ||
        grads.weights[l].cols() != net.weights[l].cols() ||
        grads.biases[l].cols() != net.biases[l].cols()) {
      throw InvalidArgumentError("optimizer: gradient shape mismatch at layer " +
                                 std::to_string(l));
    }
  }
}

}  // namespace

ToyNetwork init_network(const NetworkDims& dims, Activation activation,
                        std::uint64_t seed) {
  validate_dims(dims);
  ToyNetwork net;
  net.dims = dims;
  net.activation = activation;

  std::vector<int> sizes;
  sizes.push_back(dims.input_dim);
  for (int l = 0; l < dims.hidden_count; ++l) sizes.push_back(dims.hidden_width);
  sizes.push_back(dims.output_dim);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(fan_in, fan_out);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = rng.uniform(-limit, limit);
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::RowVectorXd::Zero(fan_out));
  }
  return net;
}

ForwardPass forward(const ToyNetwork& net, const SampleMatrix& batch) {
  check_batch(net, batch);
  ForwardPass fp;
  fp.pre_activations.reserve(static_cast<std::size_t>(net.dims.hidden_count));
  fp.activations.reserve(static_cast<std::size_t>(net.dims.hidden_count));

  const SampleMatrix* below = &batch;
  for (int l = 0; l < net.dims.hidden_count; ++l) {
    const auto li = static_cast<std::size_t>(l);
    SampleMatrix z = (*below * net.weights[li]).rowwise() + net.biases[li];
    fp.activations.push_back(activate(z, net.activation));
    fp.pre_activations.push_back(std::move(z));
    below = &fp.activations.back();
  }
  const auto out = static_cast<std::size_t>(net.dims.hidden_count);
  fp.logits = (*below * net.weights[out]).rowwise() + net.biases[out];
  return fp;
}

TaskLoss softmax_cross_entropy(const Eigen::MatrixXd& logits,
                               const Eigen::VectorXi& labels) {
  if (labels.size() != logits.rows()) {
    throw InvalidArgumentError("cross entropy: one label per logit row required");
  }
  const Eigen::Index n = logits.rows();
  const Eigen::Index classes = logits.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels(i) < 0 || labels(i) >= classes) {
      throw InvalidDataError("cross entropy: label " +
                             std::to_string(labels(i)) + " out of range at row " +
                             std::to_string(i));
    }
  }

  TaskLoss out;
  out.logit_gradient.resize(n, classes);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd exps = (logits.row(i).array() - m).exp();
    const double z = exps.sum();
    total += std::log(z) - (logits(i, labels(i)) - m);
    out.logit_gradient.row(i) = exps / z;
    out.logit_gradient(i, labels(i)) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.value = total * inv_n;
  out.logit_gradient *= inv_n;
  return out;
}

TaskLoss mean_squared_error(const Eigen::MatrixXd& logits,
                            const Eigen::MatrixXd& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw InvalidArgumentError("mse: logits and targets must share shape");
  }
  const double count =
      static_cast<double>(logits.rows()) * static_cast<double>(logits.cols());
  TaskLoss out;
  const Eigen::MatrixXd diff = logits - targets;
  out.value = diff.squaredNorm() / count;
  out.logit_gradient = (2.0 / count) * diff;
  return out;
}

OptimizerState init_optimizer(const OptimizerConfig& config,
                              const ToyNetwork& net) {
  if (config.learning_rate < 0.0) {
    throw InvalidArgumentError("optimizer: negative learning rate");
  }
  OptimizerState state;
  state.config = config;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    state.m_w.push_back(
        Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    state.v_w.push_back(
        Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    state.m_b.push_back(Eigen::RowVectorXd::Zero(net.biases[l].cols()));
    state.v_b.push_back(Eigen::RowVectorXd::Zero(net.biases[l].cols()));
  }
  return state;
}

void apply_update(OptimizerState& state, ToyNetwork& net,
                  const Gradients& grads) {
  check_shapes(state, net, grads);
  const OptimizerConfig& c = state.config;
  ++state.step;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    switch (c.kind) {
      case OptimizerKind::kSgd:
        sgd_step(net.weights[l], grads.weights[l], c.learning_rate);
        sgd_step(net.biases[l], grads.biases[l], c.learning_rate);
        break;
      case OptimizerKind::kMomentum:
        momentum_step(net.weights[l], state.m_w[l], grads.weights[l],
                      c.learning_rate, c.momentum);
        momentum_step(net.biases[l], state.m_b[l], grads.biases[l],
                      c.learning_rate, c.momentum);
        break;
      case OptimizerKind::kAdam:
        adam_step(net.weights[l], state.m_w[l], state.v_w[l], grads.weights[l],
                  c.learning_rate, c.beta1, c.beta2, c.epsilon, state.step);
        adam_step(net.biases[l], state.m_b[l], state.v_b[l], grads.biases[l],
                  c.learning_rate, c.beta1, c.beta2, c.epsilon, state.step);
        break;
    }
  }
}

ObjectiveEval objective_with_gradients(const ToyNetwork& net,
                                       const SampleMatrix& batch,
                                       const Eigen::VectorXi& labels,
                                       const EntropyLossConfig& entropy,
                                       MeasurePoint measure) {
  return objective_impl(
      net, batch,
      [&](const Eigen::MatrixXd& logits) {
        return softmax_cross_entropy(logits, labels);
      },
      entropy, measure);
}

ObjectiveEval objective_with_gradients(const ToyNetwork& net,
                                       const SampleMatrix& batch,
                                       const SampleMatrix& targets,
                                       const EntropyLossConfig& entropy,
                                       MeasurePoint measure) {
  return objective_impl(
      net, batch,
      [&](const Eigen::MatrixXd& logits) {
        return mean_squared_error(logits, targets);
      },
      entropy, measure);
}

StepMetrics train_step(ToyNetwork& net, OptimizerState& state,
                       const SampleMatrix& batch, const Eigen::VectorXi& labels,
                       const EntropyLossConfig& entropy, MeasurePoint measure) {
  ObjectiveEval eval =
      objective_with_gradients(net, batch, labels, entropy, measure);
  apply_update(state, net, eval.gradients);
  return std::move(eval.metrics);
}

StepMetrics train_step(ToyNetwork& net, OptimizerState& state,
                       const SampleMatrix& batch, const SampleMatrix& targets,
                       const EntropyLossConfig& entropy, MeasurePoint measure) {
  ObjectiveEval eval =
      objective_with_gradients(net, batch, targets, entropy, measure);
  apply_update(state, net, eval.gradients);
  return std::move(eval.metrics);
}

StepMetrics plain_train_step(ToyNetwork& net, OptimizerState& state,
                             const SampleMatrix& batch,
                             const Eigen::VectorXi& labels) {
  return plain_step_impl(net, state, batch,
                         [&](const Eigen::MatrixXd& logits) {
                           return softmax_cross_entropy(logits, labels);
                         });
}

StepMetrics plain_train_step(ToyNetwork& net, OptimizerState& state,
                             const SampleMatrix& batch,
                             const SampleMatrix& targets) {
  return plain_step_impl(net, state, batch,
                         [&](const Eigen::MatrixXd& logits) {
                           return mean_squared_error(logits, targets);
                         });
}

double evaluate_accuracy(const ToyNetwork& net, const SampleMatrix& inputs,
                         const Eigen::VectorXi& labels) {
  if (inputs.rows() == 0) {
    throw InvalidArgumentError("evaluate: empty dataset");
  }
  if (labels.size() != inputs.rows()) {
    throw InvalidArgumentError("evaluate: one label per input row required");
  }
  const ForwardPass fp = forward(net, inputs);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    Eigen::Index argmax = 0;
    fp.logits.row(i).maxCoeff(&argmax);
    if (static_cast<int>(argmax) == labels(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.rows());
}

double evaluate_mse(const ToyNetwork& net, const SampleMatrix& inputs,
                    const SampleMatrix& targets) {
  if (inputs.rows() == 0) {
    throw InvalidArgumentError("evaluate: empty dataset");
  }
  const ForwardPass fp = forward(net, inputs);
  return mean_squared_error(fp.logits, targets).value;
}

}  // namespace eloss
