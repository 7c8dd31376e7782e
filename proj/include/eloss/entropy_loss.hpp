#pragma once

#include <vector>

#include "eloss/entropy.hpp"
#include "eloss/matrix.hpp"

namespace eloss {

/// How an activation matrix maps to entropy samples. batch_rows feeds the
/// matrix as-is (each batch element is one sample of dimension = layer
/// width); feature_channels transposes first, treating each channel as a
/// sample over the batch.
enum class SampleConvention { kBatchRows, kFeatureChannels };

struct EntropyLossConfig {
  int k = 1;
  double w_variance = 1.0;
  double w_direction = 0.1;
  SampleConvention sample_convention = SampleConvention::kBatchRows;
  DuplicatePolicy duplicate_policy = DuplicatePolicy::reject();
  // Indices of the layers the loss reads, strictly increasing; empty means
  // all of them.
  std::vector<int> layer_subset;
};

struct EntropyLossValue {
  double l1 = 0.0;     // variance of the entropy deltas, >= 0
  double l2 = 0.0;     // negated sum of squared deltas, <= 0
  double total = 0.0;  // w_variance * l1 + w_direction * l2
  EntropyProfile profile;
};

/// (sum_n (deltas[n] - mean)^2) / N over the list itself.
double variance_loss(const std::vector<double>& deltas);

/// -sum_n deltas[n]^2.
double direction_loss(const std::vector<double>& deltas);

/// Per-layer entropies and their deltas for the selected layers, under the
/// configured convention and duplicate policy. Weights are ignored here.
EntropyProfile activation_entropy_profile(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config);

/// Weighted combination of the two delta losses over the layer profile.
EntropyLossValue combined_entropy_loss(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config);

struct EntropyLossGradients {
  EntropyLossValue value;
  // One matrix per input layer, shaped like it; zero for layers outside the
  // configured subset.
  std::vector<Eigen::MatrixXd> layer_gradients;
};

/// Loss value plus d(total)/d(activations) for every layer, sharing one
/// neighbor query per layer. The per-delta coefficients are
///   c_n = w_variance * 2*(delta_n - mean)/N - w_direction * 2*delta_n
/// and layer s in the selected order receives
///   (c_{s-1} - c_s) * d(H_s)/d(activations)
/// with out-of-range c terms dropped. Duplicate rows follow the configured
/// policy: reject throws, jitter evaluates value and gradient at the
/// jittered samples (within O(sigma) of the caller's activations).
EntropyLossGradients entropy_loss_with_gradients(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config);

/// Just the per-layer gradient matrices.
std::vector<Eigen::MatrixXd> entropy_loss_gradients(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config);

}  // namespace eloss
