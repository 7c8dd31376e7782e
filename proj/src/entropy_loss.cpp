#include "eloss/entropy_loss.hpp"

#include <numeric>
#include <string>
#include <utility>

#include "eloss/errors.hpp"

namespace eloss {
namespace {

std::vector<int> resolve_subset(const EntropyLossConfig& config,
                                std::size_t layer_count) {
  std::vector<int> subset = config.layer_subset;
  if (subset.empty()) {
    subset.resize(layer_count);
    std::iota(subset.begin(), subset.end(), 0);
  } else {
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (subset[i] < 0 || subset[i] >= static_cast<int>(layer_count)) {
        throw InvalidArgumentError("entropy loss: layer_subset index " +
                                   std::to_string(subset[i]) +
                                   " out of range for " +
                                   std::to_string(layer_count) + " layers");
      }
      if (i > 0 && subset[i] <= subset[i - 1]) {
        throw InvalidArgumentError(
            "entropy loss: layer_subset must be strictly increasing");
      }
    }
  }
  if (subset.size() < 2) {
    throw InvalidArgumentError(
        "entropy loss: need at least 2 participating layers");
  }
  return subset;
}

void validate_config(const EntropyLossConfig& config, bool require_weight) {
  if (config.k < 1) {
    throw InvalidArgumentError("entropy loss: k must be >= 1");
  }
  if (config.w_variance < 0.0 || config.w_direction < 0.0) {
    throw InvalidArgumentError("entropy loss: weights must be nonnegative");
  }
  if (require_weight && config.w_variance == 0.0 && config.w_direction == 0.0) {
    throw InvalidArgumentError(
        "entropy loss: both weights are zero; disable the loss instead");
  }
}

SampleMatrix oriented(const SampleMatrix& layer, SampleConvention convention) {
  if (convention == SampleConvention::kFeatureChannels) {
    return layer.transpose();
  }
  return layer;
}

// Re-throws estimator failures with the offending layer attached.
template <typename Fn>
auto at_layer(int layer_index, Fn&& fn) {
  const auto tag = [layer_index](const char* what) {
    return "layer " + std::to_string(layer_index) + ": " + what;
  };
  try {
    return fn();
  } catch (const DegenerateSampleError& e) {
    throw DegenerateSampleError(tag(e.what()));
  } catch (const InvalidDataError& e) {
    throw InvalidDataError(tag(e.what()));
  } catch (const InvalidArgumentError& e) {
    throw InvalidArgumentError(tag(e.what()));
  }
}

// d(total)/d(delta_n) for each delta.
std::vector<double> delta_coefficients(const std::vector<double>& deltas,
                                       double w_variance, double w_direction) {
  const double n = static_cast<double>(deltas.size());
  const double mean =
      std::accumulate(deltas.begin(), deltas.end(), 0.0) / n;
  std::vector<double> c(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    c[i] = w_variance * 2.0 * (deltas[i] - mean) / n -
           w_direction * 2.0 * deltas[i];
  }
  return c;
}

EntropyLossValue value_from_profile(EntropyProfile profile,
                                    const EntropyLossConfig& config) {
  EntropyLossValue out;
  out.l1 = variance_loss(profile.deltas);
  out.l2 = direction_loss(profile.deltas);
  out.total = config.w_variance * out.l1 + config.w_direction * out.l2;
  out.profile = std::move(profile);
  return out;
}

}  // namespace

double variance_loss(const std::vector<double>& deltas) {
  if (deltas.empty()) {
    throw InvalidArgumentError("variance_loss: empty delta list");
  }
  const double n = static_cast<double>(deltas.size());
  const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / n;
  double s = 0.0;
  for (double d : deltas) s += (d - mean) * (d - mean);
  return s / n;
}

double direction_loss(const std::vector<double>& deltas) {
  if (deltas.empty()) {
    throw InvalidArgumentError("direction_loss: empty delta list");
  }
  double s = 0.0;
  for (double d : deltas) s += d * d;
  return -s;
}

EntropyProfile activation_entropy_profile(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config) {
  validate_config(config, false);
  const std::vector<int> subset =
      resolve_subset(config, layer_activations.size());
  std::vector<double> entropies;
  entropies.reserve(subset.size());
  for (int layer : subset) {
    entropies.push_back(at_layer(layer, [&] {
      const SampleMatrix samples = oriented(
          layer_activations[static_cast<std::size_t>(layer)],
          config.sample_convention);
      return entropy_knn(samples, config.k, config.duplicate_policy).value;
    }));
  }
  return layer_deltas(entropies);
}

EntropyLossValue combined_entropy_loss(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config) {
  validate_config(config, true);
  return value_from_profile(
      activation_entropy_profile(layer_activations, config), config);
}

EntropyLossGradients entropy_loss_with_gradients(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config) {
  validate_config(config, true);
  const std::vector<int> subset =
      resolve_subset(config, layer_activations.size());

  std::vector<double> entropies(subset.size());
  std::vector<Eigen::MatrixXd> point_gradients(subset.size());
  for (std::size_t s = 0; s < subset.size(); ++s) {
    const int layer = subset[s];
    at_layer(layer, [&] {
      // Applying the duplicate policy first keeps the value identical to the
      // gradient-free path; under jitter the gradient is taken at the
      // jittered samples (off by O(sigma) from the caller's activations).
      const SampleMatrix samples = apply_duplicate_policy(
          oriented(layer_activations[static_cast<std::size_t>(layer)],
                   config.sample_convention),
          config.duplicate_policy);
      auto eg = detail::knn_entropy_and_gradient(samples, config.k, true);
      entropies[s] = eg.entropy;
      point_gradients[s] = std::move(eg.gradient);
      return 0;
    });
  }

  EntropyLossGradients out;
  out.value = value_from_profile(layer_deltas(entropies), config);

  const std::vector<double> c = delta_coefficients(
      out.value.profile.deltas, config.w_variance, config.w_direction);

  out.layer_gradients.reserve(layer_activations.size());
  for (const SampleMatrix& layer : layer_activations) {
    out.layer_gradients.push_back(
        Eigen::MatrixXd::Zero(layer.rows(), layer.cols()));
  }
  for (std::size_t s = 0; s < subset.size(); ++s) {
    double coeff = 0.0;
    if (s >= 1) coeff += c[s - 1];
    if (s + 1 < subset.size()) coeff -= c[s];
    if (coeff == 0.0) continue;
    const Eigen::MatrixXd g = coeff * point_gradients[s];
    auto& slot = out.layer_gradients[static_cast<std::size_t>(subset[s])];
    if (config.sample_convention == SampleConvention::kFeatureChannels) {
      slot = g.transpose();
    } else {
      slot = g;
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> entropy_loss_gradients(
    const std::vector<SampleMatrix>& layer_activations,
    const EntropyLossConfig& config) {
  return entropy_loss_with_gradients(layer_activations, config).layer_gradients;
}

}  // namespace eloss
