#include "eloss/dataset.hpp"

#include <cmath>
#include <numbers>

#include "eloss/errors.hpp"
#include "eloss/rng.hpp"

namespace eloss {
namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kValStream = 2;

Dataset make_blobs(int n, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out;
  out.inputs.resize(n, 2);
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double cx = label == 0 ? -1.5 : 1.5;
    out.inputs(i, 0) = cx + noise * rng.normal();
    out.inputs(i, 1) = noise * rng.normal();
    out.labels(i) = label;
  }
  return out;
}

Dataset make_ring_vs_blob(int n, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out;
  out.inputs.resize(n, 2);
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    if (label == 0) {
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double radius = 2.0 + noise * rng.normal();
      out.inputs(i, 0) = radius * std::cos(angle);
      out.inputs(i, 1) = radius * std::sin(angle);
    } else {
      out.inputs(i, 0) = noise * rng.normal();
      out.inputs(i, 1) = noise * rng.normal();
    }
    out.labels(i) = label;
  }
  return out;
}

Dataset make_sine(int n, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out;
  out.regression = true;
  out.inputs.resize(n, 1);
  out.targets.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-std::numbers::pi, std::numbers::pi);
    out.inputs(i, 0) = x;
    out.targets(i, 0) = std::sin(x) + noise * rng.normal();
  }
  return out;
}

Dataset make_split(const DatasetSpec& spec, int n, std::uint64_t seed) {
  switch (spec.kind) {
    case DatasetKind::kGaussianBlobs:
      return make_blobs(n, spec.noise, seed);
    case DatasetKind::kRingVsBlob:
      return make_ring_vs_blob(n, spec.noise, seed);
    case DatasetKind::kRegressionSine:
      return make_sine(n, spec.noise, seed);
  }
  throw InvalidArgumentError("unknown dataset kind");
}

}  // namespace

bool is_regression(DatasetKind kind) {
  return kind == DatasetKind::kRegressionSine;
}

int dataset_input_dim(DatasetKind kind) {
  return kind == DatasetKind::kRegressionSine ? 1 : 2;
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kGaussianBlobs:
      return "gaussian_blobs";
    case DatasetKind::kRingVsBlob:
      return "ring_vs_blob";
    case DatasetKind::kRegressionSine:
      return "regression_sine";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "gaussian_blobs") return DatasetKind::kGaussianBlobs;
  if (name == "ring_vs_blob") return DatasetKind::kRingVsBlob;
  if (name == "regression_sine") return DatasetKind::kRegressionSine;
  throw InvalidArgumentError("unknown dataset kind: " + name);
}

TrainValSplit generate_dataset(const DatasetSpec& spec) {
  if (spec.n_train <= 0) throw InvalidArgumentError("n_train must be positive");
  if (spec.n_val < 0) throw InvalidArgumentError("n_val must be nonnegative");
  if (spec.noise < 0.0) throw InvalidArgumentError("noise must be nonnegative");
  TrainValSplit split;
  split.train = make_split(spec, spec.n_train, derive_seed(spec.seed, kTrainStream));
  split.val = make_split(spec, spec.n_val, derive_seed(spec.seed, kValStream));
  return split;
}

}  // namespace eloss
