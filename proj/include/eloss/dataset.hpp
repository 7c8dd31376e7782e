#pragma once

#include <cstdint>
#include <string>

#include "eloss/matrix.hpp"

#include <Eigen/Dense>

namespace eloss {

enum class DatasetKind { kGaussianBlobs, kRingVsBlob, kRegressionSine };

bool is_regression(DatasetKind kind);
int dataset_input_dim(DatasetKind kind);
std::string to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussianBlobs;
  int n_train = 512;
  int n_val = 256;
  double noise = 0.5;
  std::uint64_t seed = 0;
};

struct Dataset {
  SampleMatrix inputs;
  Eigen::VectorXi labels;  // classification kinds; empty otherwise
  SampleMatrix targets;    // regression kind, n x 1; empty otherwise
  bool regression = false;

  Eigen::Index size() const { return inputs.rows(); }
};

struct TrainValSplit {
  Dataset train;
  Dataset val;
};

/// Deterministic synthetic data. gaussian_blobs: two classes at (-1.5, 0)
/// and (+1.5, 0) with isotropic noise. ring_vs_blob: class 0 on a radius-2
/// ring, class 1 a blob at the origin. regression_sine: 1-D x in [-pi, pi],
/// target sin(x) plus noise. Classes alternate by row parity, so any prefix
/// stays balanced. Train and validation draw from separate seed streams.
TrainValSplit generate_dataset(const DatasetSpec& spec);

}  // namespace eloss
