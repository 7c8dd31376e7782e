#pragma once

#include <Eigen/Dense>

#include "eloss/matrix.hpp"

namespace eloss {

/// Row i holds the Euclidean distances from point i to its 1st..k-th nearest
/// neighbors (self excluded), ascending, and the matching point indices.
/// Equal distances are ordered by ascending point index.
struct NeighborDistances {
  Eigen::MatrixXd dist;  // n x k
  Eigen::MatrixXi idx;   // n x k

  Eigen::Index n() const { return dist.rows(); }
  int k() const { return static_cast<int>(dist.cols()); }
};

/// Exact k-nearest-neighbor query over all rows of `points`, accelerated by a
/// kd-tree. Bit-identical to brute_force_knn for every input.
NeighborDistances knn_distances(const SampleMatrix& points, int k);

/// O(n^2) all-pairs reference. Canonical output; ties broken by lower index.
NeighborDistances brute_force_knn(const SampleMatrix& points, int k);

}  // namespace eloss
