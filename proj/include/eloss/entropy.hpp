#pragma once

#include <cstdint>
#include <vector>

#include "eloss/matrix.hpp"

namespace eloss {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// psi(x) for x > 0, absolute error <= 1e-10 for x >= 1.
/// Throws InvalidArgumentError for x <= 0 (poles are out of scope).
double digamma(double x);

/// log of the d-dimensional unit ball volume, (d/2)*log(pi) - lgamma(d/2 + 1).
double unit_ball_log_volume(int d);

/// V_d = pi^{d/2} / Gamma(d/2 + 1). Throws InvalidArgumentError for d < 1.
double unit_ball_volume(int d);

/// What to do when the sample matrix contains exactly duplicated rows.
/// reject: throw DegenerateSampleError. jitter: add centered uniform noise
/// of half-width sigma to every entry, only when duplicates are present.
/// sigma <= 0 selects the default 1e-10 * max absolute entry. The noise
/// stream is seeded from `seed` mixed with a content hash of the input, so
/// a given (matrix, policy) pair always jitters identically.
struct DuplicatePolicy {
  enum class Kind { kReject, kJitter };

  Kind kind = Kind::kReject;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  static DuplicatePolicy reject() { return {}; }
  static DuplicatePolicy jitter(double sigma = 0.0, std::uint64_t seed = 0) {
    return {Kind::kJitter, sigma, seed};
  }
};

/// Returns the input unchanged when it has no duplicate rows; otherwise
/// applies the policy (throws under reject, returns a jittered copy under
/// jitter).
SampleMatrix apply_duplicate_policy(const SampleMatrix& points,
                                    const DuplicatePolicy& policy);

struct EntropyEstimate {
  double value = 0.0;  // nats
  Eigen::Index n = 0;
  int k = 0;
  Eigen::Index d = 0;
};

/// Nearest-neighbor estimate
///   H = log(n-1) + log V_d + gamma + (d/n) * sum_i log r(x_i)
/// where r(x_i) is the distance from x_i to its nearest other sample.
EntropyEstimate entropy_nn(
    const SampleMatrix& points,
    const DuplicatePolicy& policy = DuplicatePolicy::reject());

/// k-th neighbor generalization
///   H = -psi(k) + psi(n) + log V_d + (d/n) * sum_i log r_k(x_i).
EntropyEstimate entropy_knn(
    const SampleMatrix& points, int k,
    const DuplicatePolicy& policy = DuplicatePolicy::reject());

/// d(entropy_knn)/d(points) with the neighbor assignment held fixed: for
/// each row j with k-th neighbor m, (d/n)*(x_j - x_m)/r^2 is added to row j
/// and subtracted from row m. Rows sum to zero. Duplicate rows throw
/// DegenerateSampleError; jitter is not offered here because a jittered
/// gradient would not correspond to the caller's points.
Eigen::MatrixXd entropy_knn_gradient(const SampleMatrix& points, int k);

struct EntropyProfile {
  std::vector<double> layer_entropies;  // H_1..H_N, nats
  std::vector<double> deltas;           // deltas[i] = H_{i+2} - H_{i+1}
};

/// Pairs the given per-layer entropies with their successive differences.
/// Needs at least two entries.
EntropyProfile layer_deltas(const std::vector<double>& layer_entropies);

/// True when every point's neighbor ordering around order k is separated by
/// more than `margin`: the gaps (k-1, k) and (k, k+1) of the sorted distance
/// list both exceed it, and the k-th distance itself does. Finite-difference
/// gradient checks only make sense on configurations that pass this.
bool tie_free(const SampleMatrix& points, int k, double margin);

namespace detail {

struct EntropyWithGradient {
  double entropy = 0.0;
  Eigen::MatrixXd gradient;  // n x d, empty unless requested
};

/// One neighbor query serving both the estimate and its gradient. Rejects
/// duplicates unconditionally.
EntropyWithGradient knn_entropy_and_gradient(const SampleMatrix& points, int k,
                                             bool want_gradient);

}  // namespace detail

}  // namespace eloss
