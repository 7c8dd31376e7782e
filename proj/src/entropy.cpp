#include "eloss/entropy.hpp"

#include <cmath>
#include <string>

#include "eloss/errors.hpp"
#include "eloss/neighbor_search.hpp"
#include "eloss/rng.hpp"

namespace eloss {
namespace {

// Sum of log k-th neighbor distances in row order. Zero distance can only
// arise from duplicate rows, which callers screen out first; kept as a guard.
double sum_log_kth_distance(const NeighborDistances& nd) {
  const int last = nd.k() - 1;
  double s = 0.0;
  for (Eigen::Index i = 0; i < nd.n(); ++i) {
    const double r = nd.dist(i, last);
    if (r <= 0.0) {
      throw DegenerateSampleError("zero neighbor distance at row " +
                                  std::to_string(i));
    }
    s += std::log(r);
  }
  return s;
}

double knn_entropy_from(const NeighborDistances& nd, Eigen::Index d) {
  const double n = static_cast<double>(nd.n());
  const double dim = static_cast<double>(d);
  return -digamma(nd.k()) + digamma(n) + unit_ball_log_volume(static_cast<int>(d)) +
         (dim / n) * sum_log_kth_distance(nd);
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) {
    throw InvalidArgumentError("digamma: argument must be positive");
  }
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series through x^-12; error < 2e-12 once x >= 6.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0))))));
  return result + std::log(x) - 0.5 * inv - tail;
}

double unit_ball_log_volume(int d) {
  if (d < 1) {
    throw InvalidArgumentError("unit_ball_volume: dimension must be >= 1");
  }
  const double half_d = 0.5 * static_cast<double>(d);
  return half_d * std::log(M_PI) - std::lgamma(half_d + 1.0);
}

double unit_ball_volume(int d) { return std::exp(unit_ball_log_volume(d)); }

SampleMatrix apply_duplicate_policy(const SampleMatrix& points,
                                    const DuplicatePolicy& policy) {
  if (!has_duplicate_rows(points)) return points;
  if (policy.kind == DuplicatePolicy::Kind::kReject) {
    throw DegenerateSampleError(
        "duplicate sample rows; deduplicate the input or use a jitter policy");
  }
  double sigma = policy.sigma;
  if (sigma <= 0.0) sigma = 1e-10 * data_scale(points);
  Rng rng(policy.seed ^ content_hash(points));
  SampleMatrix out = points;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) += rng.uniform(-sigma, sigma);
    }
  }
  if (has_duplicate_rows(out)) {
    throw DegenerateSampleError("jitter failed to separate duplicate rows");
  }
  return out;
}

EntropyEstimate entropy_nn(const SampleMatrix& points,
                           const DuplicatePolicy& policy) {
  require_finite(points, "entropy input");
  const SampleMatrix pts = apply_duplicate_policy(points, policy);
  const NeighborDistances nd = knn_distances(pts, 1);
  const double n = static_cast<double>(pts.rows());
  const double d = static_cast<double>(pts.cols());
  const double value = std::log(n - 1.0) +
                       unit_ball_log_volume(static_cast<int>(pts.cols())) +
                       kEulerGamma + (d / n) * sum_log_kth_distance(nd);
  return {value, pts.rows(), 1, pts.cols()};
}

EntropyEstimate entropy_knn(const SampleMatrix& points, int k,
                            const DuplicatePolicy& policy) {
  require_finite(points, "entropy input");
  const SampleMatrix pts = apply_duplicate_policy(points, policy);
  const NeighborDistances nd = knn_distances(pts, k);
  return {knn_entropy_from(nd, pts.cols()), pts.rows(), k, pts.cols()};
}

Eigen::MatrixXd entropy_knn_gradient(const SampleMatrix& points, int k) {
  return detail::knn_entropy_and_gradient(points, k, true).gradient;
}

EntropyProfile layer_deltas(const std::vector<double>& layer_entropies) {
  if (layer_entropies.size() < 2) {
    throw InvalidArgumentError("layer_deltas: need at least 2 layer entropies");
  }
  EntropyProfile profile;
  profile.layer_entropies = layer_entropies;
  profile.deltas.resize(layer_entropies.size() - 1);
  for (std::size_t i = 0; i + 1 < layer_entropies.size(); ++i) {
    profile.deltas[i] = layer_entropies[i + 1] - layer_entropies[i];
  }
  return profile;
}

bool tie_free(const SampleMatrix& points, int k, double margin) {
  if (k + 1 >= points.rows()) return false;
  const NeighborDistances nd = knn_distances(points, k + 1);
  for (Eigen::Index i = 0; i < nd.n(); ++i) {
    const double rk = nd.dist(i, k - 1);
    if (rk <= margin) return false;
    if (nd.dist(i, k) - rk <= margin) return false;
    if (k > 1 && rk - nd.dist(i, k - 2) <= margin) return false;
  }
  return true;
}

namespace detail {

EntropyWithGradient knn_entropy_and_gradient(const SampleMatrix& points, int k,
                                             bool want_gradient) {
  require_finite(points, "entropy input");
  if (has_duplicate_rows(points)) {
    throw DegenerateSampleError("duplicate sample rows: entropy gradient undefined");
  }
  const NeighborDistances nd = knn_distances(points, k);
  EntropyWithGradient out;
  out.entropy = knn_entropy_from(nd, points.cols());
  if (!want_gradient) return out;

  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  const double scale = static_cast<double>(d) / static_cast<double>(n);
  out.gradient = Eigen::MatrixXd::Zero(n, d);
  const int last = k - 1;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int m = nd.idx(j, last);
    const double r = nd.dist(j, last);
    const Eigen::RowVectorXd c =
        (scale / (r * r)) * (points.row(j) - points.row(m));
    out.gradient.row(j) += c;
    out.gradient.row(m) -= c;
  }
  return out;
}

}  // namespace detail

}  // namespace eloss
