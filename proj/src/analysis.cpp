#include "eloss/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "eloss/errors.hpp"

namespace eloss {

PcaResult pca(const SampleMatrix& points, int c) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n < 2) {
    throw InvalidArgumentError("pca: need at least 2 samples");
  }
  if (c < 1 || c > std::min(n, d)) {
    throw InvalidArgumentError("pca: component count must lie in [1, min(n, d)]");
  }
  require_finite(points, "pca input");

  PcaResult out;
  out.mean = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - out.mean;
  if (centered.squaredNorm() == 0.0) {
    throw DegenerateDataError("pca: all samples identical, no variance");
  }

  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw DegenerateDataError("pca: eigendecomposition failed");
  }

  // Eigenvalues come back ascending; take the top c in descending order.
  out.components.resize(c, d);
  out.explained_variance.resize(c);
  for (int i = 0; i < c; ++i) {
    const Eigen::Index src = d - 1 - i;
    out.explained_variance(i) = std::max(0.0, solver.eigenvalues()(src));
    Eigen::VectorXd component = solver.eigenvectors().col(src);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(component(j)) > 1e-12) {
        if (component(j) < 0.0) component = -component;
        break;
      }
    }
    out.components.row(i) = component.transpose();
  }
  out.projected = centered * out.components.transpose();
  return out;
}

std::vector<double> smooth_curve(const std::vector<double>& values,
                                 int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidArgumentError("smooth_curve: window must be a positive odd integer");
  }
  if (static_cast<std::size_t>(window) > values.size()) {
    throw InvalidArgumentError("smooth_curve: window longer than the curve");
  }
  const std::size_t half = static_cast<std::size_t>(window / 2);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(values.size() - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

CurveFit log_regression_r2(const std::vector<double>& curve) {
  const std::size_t n = curve.size();
  if (n < 3) {
    throw InvalidArgumentError("log_regression_r2: need at least 3 points");
  }

  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    x_mean += std::log(static_cast<double>(t) + 1.0);
    y_mean += curve[t];
  }
  x_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0, sst = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dx = std::log(static_cast<double>(t) + 1.0) - x_mean;
    const double dy = curve[t] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    sst += dy * dy;
  }
  if (sst == 0.0) {
    throw DegenerateDataError("log_regression_r2: constant curve, SS_tot = 0");
  }

  CurveFit fit;
  fit.a = sxy / sxx;
  fit.b = y_mean - fit.a * x_mean;
  double ssr = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double predicted =
        fit.a * std::log(static_cast<double>(t) + 1.0) + fit.b;
    const double r = curve[t] - predicted;
    ssr += r * r;
  }
  fit.r_squared = 1.0 - ssr / sst;
  return fit;
}

double mean_accuracy(const std::vector<double>& curve) {
  if (curve.empty()) {
    throw InvalidArgumentError("mean_accuracy: empty curve");
  }
  double sum = 0.0;
  for (double v : curve) sum += v;
  return sum / static_cast<double>(curve.size());
}

LayerTrajectory layer_trajectory(const std::vector<SampleMatrix>& layers,
                                 int c) {
  if (layers.size() < 2) {
    throw InvalidArgumentError("layer_trajectory: need at least 2 layers");
  }
  const Eigen::Index d = layers.front().cols();
  Eigen::Index total_rows = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].cols() != d) {
      throw InvalidArgumentError(
          "layer_trajectory: layer " + std::to_string(l) +
          " width differs from layer 0");
    }
    total_rows += layers[l].rows();
  }

  SampleMatrix stacked(total_rows, d);
  Eigen::Index row = 0;
  for (const auto& layer : layers) {
    stacked.middleRows(row, layer.rows()) = layer;
    row += layer.rows();
  }

  LayerTrajectory out;
  out.basis = pca(stacked, c);
  out.projections.reserve(layers.size());
  out.centroids.reserve(layers.size());
  for (const auto& layer : layers) {
    Eigen::MatrixXd projected =
        (layer.rowwise() - out.basis.mean) * out.basis.components.transpose();
    out.centroids.push_back(projected.colwise().mean());
    out.projections.push_back(std::move(projected));
  }
  return out;
}

}  // namespace eloss
