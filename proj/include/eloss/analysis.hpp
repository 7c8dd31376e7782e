#pragma once

#include <vector>

#include "eloss/matrix.hpp"

namespace eloss {

struct PcaResult {
  Eigen::MatrixXd components;          // c x d, orthonormal rows
  Eigen::VectorXd explained_variance;  // descending, nonnegative
  Eigen::MatrixXd projected;           // n x c
  Eigen::RowVectorXd mean;             // subtracted before projection
};

/// Principal components of the row samples via eigendecomposition of the
/// (n-1)-normalized covariance. Deterministic sign: each component's first
/// coordinate above 1e-12 in magnitude is positive. All-identical rows have
/// no principal directions and raise DegenerateDataError.
PcaResult pca(const SampleMatrix& points, int c);

/// Centered moving average with truncated boundary windows: each output is
/// the mean of the values whose index lies within window/2 of it. Window
/// must be odd and no longer than the curve.
std::vector<double> smooth_curve(const std::vector<double>& values,
                                 int window = 5);

struct CurveFit {
  double a = 0.0;  // slope on log(t+1)
  double b = 0.0;  // intercept
  double r_squared = 0.0;
};

/// Least squares fit of y_t = a*log(t+1) + b over t = 0..T-1 and its
/// coefficient of determination. A constant curve has SS_tot = 0 and raises
/// DegenerateDataError.
CurveFit log_regression_r2(const std::vector<double>& curve);

double mean_accuracy(const std::vector<double>& curve);

struct LayerTrajectory {
  PcaResult basis;  // fit on the row-concatenation of every layer
  std::vector<Eigen::MatrixXd> projections;
  std::vector<Eigen::RowVectorXd> centroids;
};

/// Projects each layer's activations into one shared PCA basis so the
/// layer-to-layer drift is comparable across layers.
LayerTrajectory layer_trajectory(const std::vector<SampleMatrix>& layers,
                                 int c = 2);

}  // namespace eloss
