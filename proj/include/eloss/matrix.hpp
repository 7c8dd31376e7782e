#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace eloss {

/// n x d matrix whose rows are i.i.d. draws of a continuous random variable.
using SampleMatrix = Eigen::MatrixXd;

/// Throws InvalidDataError if any entry is NaN or infinite.
void require_finite(const SampleMatrix& m, const char* what);

/// Exact (bitwise) duplicate-row test.
bool has_duplicate_rows(const SampleMatrix& m);

/// Largest absolute entry; 1.0 for the all-zero matrix. Used to scale jitter.
double data_scale(const SampleMatrix& m);

/// FNV-1a over the matrix bytes, row-major order. Stable for identical inputs.
std::uint64_t content_hash(const SampleMatrix& m);

}  // namespace eloss
