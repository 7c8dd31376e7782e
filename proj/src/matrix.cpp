#include "eloss/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "eloss/errors.hpp"

namespace eloss {

void require_finite(const SampleMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidDataError(std::string(what) + ": non-finite entry (NaN or Inf)");
  }
}

bool has_duplicate_rows(const SampleMatrix& m) {
  const Eigen::Index n = m.rows();
  const Eigen::Index d = m.cols();
  if (n < 2) return false;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (m(a, j) != m(b, j)) return m(a, j) < m(b, j);
    }
    return false;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (m.row(order[i - 1]) == m.row(order[i])) return true;
  }
  return false;
}

double data_scale(const SampleMatrix& m) {
  if (m.size() == 0) return 1.0;
  const double s = m.cwiseAbs().maxCoeff();
  return s > 0.0 ? s : 1.0;
}

std::uint64_t content_hash(const SampleMatrix& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(m(i, j));
      h ^= bits;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace eloss
