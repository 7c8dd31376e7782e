#include "eloss/neighbor_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "eloss/errors.hpp"

namespace eloss {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (squared distance, point index). Lexicographic order doubles as the tie
// rule: equal distances rank by ascending index.
using Candidate = std::pair<double, int>;

// Shared by the tree and the brute-force path so selected neighbors carry
// bit-identical distances.
double squared_distance(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

void validate_query(const SampleMatrix& points, int k) {
  if (points.rows() < 2) {
    throw InvalidArgumentError("knn: need at least 2 points, got " +
                               std::to_string(points.rows()));
  }
  if (points.cols() < 1) {
    throw InvalidArgumentError("knn: dimension must be >= 1");
  }
  if (k < 1 || k >= points.rows()) {
    throw InvalidArgumentError("knn: k must satisfy 1 <= k <= n-1, got k=" +
                               std::to_string(k) + " with n=" +
                               std::to_string(points.rows()));
  }
  require_finite(points, "knn input");
}

// Bounded max-heap keeping the k smallest candidates under (dist^2, index).
class BestK {
 public:
  explicit BestK(int k) : k_(static_cast<std::size_t>(k)) { heap_.reserve(k_ + 1); }

  void offer(const Candidate& c) {
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  bool full() const { return heap_.size() == k_; }
  double worst() const { return heap_.front().first; }

  // Ascending (dist^2, index).
  std::vector<Candidate> sorted() && {
    std::sort(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

class KdTree {
 public:
  explicit KdTree(const RowMajorMatrix& pts, int leaf_size = 16)
      : pts_(pts), d_(pts.cols()), leaf_size_(leaf_size) {
    perm_.resize(static_cast<std::size_t>(pts.rows()));
    std::iota(perm_.begin(), perm_.end(), 0);
    nodes_.reserve(perm_.size() / static_cast<std::size_t>(leaf_size_) * 2 + 4);
    root_ = build(0, static_cast<int>(perm_.size()));
  }

  void query(int query_index, int k, BestK& best) const {
    search(root_, pts_.row(query_index).data(), query_index, best);
  }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
    int split_dim = 0;
    double split_value = 0.0;
    bool leaf() const { return left < 0; }
  };

  int build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > leaf_size_) {
      // Split the dimension of largest spread at the median.
      int dim = 0;
      double best_spread = -1.0;
      for (Eigen::Index j = 0; j < d_; ++j) {
        double lo = pts_(perm_[static_cast<std::size_t>(begin)], j);
        double hi = lo;
        for (int i = begin + 1; i < end; ++i) {
          const double v = pts_(perm_[static_cast<std::size_t>(i)], j);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
          best_spread = hi - lo;
          dim = static_cast<int>(j);
        }
      }
      const int mid = begin + (end - begin) / 2;
      std::nth_element(perm_.begin() + begin, perm_.begin() + mid,
                       perm_.begin() + end, [&](int a, int b) {
                         return pts_(a, dim) < pts_(b, dim);
                       });
      node.split_dim = dim;
      node.split_value = pts_(perm_[static_cast<std::size_t>(mid)], dim);
      const int self = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      const int left = build(begin, mid);
      const int right = build(mid, end);
      nodes_[static_cast<std::size_t>(self)].left = left;
      nodes_[static_cast<std::size_t>(self)].right = right;
      return self;
    }
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    return self;
  }

  void search(int node_index, const double* q, int query_index, BestK& best) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_index)];
    if (node.leaf()) {
      for (int i = node.begin; i < node.end; ++i) {
        const int p = perm_[static_cast<std::size_t>(i)];
        if (p == query_index) continue;
        best.offer({squared_distance(q, pts_.row(p).data(), d_), p});
      }
      return;
    }
    const double diff = q[node.split_dim] - node.split_value;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, query_index, best);
    // <= keeps the far side reachable when an equal-distance, lower-index
    // point may exist there.
    if (!best.full() || diff * diff <= best.worst()) {
      search(far, q, query_index, best);
    }
  }

  const RowMajorMatrix& pts_;
  Eigen::Index d_;
  int leaf_size_;
  std::vector<int> perm_;
  std::vector<Node> nodes_;
  int root_ = 0;
};

NeighborDistances assemble(const std::vector<std::vector<Candidate>>& rows, int k) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  NeighborDistances out;
  out.dist.resize(n, k);
  out.idx.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) {
      out.dist(i, j) = std::sqrt(row[static_cast<std::size_t>(j)].first);
      out.idx(i, j) = row[static_cast<std::size_t>(j)].second;
    }
  }
  return out;
}

}  // namespace

NeighborDistances knn_distances(const SampleMatrix& points, int k) {
  validate_query(points, k);
  const RowMajorMatrix pts = points;
  const int n = static_cast<int>(pts.rows());
  const KdTree tree(pts);

  std::vector<std::vector<Candidate>> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    BestK best(k);
    tree.query(i, k, best);
    rows[static_cast<std::size_t>(i)] = std::move(best).sorted();
  }
  return assemble(rows, k);
}

NeighborDistances brute_force_knn(const SampleMatrix& points, int k) {
  validate_query(points, k);
  const RowMajorMatrix pts = points;
  const int n = static_cast<int>(pts.rows());
  const Eigen::Index d = pts.cols();

  std::vector<std::vector<Candidate>> rows(static_cast<std::size_t>(n));
  std::vector<Candidate> all;
  all.reserve(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    all.clear();
    const double* qi = pts.row(i).data();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      all.push_back({squared_distance(qi, pts.row(j).data(), d), j});
    }
    std::partial_sort(all.begin(), all.begin() + k, all.end());
    rows[static_cast<std::size_t>(i)].assign(all.begin(), all.begin() + k);
  }
  return assemble(rows, k);
}

}  // namespace eloss
