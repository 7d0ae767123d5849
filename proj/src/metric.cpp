#include "mmspace/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmspace/error.hpp"

namespace mms {

double metric_tolerance(double max_distance) {
  return 1e-12 * std::max(1.0, max_distance);
}

DenseMetric::DenseMetric(std::size_t n, std::vector<double> d) : n_(n), d_(std::move(d)) {
  if (n_ == 0) throw ValidationError("metric: at least one point required");
  if (d_.size() != n_ * n_) throw DimensionMismatch("metric: distance matrix is not n x n");
  double dmax = 0.0;
  for (double v : d_) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("metric: distances must be finite and nonnegative");
    dmax = std::max(dmax, v);
  }
  const double tol = metric_tolerance(dmax);
  for (std::size_t i = 0; i < n_; ++i) {
    if (d_[i * n_ + i] != 0.0) throw ValidationError("metric: nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = i + 1; j < n_; ++j) {
      double& a = d_[i * n_ + j];
      double& b = d_[j * n_ + i];
      if (std::abs(a - b) > tol)
        throw ValidationError("metric: asymmetric entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      b = a;
      if (a <= 0.0)
        throw ValidationError("metric: points " + std::to_string(i) + " and " + std::to_string(j) +
                              " are not distinct");
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row_i = d_.data() + i * n_;
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double* row_j = d_.data() + j * n_;
      const double dij = row_i[j];
      for (std::size_t k = 0; k < n_; ++k) {
        if (dij > row_i[k] + row_j[k] + tol)
          throw ValidationError("metric: triangle inequality violated at (" + std::to_string(i) + "," +
                                std::to_string(j) + "," + std::to_string(k) + ")");
      }
    }
  }
}

EuclideanMetric::EuclideanMetric(std::size_t dim, std::vector<double> coords)
    : dim_(dim), n_(dim == 0 ? 0 : coords.size() / dim), coords_(std::move(coords)) {
  if (dim_ == 0 || coords_.size() % dim_ != 0 || n_ == 0)
    throw DimensionMismatch("euclidean metric: coordinate array does not match dimension");
  for (double v : coords_)
    if (!std::isfinite(v)) throw ValidationError("euclidean metric: non-finite coordinate");
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(point(a), point(a) + dim_, point(b), point(b) + dim_);
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t k = 1; k < n_; ++k)
    if (std::equal(point(order[k - 1]), point(order[k - 1]) + dim_, point(order[k])))
      throw ValidationError("euclidean metric: duplicate point " + std::to_string(order[k]));
}

double EuclideanMetric::operator()(std::size_t i, std::size_t j) const {
  const double* a = point(i);
  const double* b = point(j);
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return std::sqrt(s);
}

TreeMetric::TreeMetric(std::vector<std::size_t> parent, std::vector<double> edge)
    : parent_(std::move(parent)) {
  const std::size_t n = parent_.size();
  if (n == 0) throw ValidationError("tree metric: empty tree");
  if (edge.size() != n) throw DimensionMismatch("tree metric: edge length array size mismatch");
  std::size_t roots = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (parent_[v] >= n) throw ValidationError("tree metric: parent index out of range");
    if (parent_[v] == v) {
      root_ = v;
      ++roots;
    } else if (!(edge[v] > 0.0) || !std::isfinite(edge[v])) {
      throw ValidationError("tree metric: edge lengths must be positive and finite");
    }
  }
  if (roots != 1) throw ValidationError("tree metric: exactly one root required");

  // Depths in topological order; detects cycles.
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v)
    if (v != root_) children[parent_[v]].push_back(v);
  depth_.assign(n, 0.0);
  level_.assign(n, 0);
  std::vector<std::size_t> order{root_};
  order.reserve(n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t v = order[k];
    for (std::size_t c : children[v]) {
      depth_[c] = depth_[v] + edge[c];
      level_[c] = level_[v] + 1;
      order.push_back(c);
    }
  }
  if (order.size() != n) throw ValidationError("tree metric: parent array contains a cycle");

  std::size_t log = 1;
  while ((std::size_t{1} << log) < n) ++log;
  up_.assign(log, std::vector<std::size_t>(n));
  up_[0] = parent_;
  for (std::size_t k = 1; k < log; ++k)
    for (std::size_t v = 0; v < n; ++v) up_[k][v] = up_[k - 1][up_[k - 1][v]];
}

std::size_t TreeMetric::lca(std::size_t a, std::size_t b) const {
  if (level_[a] < level_[b]) std::swap(a, b);
  std::size_t diff = level_[a] - level_[b];
  for (std::size_t k = 0; diff != 0; ++k, diff >>= 1)
    if (diff & 1) a = up_[k][a];
  if (a == b) return a;
  for (std::size_t k = up_.size(); k-- > 0;) {
    if (up_[k][a] != up_[k][b]) {
      a = up_[k][a];
      b = up_[k][b];
    }
  }
  return parent_[a];
}

double TreeMetric::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  const double m = depth_[lca(i, j)];
  return (depth_[i] - m) + (depth_[j] - m);
}

ContourMetric::ContourMetric(std::vector<double> heights, std::vector<double> gaps)
    : heights_(std::move(heights)), gaps_(std::move(gaps)) {
  const std::size_t n = heights_.size();
  if (n == 0) throw ValidationError("contour metric: no points");
  if (gaps_.size() + 1 != n) throw DimensionMismatch("contour metric: need exactly n-1 gap minima");
  for (double h : heights_)
    if (!std::isfinite(h) || h < 0.0) throw ValidationError("contour metric: heights must be finite and >= 0");
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double g = gaps_[k];
    if (!std::isfinite(g) || g < 0.0 || g > heights_[k] || g > heights_[k + 1])
      throw ValidationError("contour metric: gap minimum exceeds an adjacent height at " + std::to_string(k));
  }
  // Two points coincide iff they have equal height and the contour never dips
  // below that height in between. A strictly increasing stack of visible
  // heights finds such pairs in one pass.
  std::vector<double> stack;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0)
      while (!stack.empty() && stack.back() > gaps_[k - 1]) stack.pop_back();
    if (!stack.empty() && stack.back() == heights_[k])
      throw ValidationError("contour metric: point " + std::to_string(k) + " coincides with an earlier point");
    stack.push_back(heights_[k]);
  }

  table_.push_back(gaps_);
  for (std::size_t w = 1; (w << 1) <= gaps_.size(); w <<= 1) {
    const auto& prev = table_.back();
    std::vector<double> next(gaps_.size() - (w << 1) + 1);
    for (std::size_t k = 0; k < next.size(); ++k) next[k] = std::min(prev[k], prev[k + w]);
    table_.push_back(std::move(next));
  }
}

double ContourMetric::gap_min(std::size_t lo, std::size_t hi) const {
  const std::size_t len = hi - lo;
  std::size_t level = 0;
  while ((std::size_t{2} << level) <= len) ++level;
  return std::min(table_[level][lo], table_[level][hi - (std::size_t{1} << level)]);
}

double ContourMetric::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  const double m = std::min({heights_[i], heights_[j], gap_min(i, j)});
  return (heights_[i] - m) + (heights_[j] - m);
}

std::vector<double> Metric::to_dense() const {
  const std::size_t n = size();
  std::vector<double> out(n * n, 0.0);
  visit([&](const auto& m, double scale) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) out[i * n + j] = out[j * n + i] = scale * m(i, j);
  });
  return out;
}

}  // namespace mms
