#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

namespace mms {

/// Absolute slack used when validating metric axioms: 1e-12 relative to the
/// largest distance (and never below 1e-12).
double metric_tolerance(double max_distance);

/// Explicit symmetric distance matrix, validated on construction.
class DenseMetric {
 public:
  /// `d` is row-major n x n.
  DenseMetric(std::size_t n, std::vector<double> d);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  const std::vector<double>& data() const { return d_; }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

/// Point cloud in R^dim with the Euclidean distance.
class EuclideanMetric {
 public:
  /// `coords` is row-major n x dim.
  EuclideanMetric(std::size_t dim, std::vector<double> coords);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const;
  const double* point(std::size_t i) const { return coords_.data() + i * dim_; }

 private:
  std::size_t dim_;
  std::size_t n_;
  std::vector<double> coords_;
};

/// Path metric of a finite tree with positive edge lengths.
class TreeMetric {
 public:
  /// parent[v] == v for exactly one v (the tree root); edge[v] is the length
  /// of the edge {v, parent[v]} (ignored for the root).
  TreeMetric(std::vector<std::size_t> parent, std::vector<double> edge);

  std::size_t size() const { return parent_.size(); }
  double operator()(std::size_t i, std::size_t j) const;
  std::size_t lca(std::size_t i, std::size_t j) const;
  double depth(std::size_t v) const { return depth_[v]; }
  std::size_t parent(std::size_t v) const { return parent_[v]; }
  std::size_t tree_root() const { return root_; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<double> depth_;
  std::vector<std::size_t> level_;
  std::vector<std::vector<std::size_t>> up_;
  std::size_t root_ = 0;
};

/// Tree metric encoded by a contour: points are visited in order, point k
/// sits at height h[k] and g[k] is the minimum of the contour between points
/// k and k+1, so d(i, j) = h[i] + h[j] - 2 min(h[i], h[j], g[i..j-1]).
/// This is the quotient metric of a function sampled at the points' times.
class ContourMetric {
 public:
  ContourMetric(std::vector<double> heights, std::vector<double> gaps);

  std::size_t size() const { return heights_.size(); }
  double operator()(std::size_t i, std::size_t j) const;
  double height(std::size_t k) const { return heights_[k]; }
  double gap(std::size_t k) const { return gaps_[k]; }
  /// min of gaps[lo..hi-1]; requires lo < hi.
  double gap_min(std::size_t lo, std::size_t hi) const;

 private:
  std::vector<double> heights_;
  std::vector<double> gaps_;
  std::vector<std::vector<double>> table_;  // sparse table over gaps_
};

/// Shared, immutable distance store plus a positive scale factor.
class Metric {
 public:
  using Store = std::variant<DenseMetric, EuclideanMetric, TreeMetric, ContourMetric>;

  template <class M>
  explicit Metric(M m) : store_(std::make_shared<const Store>(std::move(m))) {}

  std::size_t size() const {
    return std::visit([](const auto& m) { return m.size(); }, *store_);
  }
  double operator()(std::size_t i, std::size_t j) const {
    return scale_ * std::visit([&](const auto& m) { return m(i, j); }, *store_);
  }
  double scale() const { return scale_; }
  Metric scaled(double alpha) const {
    Metric out = *this;
    out.scale_ *= alpha;
    return out;
  }
  const Store& store() const { return *store_; }

  /// Dispatches once on the backing type: f(backing, scale).
  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit([&](const auto& m) -> decltype(auto) { return f(m, scale_); }, *store_);
  }

  /// Row-major n x n copy of all distances.
  std::vector<double> to_dense() const;

 private:
  std::shared_ptr<const Store> store_;
  double scale_ = 1.0;
};

}  // namespace mms
