#pragma once

#include <cstddef>
#include <vector>

namespace mms {

/// Dinic maximum flow with real capacities. Residuals at or below `slack`
/// count as saturated.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes, double slack = 0.0);

  void add_edge(std::size_t from, std::size_t to, double cap);
  double run(std::size_t source, std::size_t sink);

 private:
  struct Edge {
    std::size_t to;
    double cap;
  };
  bool build_levels(std::size_t s, std::size_t t);
  double push(std::size_t v, std::size_t t, double limit);

  double slack_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace mms
