#include "mmspace/flow.hpp"

#include <algorithm>
#include <limits>

namespace mms {

MaxFlow::MaxFlow(std::size_t nodes, double slack) : slack_(slack), adj_(nodes) {}

void MaxFlow::add_edge(std::size_t from, std::size_t to, double cap) {
  adj_[from].push_back(edges_.size());
  edges_.push_back({to, cap});
  adj_[to].push_back(edges_.size());
  edges_.push_back({from, 0.0});
}

bool MaxFlow::build_levels(std::size_t s, std::size_t t) {
  level_.assign(adj_.size(), -1);
  std::vector<std::size_t> queue{s};
  level_[s] = 0;
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const std::size_t v = queue[k];
    for (std::size_t e : adj_[v]) {
      const Edge& edge = edges_[e];
      if (edge.cap > slack_ && level_[edge.to] < 0) {
        level_[edge.to] = level_[v] + 1;
        queue.push_back(edge.to);
      }
    }
  }
  return level_[t] >= 0;
}

double MaxFlow::push(std::size_t v, std::size_t t, double limit) {
  if (v == t) return limit;
  for (std::size_t& k = next_[v]; k < adj_[v].size(); ++k) {
    const std::size_t e = adj_[v][k];
    Edge& edge = edges_[e];
    if (edge.cap <= slack_ || level_[edge.to] != level_[v] + 1) continue;
    const double got = push(edge.to, t, std::min(limit, edge.cap));
    if (got > 0.0) {
      edge.cap -= got;
      edges_[e ^ 1].cap += got;
      return got;
    }
  }
  return 0.0;
}

double MaxFlow::run(std::size_t source, std::size_t sink) {
  double total = 0.0;
  while (build_levels(source, sink)) {
    next_.assign(adj_.size(), 0);
    for (;;) {
      const double got = push(source, sink, std::numeric_limits<double>::infinity());
      if (got <= 0.0) break;
      total += got;
    }
  }
  return total;
}

}  // namespace mms
