#include "mmspace/treegen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmspace/error.hpp"
#include "mmspace/rng.hpp"

namespace mms {

std::vector<std::size_t> GraphTree::degrees() const {
  std::vector<std::size_t> deg(parent.size(), 0);
  for (std::size_t v = 0; v < parent.size(); ++v)
    if (v != root) {
      ++deg[v];
      ++deg[parent[v]];
    }
  return deg;
}

void validate_tree(const GraphTree& tree) {
  const std::size_t n = tree.size();
  if (n == 0) throw ValidationError("tree: no nodes");
  if (tree.root >= n || tree.parent[tree.root] != tree.root) throw ValidationError("tree: root must be its own parent");
  // 0 = unknown, 1 = on current chain, 2 = reaches root.
  std::vector<char> state(n, 0);
  state[tree.root] = 2;
  std::vector<std::size_t> chain;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t u = v;
    while (state[u] == 0) {
      if (tree.parent[u] >= n) throw ValidationError("tree: parent index out of range");
      state[u] = 1;
      chain.push_back(u);
      u = tree.parent[u];
    }
    if (state[u] == 1) throw ValidationError("tree: parent array contains a cycle");
    for (std::size_t w : chain) state[w] = 2;
    chain.clear();
  }
}

GwResult gw_tree(const std::vector<double>& offspring, std::uint64_t seed, std::size_t node_cap) {
  if (offspring.empty()) throw InvalidDistribution("gw_tree: empty offspring law");
  double total = 0.0;
  std::vector<double> cdf;
  for (double p : offspring) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidDistribution("gw_tree: probabilities must be in [0, 1]");
    cdf.push_back(total += p);
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidDistribution("gw_tree: offspring law does not sum to 1");
  if (node_cap == 0) throw ValidationError("gw_tree: node_cap must be positive");

  Rng rng(seed);
  GwResult out;
  out.tree.parent.push_back(0);
  out.tree.root = 0;
  for (std::size_t next = 0; next < out.tree.parent.size(); ++next) {
    const double u = uniform01(rng) * total;
    auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, offspring.size() - 1);
    for (std::size_t c = 0; c < k; ++c) {
      if (out.tree.parent.size() == node_cap) {
        out.status = GwStatus::Truncated;
        return out;
      }
      out.tree.parent.push_back(next);
    }
  }
  out.status = GwStatus::Extinct;
  return out;
}

LatticePath reflected_from_steps(const std::vector<int>& steps) {
  LatticePath out;
  out.values.reserve(steps.size() + 1);
  out.values.push_back(0.0);
  long long w = 0, low = 0;
  for (int s : steps) {
    if (s != 1 && s != -1) throw ValidationError("reflected walk: steps must be +1 or -1");
    w += s;
    low = std::min(low, w);
    out.values.push_back(static_cast<double>(w - 2 * low));
  }
  return out;
}

LatticePath reflected_walk(std::size_t n_steps, std::uint64_t seed) {
  if (n_steps == 0) throw ValidationError("reflected_walk: need at least one step");
  Rng rng(seed);
  std::vector<int> steps(n_steps);
  for (auto& s : steps) s = (rng() >> 63) ? 1 : -1;
  return reflected_from_steps(steps);
}

LatticePath pitman_transform(const LatticePath& path) {
  LatticePath out{path.values, path.dt};
  double low = kInfinity;
  for (double& v : out.values) {
    low = std::min(low, v);
    v -= 2.0 * low;
  }
  return out;
}

LatticePath brownian_path(std::size_t n_grid, double horizon, std::uint64_t seed) {
  if (n_grid == 0) throw ValidationError("brownian_path: n_grid must be positive");
  if (!(horizon > 0.0)) throw ValidationError("brownian_path: horizon must be positive");
  LatticePath out;
  out.dt = horizon / static_cast<double>(n_grid);
  const double sd = std::sqrt(out.dt);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.values.resize(n_grid + 1);
  out.values[0] = 0.0;
  for (std::size_t k = 1; k <= n_grid; ++k) out.values[k] = out.values[k - 1] + sd * gauss(rng);
  return out;
}

LatticePath bessel3_em(std::size_t n_grid, double horizon, std::uint64_t seed, double x0) {
  if (n_grid == 0) throw ValidationError("bessel3_em: n_grid must be positive");
  if (!(horizon > 0.0) || !(x0 > 0.0)) throw ValidationError("bessel3_em: horizon and start must be positive");
  LatticePath out;
  out.dt = horizon / static_cast<double>(n_grid);
  const double sd = std::sqrt(out.dt);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.values.resize(n_grid + 1);
  out.values[0] = x0;
  for (std::size_t k = 1; k <= n_grid; ++k) {
    const double x = std::max(out.values[k - 1], 1e-300);
    out.values[k] = std::abs(x + out.dt / x + sd * gauss(rng));
  }
  return out;
}

PLExcursion path_excursion(const LatticePath& path, double slope) {
  std::vector<std::pair<double, double>> bp;
  bp.reserve(path.values.size());
  bp.emplace_back(0.0, 0.0);
  for (std::size_t k = 1; k < path.values.size(); ++k)
    bp.emplace_back(static_cast<double>(k) * path.dt, path.values[k]);
  return PLExcursion::transient(std::move(bp), slope);
}

namespace {

// Subdivided tree: parent pointers and the pitch of each edge.
struct Subdivision {
  std::vector<std::size_t> parent;
  std::size_t per_edge = 1;
  double pitch = 1.0;
};

Subdivision subdivide(const GraphTree& tree, double edge_len, double h) {
  if (!(h > 0.0)) throw GridMismatch("length grid: pitch must be positive");
  const double ratio = edge_len / h;
  const auto k = static_cast<std::size_t>(std::llround(ratio));
  if (k == 0 || std::abs(static_cast<double>(k) * h - edge_len) > 1e-12 * edge_len)
    throw GridMismatch("length grid: pitch " + std::to_string(h) + " does not divide edge length " +
                       std::to_string(edge_len));
  Subdivision s;
  s.per_edge = k;
  s.pitch = h;
  s.parent = tree.parent;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (v == tree.root || k == 1) continue;
    // v -> q_1 -> ... -> q_{k-1} -> parent(v)
    const std::size_t up = tree.parent[v];
    const std::size_t first = s.parent.size();
    s.parent[v] = first;
    for (std::size_t i = 1; i < k; ++i) s.parent.push_back(i + 1 < k ? first + i : up);
  }
  return s;
}

}  // namespace

GridMeasures grid_measures(const GraphTree& tree, double edge_len, double h) {
  validate_tree(tree);
  if (!(edge_len > 0.0) || !std::isfinite(edge_len)) throw ValidationError("tree: edge length must be positive");
  const Subdivision sub = subdivide(tree, edge_len, h);
  const std::size_t n = tree.size(), total = sub.parent.size();
  const auto deg = tree.degrees();
  std::vector<double> grid(total, sub.pitch), node(total, 0.0), degree(total, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    grid[v] = static_cast<double>(deg[v]) * sub.pitch / 2.0;
    node[v] = v == tree.root ? 0.0 : 1.0;
    degree[v] = static_cast<double>(deg[v]) / 2.0;
  }
  std::vector<double> edges(total, sub.pitch);
  edges[tree.root] = 0.0;
  FiniteMMSpace space(Metric(TreeMetric(sub.parent, std::move(edges))), tree.root, std::move(grid));
  return GridMeasures{std::move(space), std::move(node), std::move(degree), n};
}

FiniteMMSpace graph_to_mmspace(const GraphTree& tree, double edge_len, Measure measure) {
  if (measure.kind == Measure::Kind::LengthGrid) return grid_measures(tree, edge_len, measure.h).grid;
  validate_tree(tree);
  if (!(edge_len > 0.0) || !std::isfinite(edge_len)) throw ValidationError("tree: edge length must be positive");
  std::vector<double> edges(tree.size(), edge_len);
  edges[tree.root] = 0.0;
  std::vector<double> mass(tree.size());
  const auto deg = tree.degrees();
  for (std::size_t v = 0; v < tree.size(); ++v)
    mass[v] = measure.kind == Measure::Kind::Node ? (v == tree.root ? 0.0 : 1.0) : static_cast<double>(deg[v]) / 2.0;
  return FiniteMMSpace(Metric(TreeMetric(tree.parent, std::move(edges))), tree.root, std::move(mass));
}

FiniteMMSpace kallenberg_from_walk(const LatticePath& walk, std::size_t n, double R) {
  if (n == 0) throw ValidationError("kallenberg: scale must be positive");
  if (walk.values.size() < 2) throw InsufficientSteps("kallenberg: empty walk");
  const double nn = static_cast<double>(n);
  const double h = 1.0 / (nn * nn);
  std::vector<std::pair<double, double>> bp;
  bp.reserve(walk.values.size());
  bp.emplace_back(0.0, 0.0);
  for (std::size_t k = 1; k < walk.values.size(); ++k) bp.emplace_back(static_cast<double>(k) * h, walk.values[k] / nn);
  const double last = bp.back().second;
  if (last == 0.0) return glue_discretize(PLExcursion::compact(std::move(bp)), h, R);
  if (last < R)
    throw InsufficientSteps("kallenberg: walk ends at height " + std::to_string(last) + " below R = " +
                            std::to_string(R));
  return glue_discretize(PLExcursion::transient(std::move(bp), nn), h, R);
}

FiniteMMSpace kallenberg_discrete(std::size_t n, std::size_t walk_steps, std::uint64_t seed, double R) {
  return kallenberg_from_walk(reflected_walk(walk_steps, seed), n, R);
}

FiniteMMSpace continuum_from_path(const LatticePath& pitman_path, double R, double h) {
  if (pitman_path.values.empty() || pitman_path.values.back() < R)
    throw HorizonTooShort("continuum kallenberg: path ends below R");
  return glue_discretize(path_excursion(pitman_path, 1.0), h, R);
}

FiniteMMSpace continuum_kallenberg_sample(double horizon, std::size_t n_grid, std::uint64_t seed, double R,
                                          double h) {
  return continuum_from_path(pitman_transform(brownian_path(n_grid, horizon, seed)), R, h);
}

std::vector<int> skorokhod_embedded_steps(const LatticePath& brownian, std::size_t n) {
  if (n == 0) throw ValidationError("skorokhod: scale must be positive");
  const double gap = 1.0 / static_cast<double>(n);
  std::vector<int> steps;
  const auto& v = brownian.values;
  if (v.empty()) return steps;
  double anchor = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i] - anchor) < gap) continue;
    steps.push_back(v[i] > anchor ? 1 : -1);
    anchor = v[i];
  }
  return steps;
}

std::vector<int> skorokhod_steps(const LatticePath& brownian, std::size_t n, std::size_t n_steps,
                                 std::uint64_t fallback_seed) {
  std::vector<int> steps = skorokhod_embedded_steps(brownian, n);
  if (steps.size() > n_steps) steps.resize(n_steps);
  Rng rng(fallback_seed);
  while (steps.size() < n_steps) steps.push_back((rng() >> 63) ? 1 : -1);
  return steps;
}

}  // namespace mms
