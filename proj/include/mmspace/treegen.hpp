#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmspace/excursion.hpp"
#include "mmspace/space.hpp"

namespace mms {

/// Rooted tree by parent pointers; parent[root] == root.
struct GraphTree {
  std::vector<std::size_t> parent;
  std::size_t root = 0;

  std::size_t size() const { return parent.size(); }
  std::vector<std::size_t> degrees() const;
};

/// Throws ValidationError unless the parent array is a tree rooted at root.
void validate_tree(const GraphTree& tree);

enum class GwStatus { Extinct, Truncated };

struct GwResult {
  GraphTree tree;
  GwStatus status = GwStatus::Extinct;
};

/// Breadth-first Galton-Watson tree. Extinct: the population died out on its
/// own. Truncated: some node needed a child beyond node_cap.
GwResult gw_tree(const std::vector<double>& offspring, std::uint64_t seed, std::size_t node_cap);

/// Heights at times 0, dt, 2 dt, ...
struct LatticePath {
  std::vector<double> values;
  double dt = 1.0;
};

/// W - 2 inf W for a fair +-1 walk W with n_steps steps.
LatticePath reflected_walk(std::size_t n_steps, std::uint64_t seed);
LatticePath reflected_from_steps(const std::vector<int>& steps);
/// path - 2 * running infimum (the infimum includes the starting value).
LatticePath pitman_transform(const LatticePath& path);
/// Gaussian increments of variance horizon / n_grid. A longer path with the
/// same seed and step extends a shorter one.
LatticePath brownian_path(std::size_t n_grid, double horizon, std::uint64_t seed);
/// Euler-Maruyama for dX = dt / X + dB from x0, reflected by |.|.
LatticePath bessel3_em(std::size_t n_grid, double horizon, std::uint64_t seed, double x0 = 1e-3);

/// Piecewise-linear interpolation of a path (values[0] replaced by 0) with a
/// linear tail of the given slope after the last point.
PLExcursion path_excursion(const LatticePath& path, double slope);

struct Measure {
  enum class Kind { Node, Degree, LengthGrid };
  Kind kind = Kind::Node;
  double h = 0.0;  // LengthGrid pitch

  static Measure node() { return {Kind::Node, 0.0}; }
  static Measure degree() { return {Kind::Degree, 0.0}; }
  static Measure length_grid(double h) { return {Kind::LengthGrid, h}; }
};

/// Tree with every edge of length edge_len. Node: mass 1 per non-root node.
/// Degree: deg / 2 per node. LengthGrid: each edge is subdivided at pitch h
/// (which must divide edge_len); interior points get h, nodes deg * h / 2.
/// Nodes keep their indices; subdivision points follow.
FiniteMMSpace graph_to_mmspace(const GraphTree& tree, double edge_len, Measure measure);

/// Subdivided tree carrying the length measure, with the node and degree
/// measures expressed on the same points.
struct GridMeasures {
  FiniteMMSpace grid;
  std::vector<double> node_mass;
  std::vector<double> degree_mass;
  std::size_t node_count = 0;  // points 0..node_count-1 are the tree nodes
};
GridMeasures grid_measures(const GraphTree& tree, double edge_len, double h);

/// Glue image of t -> walk(t n^2) / n at pitch 1 / n^2, restricted to R.
/// Compact if the walk ends at 0, otherwise continued with slope n.
FiniteMMSpace kallenberg_from_walk(const LatticePath& walk, std::size_t n, double R);
FiniteMMSpace kallenberg_discrete(std::size_t n, std::size_t walk_steps, std::uint64_t seed, double R);
/// Glue image of the Pitman transform of a Brownian path, continued with
/// slope 1 after the horizon, restricted to R at pitch h.
FiniteMMSpace continuum_kallenberg_sample(double horizon, std::size_t n_grid, std::uint64_t seed, double R, double h);
FiniteMMSpace continuum_from_path(const LatticePath& pitman_path, double R, double h);

/// Steps read off the path until it runs out (see skorokhod_steps).
std::vector<int> skorokhod_embedded_steps(const LatticePath& brownian, std::size_t n);

/// Simple random walk steps read off a Brownian path: each step ends when the
/// path has moved 1/n away from where the previous step ended, and its sign
/// is the direction of that move. Steps past the end of the path are fair
/// coin flips from fallback_seed.
std::vector<int> skorokhod_steps(const LatticePath& brownian, std::size_t n, std::size_t n_steps,
                                 std::uint64_t fallback_seed);

}  // namespace mms
