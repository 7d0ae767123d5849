#include <cmath>

#include "doctest.h"
#include "mmspace/error.hpp"
#include "mmspace/harness.hpp"
#include "mmspace/rng.hpp"
#include "mmspace/treegen.hpp"
#include "oracles.hpp"

using namespace mms;

namespace {

GraphTree edge() { return GraphTree{{0, 0}, 0}; }

std::vector<double> geometric() {
  std::vector<double> p;
  double rest = 1.0;
  for (int k = 0; k < 60; ++k) {
    p.push_back(std::ldexp(1.0, -(k + 1)));
    rest -= p.back();
  }
  p.back() += rest;
  return p;
}

}  // namespace

TEST_CASE("tree validation") {
  CHECK_NOTHROW(validate_tree(edge()));
  CHECK_THROWS_AS(validate_tree(GraphTree{{1, 0}, 0}), ValidationError);
  CHECK_THROWS_AS(validate_tree(GraphTree{{0, 2, 1}, 0}), ValidationError);
  CHECK_THROWS_AS(validate_tree(GraphTree{{}, 0}), ValidationError);
}

TEST_CASE("galton-watson trees") {
  const auto a = gw_tree({1.0}, 5, 100);
  CHECK(a.tree.size() == 1);
  CHECK(a.status == GwStatus::Extinct);
  const auto b = gw_tree({0.0, 1.0}, 5, 10);
  CHECK(b.tree.size() == 10);
  CHECK(b.status == GwStatus::Truncated);
  for (std::size_t v = 1; v < 10; ++v) CHECK(b.tree.parent[v] == v - 1);
  CHECK_THROWS_AS(gw_tree({0.5, 0.4}, 1, 10), InvalidDistribution);
  CHECK_THROWS_AS(gw_tree({1.5, -0.5}, 1, 10), InvalidDistribution);

  const auto c1 = gw_tree(geometric(), 77, 1000), c2 = gw_tree(geometric(), 77, 1000);
  CHECK(c1.tree.parent == c2.tree.parent);
  // Root offspring mean over many seeds.
  const int N = 10000;
  double sum = 0, sq = 0;
  for (int s = 0; s < N; ++s) {
    const auto t = gw_tree(geometric(), split_seed(123, s), 50);
    double kids = 0;
    for (std::size_t v = 1; v < t.tree.size(); ++v) kids += t.tree.parent[v] == 0;
    sum += kids;
    sq += kids * kids;
  }
  const double mean = sum / N, se = std::sqrt((sq / N - mean * mean) / N);
  CHECK(std::abs(mean - 1.0) <= 3 * se);
}

TEST_CASE("reflected walk") {
  CHECK(reflected_from_steps({1, -1}).values == std::vector<double>{0, 1, 0});
  CHECK(reflected_from_steps({1, 1, 1}).values == std::vector<double>{0, 1, 2, 3});
  CHECK(reflected_from_steps({-1, -1}).values == std::vector<double>{0, 1, 2});
  CHECK_THROWS_AS(reflected_from_steps({2}), ValidationError);
  const auto w = reflected_walk(5000, 4);
  CHECK(w.values == reflected_walk(5000, 4).values);
  for (double v : w.values) CHECK(v >= 0.0);
}

TEST_CASE("pitman transform") {
  CHECK(pitman_transform(LatticePath{{0, 0, 0}, 1}).values == std::vector<double>{0, 0, 0});
  CHECK(pitman_transform(LatticePath{{0, -1, 0}, 1}).values == std::vector<double>{0, 1, 2});
  const LatticePath up{{0, 0.5, 0.7, 2.0}, 1};
  CHECK(pitman_transform(up).values == up.values);
  oracle::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = pitman_transform(brownian_path(200, 1.0, trial));
    LatticePath q = p;
    q.values[0] = 0.0;
    CHECK(pitman_transform(q).values == q.values);
  }
}

TEST_CASE("brownian paths") {
  CHECK(brownian_path(100, 2.0, 9).values == brownian_path(100, 2.0, 9).values);
  CHECK(brownian_path(100, 2.0, 9).dt == 0.02);
  const int N = 10000;
  double sum = 0, sq = 0;
  for (int s = 0; s < N; ++s) {
    const double x = brownian_path(16, 2.0, split_seed(5, s)).values.back();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / N, var = sq / N - mean * mean;
  CHECK(std::abs(mean) <= 3 * std::sqrt(2.0 / N));
  CHECK(std::abs(var - 2.0) <= 0.05 * 2.0);
  CHECK_THROWS_AS(brownian_path(0, 1.0, 1), ValidationError);
}

TEST_CASE("bessel paths") {
  const auto b = bessel3_em(500, 1.0, 3);
  CHECK(b.values == bessel3_em(500, 1.0, 3).values);
  for (double v : b.values) CHECK(v >= 0.0);
}

TEST_CASE("graph trees as metric measure spaces") {
  const auto single = graph_to_mmspace(GraphTree{{0}, 0}, 1.0, Measure::node());
  CHECK(single.size() == 1);
  CHECK(single.total_mass() == 0.0);
  const auto deg = graph_to_mmspace(edge(), 1.0, Measure::degree());
  CHECK(deg.masses() == std::vector<double>{0.5, 0.5});
  const auto grid = graph_to_mmspace(edge(), 1.0, Measure::length_grid(0.5));
  REQUIRE(grid.size() == 3);
  std::vector<double> dists;
  for (std::size_t i = 0; i < 3; ++i) dists.push_back(grid.root_dist(i));
  std::sort(dists.begin(), dists.end());
  CHECK(dists == std::vector<double>{0, 0.5, 1});
  CHECK(grid.total_mass() == 1.0);
  CHECK_THROWS_AS(graph_to_mmspace(edge(), 1.0, Measure::length_grid(0.3)), GridMismatch);

  oracle::Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = oracle::random_tree(rng, 1 + oracle::pick(rng, 40));
    const auto nod = graph_to_mmspace(t, 1.0, Measure::node());
    const auto dg = graph_to_mmspace(t, 1.0, Measure::degree());
    const auto lam = graph_to_mmspace(t, 1.0, Measure::length_grid(0.25));
    const double edges = static_cast<double>(t.size() - 1);
    CHECK(nod.total_mass() == edges);
    CHECK(dg.total_mass() == edges);
    CHECK(lam.total_mass() == doctest::Approx(edges).epsilon(1e-12));
    for (int q = 0; q < 20; ++q) {
      const std::size_t a = oracle::pick(rng, t.size()), b = oracle::pick(rng, t.size());
      CHECK(nod.dist(a, b) == static_cast<double>(oracle::tree_hops(t, a, b)));
      CHECK(lam.dist(a, b) == static_cast<double>(oracle::tree_hops(t, a, b)));
    }
  }
}

TEST_CASE("measure perturbation bounds on graph trees") {
  oracle::Rng rng(52);
  for (int trial = 0; trial < 25; ++trial) {
    const auto t = oracle::random_tree(rng, 1 + oracle::pick(rng, 30));
    for (double alpha : {1.0, 0.5}) {
      const double h = alpha / 4;
      const auto gm = grid_measures(t, alpha, h);
      std::vector<std::size_t> nodes(gm.node_count), all(gm.grid.size());
      for (std::size_t v = 0; v < nodes.size(); ++v) nodes[v] = v;
      for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
      const auto& g = gm.grid;
      const DistanceFn d = [&g](std::size_t i, std::size_t j) { return g.dist(i, j); };
      CHECK(hausdorff(nodes, all, d) <= alpha);
      std::vector<double> lam = g.masses();
      for (auto& w : lam) w /= alpha;
      CHECK(prohorov(gm.degree_mass, lam, g.metric()) <= alpha / 2 + h);
      CHECK(prohorov(gm.node_mass, lam, g.metric()) <= alpha + h);
    }
  }
}

TEST_CASE("discrete kallenberg trees") {
  const auto s = kallenberg_from_walk(reflected_from_steps({1, -1}), 1, 5.0);
  const auto tent = glue_discretize(PLExcursion::compact({{0, 0}, {1, 1}, {2, 0}}), 1.0, 5.0);
  CHECK(check_equivalence(s, tent, 0.0));
  const auto a = kallenberg_discrete(4, 4000, 8, 1.0), b = kallenberg_discrete(4, 4000, 8, 1.0);
  CHECK(a.masses() == b.masses());
  CHECK(max_root_distance(a) <= 1.0);
  CHECK_THROWS_AS(kallenberg_discrete(4, 2, 8, 10.0), InsufficientSteps);
}

TEST_CASE("continuum kallenberg trees") {
  const auto a = continuum_kallenberg_sample(4.0, 4000, 6, 0.5, 0.01);
  const auto b = continuum_kallenberg_sample(4.0, 4000, 6, 0.5, 0.01);
  CHECK(a.masses() == b.masses());
  CHECK(a.root_dist(a.root()) == 0.0);
  CHECK(a.mass(a.root()) > 0.0);
  CHECK_THROWS_AS(continuum_kallenberg_sample(1e-6, 10, 6, 5.0, 0.01), HorizonTooShort);
}

TEST_CASE("two continuum generators give the same ball mass") {
  // Mean mass of the closed 0.5-ball around the root, Pitman path vs Bessel
  // path, each glued at the same pitch.
  const int N = 200;
  const double R = 0.5, h = 0.002;
  std::vector<double> p, q;
  for (int s = 0; s < N; ++s) {
    // Fine steps: the Euler scheme's first kick dt / x0 must stay small.
    const auto pp = pitman_transform(brownian_path(400000, 4.0, split_seed(71, 2 * s)));
    const auto bp = bessel3_em(400000, 4.0, split_seed(71, 2 * s + 1));
    if (pp.values.back() < R || bp.values.back() < R) continue;
    p.push_back(continuum_from_path(pp, R, h).total_mass());
    q.push_back(continuum_from_path(bp, R, h).total_mass());
  }
  auto stats = [](const std::vector<double>& v) {
    double m = 0, s2 = 0;
    for (double x : v) m += x;
    m /= v.size();
    for (double x : v) s2 += (x - m) * (x - m);
    return std::pair{m, s2 / (v.size() - 1) / v.size()};
  };
  const auto [mp, vp] = stats(p);
  const auto [mq, vq] = stats(q);
  CHECK(std::abs(mp - mq) <= 3 * std::sqrt(vp + vq));
}

TEST_CASE("skorokhod steps follow the path") {
  const auto b = brownian_path(200000, 4.0, 12);
  const auto steps = skorokhod_embedded_steps(b, 8);
  REQUIRE(steps.size() > 100);
  // The walk scaled by 1/n tracks the path at its exit times within one step.
  long long w = 0;
  for (int s : steps) w += s;
  CHECK(std::abs(static_cast<double>(w) / 8.0 - b.values.back()) <= 2.0 / 8.0);
  const auto padded = skorokhod_steps(b, 8, steps.size() + 50, 3);
  CHECK(padded.size() == steps.size() + 50);
  CHECK(std::equal(steps.begin(), steps.end(), padded.begin()));
}
