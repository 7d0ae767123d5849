#include <cmath>

#include "doctest.h"
#include "mmspace/error.hpp"
#include "mmspace/metrics.hpp"
#include "oracles.hpp"

using namespace mms;

namespace {

FiniteMMSpace point(double mass) { return FiniteMMSpace::from_dense(1, {0}, 0, {mass}); }
FiniteMMSpace two_points(double m0, double m1, double d = 1.0) {
  return FiniteMMSpace::from_dense(2, {0, d, d, 0}, 0, {m0, m1});
}
DistanceFn of(const FiniteMMSpace& s) {
  return [&s](std::size_t i, std::size_t j) { return s.dist(i, j); };
}
std::vector<double> random_masses(oracle::Rng& rng, std::size_t n) {
  std::vector<double> m(n);
  for (auto& x : m) x = oracle::unif(rng, 0, 1) < 0.2 ? 0.0 : oracle::unif(rng, 0, 3);
  return m;
}

}  // namespace

TEST_CASE("prohorov examples") {
  const auto s = two_points(1, 1, 0.3);
  CHECK(prohorov({1, 2}, {1, 2}, of(s)) == 0.0);
  CHECK(prohorov({1, 0}, {0, 1}, of(s)) == 0.3);
  CHECK(prohorov({1, 0}, {3, 0}, of(s)) == 2.0);
  CHECK(prohorov_oracle({1, 0}, {0, 1}, of(s)) == 0.3);
  CHECK(prohorov_oracle({1.5}, {0.25}, of(point(1))) == 1.25);
  CHECK(prohorov_oracle({1, 2}, {1, 2}, of(s)) == 0.0);
  CHECK_THROWS_AS(prohorov({1}, {1, 2}, of(s)), DimensionMismatch);
  CHECK_THROWS_AS(prohorov({1, -1}, {1, 2}, of(s)), ValidationError);
  std::vector<double> d(13 * 13, 1.0);
  for (std::size_t i = 0; i < 13; ++i) d[i * 13 + i] = 0.0;
  const auto big = FiniteMMSpace::from_dense(13, d, 0, std::vector<double>(13, 1.0));
  CHECK_THROWS_AS(prohorov_oracle(big.masses(), big.masses(), of(big)), SizeLimitExceeded);
}

TEST_CASE("prohorov agrees with both subset oracles") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + oracle::pick(rng, 8);
    const auto s = trial % 3 ? oracle::random_space(rng, n) : oracle::random_lattice_space(rng, n);
    const auto mu = random_masses(rng, n), nu = random_masses(rng, n);
    const double want = oracle::prohorov(mu, nu, of(s));
    CHECK(std::abs(prohorov(mu, nu, s.metric()) - want) <= 1e-9);
    CHECK(std::abs(prohorov_oracle(mu, nu, of(s)) - want) <= 1e-9);
    CHECK(prohorov(mu, nu, s.metric()) == prohorov(mu, nu, of(s)));
  }
}

TEST_CASE("prohorov feasibility is monotone and brackets the value") {
  oracle::Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = oracle::random_space(rng, 6);
    const auto mu = random_masses(rng, 6), nu = random_masses(rng, 6);
    const double v = prohorov(mu, nu, of(s));
    CHECK(prohorov_feasible(mu, nu, of(s), v + 1e-9));
    if (v > 1e-6) CHECK_FALSE(prohorov_feasible(mu, nu, of(s), v - 1e-6));
  }
}

TEST_CASE("hausdorff") {
  const auto s = FiniteMMSpace::from_dense(3, {0, 2, 5, 2, 0, 4, 5, 4, 0}, 0, {1, 1, 1});
  CHECK(hausdorff({0, 1}, {0, 1}, of(s)) == 0.0);
  CHECK(hausdorff({0}, {0, 1}, of(s)) == 2.0);
  CHECK(hausdorff({0, 1}, {0}, of(s)) == 2.0);
  CHECK(hausdorff({1}, {2}, of(s)) == 4.0);
  CHECK(hausdorff({0, 1}, {2}, of(s)) == 5.0);
  CHECK_THROWS_AS(hausdorff({}, {1}, of(s)), EmptySet);
}

TEST_CASE("union metric construction") {
  oracle::Rng rng(33);
  const auto x = oracle::random_space(rng, 5, 0.0);
  Pairing id;
  for (std::size_t i = 0; i < 5; ++i) id.emplace_back(i, i);
  const auto u = build_union_metric(x, x, id);
  CHECK(u.eta == 0.0);
  CHECK(u.root_gap == 0.0);
  for (std::size_t a = 0; a < u.a_points.size(); ++a)
    for (std::size_t b = 0; b < u.b_points.size(); ++b) CHECK(u.at(a, b) == x.dist(u.a_points[a], u.b_points[b]));
  CHECK(union_metric_valid(x, x, u, 1e-9));

  const auto p = build_union_metric(point(1), point(1), {{0, 0}});
  CHECK(p.at(0, 0) == 0.0);
  const auto q = build_union_metric(point(1), two_points(1, 1), {{0, 0}});
  CHECK(q.eta == 0.0);
  CHECK(q.at(0, 1) == 1.0);
  // The root pair is added when missing.
  const auto r = build_union_metric(point(1), two_points(1, 1), {{0, 1}});
  CHECK(r.eta == 1.0);
  CHECK(r.root_gap == 0.5);
  CHECK_THROWS_AS(build_union_metric(point(1), point(1), {{0, 3}}), InvalidPairing);

  for (int trial = 0; trial < 30; ++trial) {
    const auto a = oracle::random_space(rng, 5), b = oracle::random_space(rng, 4);
    Pairing pr;
    for (int k = 0; k < 3; ++k) pr.emplace_back(oracle::pick(rng, 5), oracle::pick(rng, 4));
    CHECK(union_metric_valid(a, b, build_union_metric(a, b, pr), 1e-9));
  }
}

TEST_CASE("gromov-prohorov and ghp upper bounds") {
  oracle::Rng rng(34);
  const auto x = oracle::random_space(rng, 6);
  CHECK(gromov_prohorov_ub(x, x).value <= 1e-9);
  CHECK(ghp_ub(x, x).value <= 1e-9);
  CHECK(gromov_prohorov_ub(point(1), point(1)).value == 0.0);
  CHECK(gromov_prohorov_ub(point(1), point(3)).value == 2.0);
  CHECK(gromov_prohorov_ub(point(1), point(3)).certificate == "exact");
  CHECK(ghp_ub(point(1), point(1)).value == 0.0);
  const auto g = ghp_ub(point(1), two_points(1, 1)).value;
  CHECK(g >= 1.0);
  CHECK(g <= 2.0 + 1e-12);
}

TEST_CASE("upper bound ordering and search monotonicity") {
  oracle::Rng rng(35);
  const SearchParams small{1, 0, 0}, medium{3, 3, 1}, large{};
  for (int trial = 0; trial < 15; ++trial) {
    const auto a = oracle::random_space(rng, 2 + oracle::pick(rng, 4));
    const auto b = oracle::random_space(rng, 2 + oracle::pick(rng, 4));
    const double gp = gromov_prohorov_ub(a, b, large).value;
    CHECK(gp <= ghp_ub(a, b, large).value + 1e-12);
    CHECK(sghp(a, b, large).value >= ghp_ub(a, b, large).value - 1e-12);
    CHECK(gromov_prohorov_ub(a, b, medium).value <= gromov_prohorov_ub(a, b, small).value + 1e-12);
    CHECK(gp <= gromov_prohorov_ub(a, b, medium).value + 1e-12);
    CHECK(ghp_ub(a, b, large).value <= ghp_ub(a, b, small).value + 1e-12);
  }
}

TEST_CASE("common-space embeddings bound the Gromov-Prohorov distance") {
  oracle::Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = oracle::random_space(rng, 6);
    const auto x = with_mass(z, random_masses(rng, 6)), y = with_mass(z, random_masses(rng, 6));
    SearchHints hints;
    hints.embeddings.push_back(union_metric_from_common(x, y, of(z)));
    CHECK(gromov_prohorov_ub(x, y, {}, hints).value <= prohorov(x.masses(), y.masses(), of(z)) + 1e-12);
  }
}

TEST_CASE("support ghp") {
  oracle::Rng rng(37);
  const auto x = oracle::random_space(rng, 5);
  CHECK(sghp(x, x).value <= 1e-9);
  CHECK(sghp(point(1), point(2)).value == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(lower_mass_gap_integral(point(1), point(2)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sghp(rescale(x, 1, 1), x).value <= 1e-9);
}

TEST_CASE("localized distances") {
  oracle::Rng rng(38);
  const auto x = oracle::random_space(rng, 6);
  CHECK(localized(InnerKind::GP, x, x).value == 0.0);
  CHECK(localized(InnerKind::SGHP, x, x).value == 0.0);
  CHECK(localized(InnerKind::GP, point(1), point(2)).value == doctest::Approx(1.0).epsilon(1e-12));
  const double far = max_root_distance(x) + 1.0;
  CHECK(localized(InnerKind::GP, x, restrict(x, far)).value == 0.0);
  for (int trial = 0; trial < 15; ++trial) {
    const auto a = oracle::random_space(rng, 2 + oracle::pick(rng, 4));
    const auto b = oracle::random_space(rng, 2 + oracle::pick(rng, 4));
    const double v = localized(InnerKind::GP, a, b).value;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}
