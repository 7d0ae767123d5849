#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mmspace/metric.hpp"
#include "mmspace/space.hpp"

namespace mms {

using DistanceFn = std::function<double(std::size_t, std::size_t)>;

/// Prohorov distance between mu (on points 0..|mu|-1 of the left side) and
/// nu (on points 0..|nu|-1 of the right side) when only the cross distances
/// cost(i, j) matter. This is the case for two measures on one space as well
/// as for measures on the two halves of a disjoint union.
double prohorov_bipartite(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& cost);

/// Whether eps is feasible, i.e. mu(A) <= nu(A^eps) + eps and vice versa for
/// all A (closed eps-neighbourhoods). One max flow.
bool prohorov_feasible(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& cost,
                       double eps);

/// Exact Prohorov distance between two measures on one finite space.
double prohorov(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& dist);
double prohorov(const std::vector<double>& mu, const std::vector<double>& nu, const Metric& metric);

/// Same quantity by enumerating every subset; at most 12 points.
double prohorov_oracle(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& dist);
inline constexpr std::size_t kProhorovOracleLimit = 12;

/// Hausdorff distance between two nonempty index sets.
double hausdorff(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b, const DistanceFn& dist);

using Pairing = std::vector<std::pair<std::size_t, std::size_t>>;

struct SearchParams {
  std::size_t max_pairing_size = 6;
  std::size_t exhaustive_limit = 5;
  std::size_t greedy_restarts = 4;
};

/// Extension of two metrics to the disjoint union, kept only between the
/// relevant points a_points (support + root of A, root first) and b_points.
struct UnionMetric {
  std::vector<std::size_t> a_points;
  std::vector<std::size_t> b_points;
  std::vector<double> cross;  // |a_points| x |b_points|, row-major
  double eta = 0.0;           // distortion of the pairing (0 for embeddings)
  double root_gap = 0.0;      // distance between the two roots
  Pairing pairing;            // empty when built from a common space

  double at(std::size_t ka, std::size_t kb) const { return cross[ka * b_points.size() + kb]; }
};

/// cross(x, y) = min over pairs (i, j) of dA(x, i) + eta/2 + dB(j, y), with
/// eta the pairing's distortion. The root pair is added if missing. Throws
/// InvalidPairing if the result violates a triangle inequality by > 1e-9.
UnionMetric build_union_metric(const FiniteMMSpace& a, const FiniteMMSpace& b, Pairing pairing);

/// Union metric induced by a declared common space: cross(x, y) = d(x, y)
/// where both spaces sit isometrically inside the common space.
UnionMetric union_metric_from_common(const FiniteMMSpace& a, const FiniteMMSpace& b, const DistanceFn& common);

/// Checks the mixed triangle inequalities of a union metric within tol.
bool union_metric_valid(const FiniteMMSpace& a, const FiniteMMSpace& b, const UnionMetric& u, double tol);

/// Extra candidates tried before the generated pairings.
struct SearchHints {
  std::vector<Pairing> pairings;
  std::vector<UnionMetric> embeddings;
};

struct DistanceReport {
  double value = 0.0;
  std::string certificate;  // "exact" or "upper_bound"
  Pairing pairing;
};

/// Deterministic candidate pairings in search order (roots, hints, rank
/// matching, mass coupling, greedy restarts, exhaustive subsets). Calls
/// visit(pairing) until it returns false.
void for_each_pairing(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params,
                      const std::vector<Pairing>& hints, const std::function<bool(const Pairing&)>& visit);

/// Prohorov term of a union metric with the current masses of a and b.
double union_prohorov(const FiniteMMSpace& a, const FiniteMMSpace& b, const UnionMetric& u);
/// Hausdorff term between supp+root of a and b inside a union metric.
double union_hausdorff(const FiniteMMSpace& a, const FiniteMMSpace& b, const UnionMetric& u);

/// Upper bound on the Gromov-Prohorov distance.
DistanceReport gromov_prohorov_ub(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params = {},
                                  const SearchHints& hints = {});
/// Upper bound on the Gromov-Hausdorff-Prohorov distance.
DistanceReport ghp_ub(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params = {},
                      const SearchHints& hints = {});
/// Integral over delta in [0, 1] of 1 ^ |1/m_delta(a) - 1/m_delta(b)| with
/// the global lower mass functions; 1/inf = 0. Exact.
double lower_mass_gap_integral(const FiniteMMSpace& a, const FiniteMMSpace& b);
/// ghp_ub plus the lower mass integral.
DistanceReport sghp(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params = {},
                    const SearchHints& hints = {});

enum class InnerKind { GP, SGHP };

/// integral of e^-R (1 ^ inner(a|R, b|R)) dR, evaluated exactly on the
/// intervals between root-distance breakpoints of both spaces.
DistanceReport localized(InnerKind kind, const FiniteMMSpace& a, const FiniteMMSpace& b,
                         const SearchParams& params = {}, const SearchHints& hints = {});

}  // namespace mms
