#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "mmspace/metric.hpp"

namespace mms {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Finite pointed metric measure space. Points with zero mass are kept so
/// that indices stay stable under restriction; the root is always a point.
class FiniteMMSpace {
 public:
  FiniteMMSpace(Metric metric, std::size_t root, std::vector<double> mass);

  /// Convenience: validated dense metric from a row-major n x n matrix.
  static FiniteMMSpace from_dense(std::size_t n, std::vector<double> dist, std::size_t root,
                                  std::vector<double> mass);

  std::size_t size() const { return mass_.size(); }
  std::size_t root() const { return root_; }
  double dist(std::size_t i, std::size_t j) const { return metric_(i, j); }
  double root_dist(std::size_t i) const { return metric_(root_, i); }
  double mass(std::size_t i) const { return mass_[i]; }
  const std::vector<double>& masses() const { return mass_; }
  const Metric& metric() const { return metric_; }
  double total_mass() const;

 private:
  Metric metric_;
  std::size_t root_;
  std::vector<double> mass_;
};

/// Same metric and root, new masses.
FiniteMMSpace with_mass(const FiniteMMSpace& space, std::vector<double> mass);

/// Zeroes the mass of every point outside the closed ball of radius R.
FiniteMMSpace restrict(const FiniteMMSpace& space, double R);

/// Distances scaled by alpha, masses by beta.
FiniteMMSpace rescale(const FiniteMMSpace& space, double alpha, double beta);

/// Indices with positive mass, ascending.
std::vector<std::size_t> support_indices(const FiniteMMSpace& space);

/// Support plus the root (root first, then the rest ascending).
std::vector<std::size_t> support_with_root(const FiniteMMSpace& space);

double max_root_distance(const FiniteMMSpace& space);

/// Mass of the closed ball B(center, delta). Terms are summed in order of
/// (distance, index), so the result is monotone in delta and bitwise equal to
/// the matching prefix of a lower mass profile.
double ball_mass(const FiniteMMSpace& space, std::size_t center, double delta);

/// min of ball_mass(x, delta) over support points x with d(root, x) < R;
/// infinity if there is none. Requires delta > 0 and R > 0.
double lower_mass(const FiniteMMSpace& space, double delta, double R);

/// lower_mass with R beyond every root distance.
double global_lower_mass(const FiniteMMSpace& space, double delta);

/// Right-continuous step function: values[k] holds on [breakpoints[k],
/// breakpoints[k+1]); breakpoints[0] = 0.
struct LowerMassProfile {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double operator()(double delta) const;
};

/// Exact step representation of delta -> lower_mass(space, delta, R).
/// Breakpoints above delta_max are dropped; the profile is then exact on
/// (0, delta_max].
LowerMassProfile lower_mass_profile(const FiniteMMSpace& space, double R,
                                    double delta_max = kInfinity);

/// True iff some root-preserving bijection between supp+root of a and b
/// matches distances and masses within tol. Brute force over at most 10
/// support points per side.
bool check_equivalence(const FiniteMMSpace& a, const FiniteMMSpace& b, double tol);

inline constexpr std::size_t kEquivalenceLimit = 10;

}  // namespace mms
