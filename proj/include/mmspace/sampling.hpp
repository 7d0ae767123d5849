#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmspace/space.hpp"

namespace mms {

/// Finitely supported measure on (m+1) x (m+1) distance matrices of the root
/// followed by m sampled points. `tri` lists the strict upper triangle row by
/// row: (0,1) ... (0,m), (1,2) ... (m-1,m).
struct EmpiricalDMD {
  struct Atom {
    std::vector<double> tri;
    double weight = 0.0;
  };
  std::size_t m = 0;
  std::vector<Atom> atoms;

  double total_weight() const;
};

inline constexpr std::size_t tri_size(std::size_t m) { return m * (m + 1) / 2; }

inline constexpr double kEnumerationLimit = 1e6;

/// Exact distance matrix distribution: every tuple of support points,
/// weighted by the product of masses; identical matrices merged.
EmpiricalDMD dmd_exact(const FiniteMMSpace& space, std::size_t m);

/// Monte Carlo estimate from n_samples tuples drawn from the normalized mass,
/// each worth total_mass^m / n_samples. Draws run in fixed batches with
/// per-batch seeds, so output depends only on the seed.
EmpiricalDMD dmd_sample(const FiniteMMSpace& space, std::size_t m, std::size_t n_samples, std::uint64_t seed);

/// Prohorov distance between two DMDs under the max-entry matrix distance.
double dmd_discrepancy(const EmpiricalDMD& a, const EmpiricalDMD& b);

/// sum over atoms of weight * prod exp(-lambda_ij r_ij); `lambdas` is in the
/// same triangle order as the atoms.
double polynomial_eval(const FiniteMMSpace& space, std::size_t m, const std::vector<double>& lambdas);

/// Same sum evaluated on an already computed DMD.
double polynomial_eval(const EmpiricalDMD& dmd, const std::vector<double>& lambdas);

}  // namespace mms
