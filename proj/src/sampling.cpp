#include "mmspace/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmspace/error.hpp"
#include "mmspace/metrics.hpp"
#include "mmspace/rng.hpp"

namespace mms {

namespace {

constexpr std::size_t kBatch = 4096;

// Distance matrix of (root, x_1..x_m) in triangle order.
void fill_tri(const FiniteMMSpace& space, const std::vector<std::size_t>& pts, std::vector<double>& tri) {
  tri.clear();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) tri.push_back(space.dist(pts[i], pts[j]));
}

void merge_atoms(EmpiricalDMD& dmd) {
  std::stable_sort(dmd.atoms.begin(), dmd.atoms.end(),
                   [](const EmpiricalDMD::Atom& x, const EmpiricalDMD::Atom& y) { return x.tri < y.tri; });
  std::vector<EmpiricalDMD::Atom> merged;
  for (auto& atom : dmd.atoms) {
    if (!merged.empty() && merged.back().tri == atom.tri)
      merged.back().weight += atom.weight;
    else
      merged.push_back(std::move(atom));
  }
  dmd.atoms = std::move(merged);
}

void check_m(std::size_t m) {
  if (m == 0) throw ValidationError("dmd: m must be positive");
}

}  // namespace

double EmpiricalDMD::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

EmpiricalDMD dmd_exact(const FiniteMMSpace& space, std::size_t m) {
  check_m(m);
  const auto supp = support_indices(space);
  if (std::pow(static_cast<double>(supp.size()), static_cast<double>(m)) > kEnumerationLimit)
    throw SizeLimitExceeded("dmd_exact: |supp|^m = " + std::to_string(supp.size()) + "^" + std::to_string(m) +
                            " exceeds the enumeration bound");
  EmpiricalDMD out;
  out.m = m;
  if (supp.empty()) return out;
  std::vector<std::size_t> digit(m, 0);
  std::vector<std::size_t> pts(m + 1, space.root());
  for (;;) {
    double w = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      pts[k + 1] = supp[digit[k]];
      w *= space.mass(pts[k + 1]);
    }
    EmpiricalDMD::Atom atom;
    fill_tri(space, pts, atom.tri);
    atom.weight = w;
    out.atoms.push_back(std::move(atom));
    std::size_t k = 0;
    while (k < m && ++digit[k] == supp.size()) digit[k++] = 0;
    if (k == m) break;
  }
  merge_atoms(out);
  return out;
}

EmpiricalDMD dmd_sample(const FiniteMMSpace& space, std::size_t m, std::size_t n_samples, std::uint64_t seed) {
  check_m(m);
  if (n_samples == 0) throw ValidationError("dmd_sample: n_samples must be positive");
  const auto supp = support_indices(space);
  if (supp.empty()) throw EmptySupport("dmd_sample: total mass is zero");
  std::vector<double> cdf;
  double acc = 0.0;
  for (std::size_t i : supp) cdf.push_back(acc += space.mass(i));
  const double total = acc;
  const double w = std::pow(total, static_cast<double>(m)) / static_cast<double>(n_samples);

  EmpiricalDMD out;
  out.m = m;
  out.atoms.reserve(n_samples);
  std::vector<std::size_t> pts(m + 1, space.root());
  for (std::size_t batch = 0; batch * kBatch < n_samples; ++batch) {
    Rng rng(split_seed(seed, batch));
    const std::size_t count = std::min(kBatch, n_samples - batch * kBatch);
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t k = 0; k < m; ++k) {
        const double u = uniform01(rng) * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        pts[k + 1] = supp[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), supp.size() - 1)];
      }
      EmpiricalDMD::Atom atom;
      fill_tri(space, pts, atom.tri);
      atom.weight = w;
      out.atoms.push_back(std::move(atom));
    }
  }
  merge_atoms(out);
  return out;
}

double dmd_discrepancy(const EmpiricalDMD& a, const EmpiricalDMD& b) {
  if (a.m != b.m) throw DimensionMismatch("dmd_discrepancy: sample sizes differ");
  std::vector<double> mu, nu;
  for (const auto& x : a.atoms) mu.push_back(x.weight);
  for (const auto& y : b.atoms) nu.push_back(y.weight);
  return prohorov_bipartite(mu, nu, [&](std::size_t i, std::size_t j) {
    const auto& s = a.atoms[i].tri;
    const auto& t = b.atoms[j].tri;
    double worst = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) worst = std::max(worst, std::abs(s[k] - t[k]));
    return worst;
  });
}

double polynomial_eval(const EmpiricalDMD& dmd, const std::vector<double>& lambdas) {
  if (lambdas.size() != tri_size(dmd.m)) throw DimensionMismatch("polynomial_eval: wrong number of rates");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("polynomial_eval: rates must be finite and >= 0");
  double s = 0.0;
  for (const auto& atom : dmd.atoms) {
    double f = 1.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) f *= std::exp(-lambdas[k] * atom.tri[k]);
    s += atom.weight * f;
  }
  return s;
}

double polynomial_eval(const FiniteMMSpace& space, std::size_t m, const std::vector<double>& lambdas) {
  check_m(m);
  if (lambdas.size() != tri_size(m)) throw DimensionMismatch("polynomial_eval: wrong number of rates");
  return polynomial_eval(dmd_exact(space, m), lambdas);
}

}  // namespace mms
