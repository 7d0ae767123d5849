#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "mmspace/error.hpp"
#include "mmspace/flow.hpp"
#include "mmspace/metrics.hpp"

namespace mms {

namespace {

void check_masses(const std::vector<double>& m) {
  for (double w : m)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("prohorov: masses must be finite and >= 0");
}

struct Arc {
  double cost;
  std::uint32_t s;
  std::uint32_t t;
};

// Transport problem between the positive parts of mu and nu. deficiency(c)
// is max over A of the larger of mu(A) - nu(A^c) and nu(A) - mu(A^c): by
// max-flow/min-cut it equals max(|mu|, |nu|) minus the largest flow that
// only uses arcs of cost <= c.
class Transport {
 public:
  Transport(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& cost) {
    check_masses(mu);
    check_masses(nu);
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i] > 0.0) {
        left_.push_back(mu[i]);
        left_total_ += mu[i];
      }
    for (std::size_t j = 0; j < nu.size(); ++j)
      if (nu[j] > 0.0) {
        right_.push_back(nu[j]);
        right_total_ += nu[j];
      }
    snap_ = 1e-12 * std::max({1.0, left_total_, right_total_});
    std::vector<std::size_t> li, rj;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (mu[i] > 0.0) li.push_back(i);
    for (std::size_t j = 0; j < nu.size(); ++j)
      if (nu[j] > 0.0) rj.push_back(j);
    arcs_.reserve(li.size() * rj.size());
    for (std::size_t s = 0; s < li.size(); ++s)
      for (std::size_t t = 0; t < rj.size(); ++t) {
        const double c = cost(li[s], rj[t]);
        if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("prohorov: distances must be finite and >= 0");
        arcs_.push_back({c, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t)});
      }
    std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) { return a.cost < b.cost; });
  }

  bool degenerate() const { return left_.empty() || right_.empty(); }
  double gap() const { return snap(std::abs(left_total_ - right_total_)); }
  const std::vector<Arc>& arcs() const { return arcs_; }

  double deficiency(double c) const {
    if (degenerate()) return gap();
    const std::size_t used = static_cast<std::size_t>(
        std::upper_bound(arcs_.begin(), arcs_.end(), c, [](double v, const Arc& a) { return v < a.cost; }) -
        arcs_.begin());
    const std::size_t ns = left_.size(), nt = right_.size();
    const std::size_t source = ns + nt, sink = source + 1;
    MaxFlow flow(ns + nt + 2, 1e-15 * std::max({1.0, left_total_, right_total_}));
    for (std::size_t s = 0; s < ns; ++s) flow.add_edge(source, s, left_[s]);
    for (std::size_t t = 0; t < nt; ++t) flow.add_edge(ns + t, sink, right_[t]);
    const double inf = left_total_ + right_total_ + 1.0;
    for (std::size_t k = 0; k < used; ++k) flow.add_edge(arcs_[k].s, ns + arcs_[k].t, inf);
    const double f = flow.run(source, sink);
    return snap(std::max(left_total_, right_total_) - f);
  }

 private:
  double snap(double v) const { return v <= snap_ ? 0.0 : v; }

  std::vector<double> left_, right_;
  double left_total_ = 0.0, right_total_ = 0.0;
  double snap_ = 0.0;
  std::vector<Arc> arcs_;
};

}  // namespace

double prohorov_bipartite(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& cost) {
  const Transport tr(mu, nu, cost);
  if (tr.degenerate()) return tr.gap();

  std::vector<double> cand{0.0};
  for (const Arc& a : tr.arcs())
    if (a.cost > cand.back()) cand.push_back(a.cost);

  // deficiency is nonincreasing while candidates increase, so
  // "deficiency(c_k) <= c_k" switches from false to true exactly once.
  std::map<std::size_t, double> memo;
  auto def = [&](std::size_t k) {
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    return memo[k] = tr.deficiency(cand[k]);
  };
  std::size_t lo = 0, hi = cand.size();  // first feasible index lies in [lo, hi]
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (def(mid) <= cand[mid])
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo == cand.size()) return def(cand.size() - 1);
  if (lo == 0) return 0.0;
  return std::min(cand[lo], def(lo - 1));
}

bool prohorov_feasible(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& cost,
                       double eps) {
  if (!(eps >= 0.0)) return false;
  const Transport tr(mu, nu, cost);
  return tr.deficiency(eps) <= eps;
}

double prohorov(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& dist) {
  if (mu.size() != nu.size()) throw DimensionMismatch("prohorov: measures live on different point sets");
  return prohorov_bipartite(mu, nu, dist);
}

double prohorov(const std::vector<double>& mu, const std::vector<double>& nu, const Metric& metric) {
  if (mu.size() != metric.size() || nu.size() != metric.size())
    throw DimensionMismatch("prohorov: measure size does not match the metric");
  return prohorov(mu, nu, [&](std::size_t i, std::size_t j) { return metric(i, j); });
}

double prohorov_oracle(const std::vector<double>& mu, const std::vector<double>& nu, const DistanceFn& dist) {
  if (mu.size() != nu.size()) throw DimensionMismatch("prohorov_oracle: measures live on different point sets");
  check_masses(mu);
  check_masses(nu);
  const std::size_t n = mu.size();
  if (n > kProhorovOracleLimit)
    throw SizeLimitExceeded("prohorov_oracle: more than " + std::to_string(kProhorovOracleLimit) + " points");
  if (n == 0) return 0.0;
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> mass_mu(subsets, 0.0), mass_nu(subsets, 0.0);
  for (std::size_t A = 1; A < subsets; ++A) {
    const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(A));
    mass_mu[A] = mass_mu[A & (A - 1)] + mu[low];
    mass_nu[A] = mass_nu[A & (A - 1)] + nu[low];
  }
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = i == j ? 0.0 : dist(i, j);

  const double scale = std::max({1.0, mass_mu[subsets - 1], mass_nu[subsets - 1]});
  const double tol = 1e-12 * scale;
  std::vector<std::size_t> hood(subsets);
  auto neighbourhoods = [&](double eps) {
    std::vector<std::size_t> ball(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i * n + j] <= eps) ball[i] |= std::size_t{1} << j;
    hood[0] = 0;
    for (std::size_t A = 1; A < subsets; ++A)
      hood[A] = hood[A & (A - 1)] | ball[static_cast<std::size_t>(__builtin_ctzll(A))];
  };
  auto worst_excess = [&](double eps) {
    neighbourhoods(eps);
    double worst = 0.0;
    for (std::size_t A = 0; A < subsets; ++A) {
      worst = std::max(worst, mass_mu[A] - mass_nu[hood[A]]);
      worst = std::max(worst, mass_nu[A] - mass_mu[hood[A]]);
    }
    return worst;
  };

  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) cand.push_back(d[i * n + j]);
  const std::size_t distances = cand.size();
  for (std::size_t k = 0; k < distances; ++k) cand.push_back(worst_excess(cand[k]));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (double eps : cand)
    if (eps >= 0.0 && worst_excess(eps) <= eps + tol) return eps <= tol ? 0.0 : eps;
  return cand.back();
}

double hausdorff(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b, const DistanceFn& dist) {
  if (a.empty() || b.empty()) throw EmptySet("hausdorff: both sets must be nonempty");
  auto directed = [&](const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
    double worst = 0.0;
    for (std::size_t x : from) {
      double best = kInfinity;
      for (std::size_t y : to) best = std::min(best, x == y ? 0.0 : dist(x, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace mms
