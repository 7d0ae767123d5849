#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "mmspace/error.hpp"
#include "mmspace/metrics.hpp"
#include "mmspace/rng.hpp"

namespace mms {

namespace {

constexpr double kUnionTolerance = 1e-9;
// Upper limit on |PA| * |PB| * |pairing| for building one union metric and
// on |PA| * |PB| * (|PA| + |PB|) for one greedy restart.
constexpr double kWorkBudget = 1e8;
constexpr std::uint64_t kGreedySeed = 0x6a09e667f3bcc909ULL;

double mass_slack(const FiniteMMSpace& a, const FiniteMMSpace& b) {
  return 1e-12 * std::max({1.0, a.total_mass(), b.total_mass()});
}

double mass_gap(const FiniteMMSpace& a, const FiniteMMSpace& b) {
  return std::abs(a.total_mass() - b.total_mass());
}

Pairing with_root(const FiniteMMSpace& a, const FiniteMMSpace& b, Pairing p) {
  for (const auto& [i, j] : p)
    if (i >= a.size() || j >= b.size()) throw InvalidPairing("pairing index out of range");
  const std::pair<std::size_t, std::size_t> roots{a.root(), b.root()};
  if (std::find(p.begin(), p.end(), roots) == p.end()) p.insert(p.begin(), roots);
  return p;
}

Pairing canonical(Pairing p) {
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

std::vector<std::size_t> by_root_distance(const FiniteMMSpace& s) {
  auto pts = support_with_root(s);
  std::stable_sort(pts.begin(), pts.end(),
                   [&](std::size_t x, std::size_t y) { return s.root_dist(x) < s.root_dist(y); });
  return pts;
}

}  // namespace

bool union_metric_valid(const FiniteMMSpace& a, const FiniteMMSpace& b, const UnionMetric& u, double tol) {
  const std::size_t na = u.a_points.size(), nb = u.b_points.size();
  if (u.cross.size() != na * nb) return false;
  for (double c : u.cross)
    if (!(c >= 0.0) || !std::isfinite(c)) return false;
  for (std::size_t x = 0; x < na; ++x)
    for (std::size_t x2 = x + 1; x2 < na; ++x2) {
      const double d = a.dist(u.a_points[x], u.a_points[x2]);
      for (std::size_t y = 0; y < nb; ++y) {
        const double c1 = u.at(x, y), c2 = u.at(x2, y);
        if (std::abs(c1 - c2) > d + tol || d > c1 + c2 + tol) return false;
      }
    }
  for (std::size_t y = 0; y < nb; ++y)
    for (std::size_t y2 = y + 1; y2 < nb; ++y2) {
      const double d = b.dist(u.b_points[y], u.b_points[y2]);
      for (std::size_t x = 0; x < na; ++x) {
        const double c1 = u.at(x, y), c2 = u.at(x, y2);
        if (std::abs(c1 - c2) > d + tol || d > c1 + c2 + tol) return false;
      }
    }
  return true;
}

UnionMetric build_union_metric(const FiniteMMSpace& a, const FiniteMMSpace& b, Pairing pairing) {
  UnionMetric u;
  u.pairing = with_root(a, b, std::move(pairing));
  u.a_points = support_with_root(a);
  u.b_points = support_with_root(b);
  const auto& P = u.pairing;
  const std::size_t np = P.size(), na = u.a_points.size(), nb = u.b_points.size();

  double eta = 0.0;
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t q = p + 1; q < np; ++q)
      eta = std::max(eta, std::abs(a.dist(P[p].first, P[q].first) - b.dist(P[p].second, P[q].second)));
  u.eta = eta;

  std::vector<double> to_a(na * np), to_b(np * nb);
  for (std::size_t x = 0; x < na; ++x)
    for (std::size_t p = 0; p < np; ++p) to_a[x * np + p] = a.dist(u.a_points[x], P[p].first);
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t y = 0; y < nb; ++y) to_b[p * nb + y] = b.dist(P[p].second, u.b_points[y]);
  u.cross.assign(na * nb, kInfinity);
  for (std::size_t x = 0; x < na; ++x) {
    double* row = u.cross.data() + x * nb;
    for (std::size_t p = 0; p < np; ++p) {
      const double left = to_a[x * np + p];
      const double* right = to_b.data() + p * nb;
      for (std::size_t y = 0; y < nb; ++y) row[y] = std::min(row[y], left + right[y]);
    }
    for (std::size_t y = 0; y < nb; ++y) row[y] += eta / 2.0;
  }
  u.root_gap = u.at(0, 0);
  if (!union_metric_valid(a, b, u, kUnionTolerance))
    throw InvalidPairing("union metric violates the triangle inequality");
  return u;
}

UnionMetric union_metric_from_common(const FiniteMMSpace& a, const FiniteMMSpace& b, const DistanceFn& common) {
  UnionMetric u;
  u.a_points = support_with_root(a);
  u.b_points = support_with_root(b);
  u.cross.resize(u.a_points.size() * u.b_points.size());
  for (std::size_t x = 0; x < u.a_points.size(); ++x)
    for (std::size_t y = 0; y < u.b_points.size(); ++y)
      u.cross[x * u.b_points.size() + y] = common(u.a_points[x], u.b_points[y]);
  u.root_gap = u.at(0, 0);
  if (!union_metric_valid(a, b, u, kUnionTolerance))
    throw InvalidPairing("declared common space does not extend both metrics");
  return u;
}

void for_each_pairing(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params,
                      const std::vector<Pairing>& hints, const std::function<bool(const Pairing&)>& visit) {
  const auto oa = by_root_distance(a);
  const auto ob = by_root_distance(b);
  const double cells = static_cast<double>(oa.size()) * static_cast<double>(ob.size());
  std::set<Pairing> seen;
  // Returns false once the visitor asks to stop.
  auto emit = [&](Pairing p) {
    p = canonical(with_root(a, b, std::move(p)));
    if (cells * static_cast<double>(p.size()) > kWorkBudget) return true;
    if (!seen.insert(p).second) return true;
    return visit(p);
  };

  if (!emit({})) return;
  for (const auto& h : hints)
    if (!emit(h)) return;

  {
    Pairing p;
    auto rank = [](std::size_t k, std::size_t from, std::size_t to) {
      return from <= 1 ? 0 : static_cast<std::size_t>(std::llround(static_cast<double>(k) * (to - 1) / (from - 1)));
    };
    for (std::size_t k = 0; k < oa.size(); ++k) p.emplace_back(oa[k], ob[rank(k, oa.size(), ob.size())]);
    for (std::size_t k = 0; k < ob.size(); ++k) p.emplace_back(oa[rank(k, ob.size(), oa.size())], ob[k]);
    if (!emit(std::move(p))) return;
  }

  const double ma = a.total_mass(), mb = b.total_mass();
  if (ma > 0.0 && mb > 0.0) {
    // North-west corner coupling of the normalized masses along root order.
    Pairing p;
    std::size_t i = 0, j = 0;
    double ra = a.mass(oa[0]) / ma, rb = b.mass(ob[0]) / mb;
    while (i < oa.size() && j < ob.size()) {
      if (ra > 0.0 && rb > 0.0) p.emplace_back(oa[i], ob[j]);
      const double take = std::min(ra, rb);
      ra -= take;
      rb -= take;
      if (ra <= 1e-15) {
        if (++i < oa.size()) ra = a.mass(oa[i]) / ma;
      }
      if (rb <= 1e-15) {
        if (++j < ob.size()) rb = b.mass(ob[j]) / mb;
      }
    }
    if (!emit(std::move(p))) return;
  }

  if (cells * static_cast<double>(oa.size() + ob.size()) <= kWorkBudget) {
    for (std::size_t r = 0; r < params.greedy_restarts; ++r) {
      std::vector<std::size_t> order_a(oa.begin() + 1, oa.end()), order_b(ob.begin() + 1, ob.end());
      if (r > 0) {
        Rng rng(split_seed(kGreedySeed, r));
        std::shuffle(order_a.begin(), order_a.end(), rng);
        std::shuffle(order_b.begin(), order_b.end(), rng);
      }
      Pairing p{{a.root(), b.root()}};
      auto distortion = [&](std::size_t x, std::size_t y) {
        double worst = 0.0;
        for (const auto& [i, j] : p) worst = std::max(worst, std::abs(a.dist(x, i) - b.dist(y, j)));
        return worst;
      };
      auto place_a = [&] {
        for (std::size_t x : order_a) {
          std::size_t best = ob[0];
          double best_d = kInfinity;
          for (std::size_t y : ob) {
            const double d = distortion(x, y);
            if (d < best_d) best_d = d, best = y;
          }
          p.emplace_back(x, best);
        }
      };
      auto place_b = [&] {
        for (std::size_t y : order_b) {
          bool covered = false;
          for (const auto& pr : p) covered = covered || pr.second == y;
          if (covered) continue;
          std::size_t best = oa[0];
          double best_d = kInfinity;
          for (std::size_t x : oa) {
            const double d = distortion(x, y);
            if (d < best_d) best_d = d, best = x;
          }
          p.emplace_back(best, y);
        }
      };
      if (r % 2 == 0) {
        place_a();
        place_b();
      } else {
        // Mirror image: fill B first, then cover the remaining A points.
        for (std::size_t y : order_b) {
          std::size_t best = oa[0];
          double best_d = kInfinity;
          for (std::size_t x : oa) {
            const double d = distortion(x, y);
            if (d < best_d) best_d = d, best = x;
          }
          p.emplace_back(best, y);
        }
        for (std::size_t x : order_a) {
          bool covered = false;
          for (const auto& pr : p) covered = covered || pr.first == x;
          if (covered) continue;
          std::size_t best = ob[0];
          double best_d = kInfinity;
          for (std::size_t y : ob) {
            const double d = distortion(x, y);
            if (d < best_d) best_d = d, best = y;
          }
          p.emplace_back(x, best);
        }
      }
      if (!emit(std::move(p))) return;
    }
  }

  const auto sa = support_indices(a), sb = support_indices(b);
  if (sa.size() <= params.exhaustive_limit && sb.size() <= params.exhaustive_limit && params.max_pairing_size > 1) {
    Pairing all;
    for (std::size_t x : sa)
      for (std::size_t y : sb) all.emplace_back(x, y);
    const std::size_t max_extra = std::min(params.max_pairing_size - 1, all.size());
    std::vector<std::size_t> pick;
    for (std::size_t size = 1; size <= max_extra; ++size) {
      pick.resize(size);
      std::iota(pick.begin(), pick.end(), 0);
      for (;;) {
        Pairing p;
        for (std::size_t k : pick) p.push_back(all[k]);
        if (!emit(std::move(p))) return;
        // Next combination in lexicographic order.
        std::size_t k = size;
        while (k > 0 && pick[k - 1] == all.size() - size + (k - 1)) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t t = k; t < size; ++t) pick[t] = pick[t - 1] + 1;
      }
    }
  }
}

double union_prohorov(const FiniteMMSpace& a, const FiniteMMSpace& b, const UnionMetric& u) {
  std::vector<double> mu(u.a_points.size()), nu(u.b_points.size());
  for (std::size_t k = 0; k < mu.size(); ++k) mu[k] = a.mass(u.a_points[k]);
  for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = b.mass(u.b_points[k]);
  return prohorov_bipartite(mu, nu, [&](std::size_t x, std::size_t y) { return u.at(x, y); });
}

double union_hausdorff(const FiniteMMSpace& a, const FiniteMMSpace& b, const UnionMetric& u) {
  std::vector<std::size_t> xa{0}, yb{0};
  for (std::size_t k = 1; k < u.a_points.size(); ++k)
    if (a.mass(u.a_points[k]) > 0.0) xa.push_back(k);
  for (std::size_t k = 1; k < u.b_points.size(); ++k)
    if (b.mass(u.b_points[k]) > 0.0) yb.push_back(k);
  double worst = 0.0;
  for (std::size_t x : xa) {
    double best = kInfinity;
    for (std::size_t y : yb) best = std::min(best, u.at(x, y));
    worst = std::max(worst, best);
  }
  for (std::size_t y : yb) {
    double best = kInfinity;
    for (std::size_t x : xa) best = std::min(best, u.at(x, y));
    worst = std::max(worst, best);
  }
  return worst;
}

namespace {

enum class Term { Prohorov, Ghp };

// Value of one candidate embedding, or +inf once it is known to be >= cutoff.
double evaluate(Term term, const FiniteMMSpace& a, const FiniteMMSpace& b, const UnionMetric& u, double cutoff) {
  std::vector<double> mu(u.a_points.size()), nu(u.b_points.size());
  for (std::size_t k = 0; k < mu.size(); ++k) mu[k] = a.mass(u.a_points[k]);
  for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = b.mass(u.b_points[k]);
  const auto cost = [&](std::size_t x, std::size_t y) { return u.at(x, y); };
  double base = 0.0;
  if (term == Term::Ghp) {
    base = union_hausdorff(a, b, u) + u.root_gap;
    if (base >= cutoff) return kInfinity;
  }
  if (std::isfinite(cutoff) && !prohorov_feasible(mu, nu, cost, cutoff - base)) return kInfinity;
  return base + prohorov_bipartite(mu, nu, cost);
}

DistanceReport search(Term term, const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params,
                      const SearchHints& hints) {
  const double lb = mass_gap(a, b) + mass_slack(a, b);
  DistanceReport rep;
  rep.value = kInfinity;
  bool done = false;
  for (const auto& u : hints.embeddings) {
    const double v = evaluate(term, a, b, u, rep.value);
    if (v < rep.value) {
      rep.value = v;
      rep.pairing.clear();
    }
    if (rep.value <= lb) {
      done = true;
      break;
    }
  }
  if (!done) {
    for_each_pairing(a, b, params, hints.pairings, [&](const Pairing& p) {
      const UnionMetric u = build_union_metric(a, b, p);
      const double v = evaluate(term, a, b, u, rep.value);
      if (v < rep.value) {
        rep.value = v;
        rep.pairing = u.pairing;
      }
      return rep.value > lb;
    });
  }
  rep.certificate = rep.value <= lb ? "exact" : "upper_bound";
  return rep;
}

}  // namespace

DistanceReport gromov_prohorov_ub(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params,
                                  const SearchHints& hints) {
  return search(Term::Prohorov, a, b, params, hints);
}

DistanceReport ghp_ub(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params,
                      const SearchHints& hints) {
  return search(Term::Ghp, a, b, params, hints);
}

double lower_mass_gap_integral(const FiniteMMSpace& a, const FiniteMMSpace& b) {
  const auto pa = lower_mass_profile(a, max_root_distance(a) + 1.0, 1.0);
  const auto pb = lower_mass_profile(b, max_root_distance(b) + 1.0, 1.0);
  std::vector<double> cuts{0.0, 1.0};
  for (double x : pa.breakpoints)
    if (x < 1.0) cuts.push_back(x);
  for (double x : pb.breakpoints)
    if (x < 1.0) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto inv = [](double m) { return std::isinf(m) ? 0.0 : 1.0 / m; };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double f = std::min(1.0, std::abs(inv(pa(cuts[k])) - inv(pb(cuts[k]))));
    total += f * (cuts[k + 1] - cuts[k]);
  }
  return total;
}

DistanceReport sghp(const FiniteMMSpace& a, const FiniteMMSpace& b, const SearchParams& params,
                    const SearchHints& hints) {
  DistanceReport rep = ghp_ub(a, b, params, hints);
  const double integral = lower_mass_gap_integral(a, b);
  rep.value += integral;
  if (integral > 0.0) rep.certificate = "upper_bound";
  return rep;
}

DistanceReport localized(InnerKind kind, const FiniteMMSpace& a, const FiniteMMSpace& b,
                         const SearchParams& params, const SearchHints& hints) {
  std::vector<double> radii{0.0};
  for (std::size_t i : support_indices(a)) radii.push_back(a.root_dist(i));
  for (std::size_t j : support_indices(b)) radii.push_back(b.root_dist(j));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  // Full-space embeddings stay valid for every restriction (only masses
  // change), so they are built once. Exhaustive subsets are left to the
  // per-radius search, which only runs when the restricted supports are small.
  std::vector<UnionMetric> cached = hints.embeddings;
  SearchParams structured = params;
  structured.exhaustive_limit = 0;
  for_each_pairing(a, b, structured, hints.pairings, [&](const Pairing& p) {
    cached.push_back(build_union_metric(a, b, p));
    return true;
  });

  const Term term = kind == InnerKind::GP ? Term::Prohorov : Term::Ghp;
  std::size_t favourite = 0;
  bool all_exact = true;
  std::vector<double> inner(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const FiniteMMSpace ar = restrict(a, radii[k]);
    const FiniteMMSpace br = restrict(b, radii[k]);
    const double lb = mass_gap(ar, br) + mass_slack(ar, br);
    double v = kInfinity;
    if (!cached.empty()) {
      v = evaluate(term, ar, br, cached[favourite], v);
      for (std::size_t c = 0; c < cached.size() && v > lb; ++c) {
        if (c == favourite) continue;
        const double w = evaluate(term, ar, br, cached[c], v);
        if (w < v) v = w, favourite = c;
      }
    }
    if (v > lb && support_indices(ar).size() <= params.exhaustive_limit &&
        support_indices(br).size() <= params.exhaustive_limit) {
      SearchHints local;
      local.pairings = hints.pairings;
      v = std::min(v, search(term, ar, br, params, local).value);
    }
    all_exact = all_exact && v <= lb;
    if (kind == InnerKind::SGHP) {
      const double integral = lower_mass_gap_integral(ar, br);
      if (integral > 0.0) all_exact = false;
      v += integral;
    }
    inner[k] = std::min(1.0, v);
  }

  DistanceReport rep;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k)
    total += inner[k] * (std::exp(-radii[k]) - std::exp(-radii[k + 1]));
  total += inner.back() * std::exp(-radii.back());
  rep.value = total;
  rep.certificate = all_exact ? "exact" : "upper_bound";
  return rep;
}

}  // namespace mms
