#include "mmspace/space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>

#include "mmspace/error.hpp"

namespace mms {

FiniteMMSpace::FiniteMMSpace(Metric metric, std::size_t root, std::vector<double> mass)
    : metric_(std::move(metric)), root_(root), mass_(std::move(mass)) {
  if (mass_.size() != metric_.size())
    throw DimensionMismatch("space: mass vector has " + std::to_string(mass_.size()) + " entries for " +
                            std::to_string(metric_.size()) + " points");
  if (root_ >= mass_.size()) throw ValidationError("space: root index out of range");
  for (double w : mass_)
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("space: masses must be finite and nonnegative");
}

FiniteMMSpace FiniteMMSpace::from_dense(std::size_t n, std::vector<double> dist, std::size_t root,
                                        std::vector<double> mass) {
  return FiniteMMSpace(Metric(DenseMetric(n, std::move(dist))), root, std::move(mass));
}

double FiniteMMSpace::total_mass() const {
  double s = 0.0;
  for (double w : mass_) s += w;
  return s;
}

FiniteMMSpace with_mass(const FiniteMMSpace& space, std::vector<double> mass) {
  return FiniteMMSpace(space.metric(), space.root(), std::move(mass));
}

FiniteMMSpace restrict(const FiniteMMSpace& space, double R) {
  if (!(R >= 0.0)) throw ValidationError("restrict: radius must be nonnegative");
  std::vector<double> mass = space.masses();
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (space.root_dist(i) > R) mass[i] = 0.0;
  return with_mass(space, std::move(mass));
}

FiniteMMSpace rescale(const FiniteMMSpace& space, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ValidationError("rescale: factors must be positive and finite");
  std::vector<double> mass = space.masses();
  for (double& w : mass) w *= beta;
  return FiniteMMSpace(space.metric().scaled(alpha), space.root(), std::move(mass));
}

std::vector<std::size_t> support_indices(const FiniteMMSpace& space) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (space.mass(i) > 0.0) out.push_back(i);
  return out;
}

std::vector<std::size_t> support_with_root(const FiniteMMSpace& space) {
  std::vector<std::size_t> out{space.root()};
  for (std::size_t i = 0; i < space.size(); ++i)
    if (i != space.root() && space.mass(i) > 0.0) out.push_back(i);
  return out;
}

double max_root_distance(const FiniteMMSpace& space) {
  double r = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) r = std::max(r, space.root_dist(i));
  return r;
}

namespace {

using Hit = std::pair<double, std::size_t>;

// Support points within closed distance delta of center, sorted by (d, j).
std::vector<Hit> ball_hits(const FiniteMMSpace& space, std::size_t center, double delta) {
  std::vector<Hit> hits;
  space.metric().visit([&](const auto& m, double scale) {
    using M = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<M, ContourMetric>) {
      // Once the contour between center and t has dipped more than delta
      // below the center height, every later point is farther than delta.
      const double hc = m.height(center);
      auto take = [&](std::size_t t) {
        if (space.mass(t) > 0.0) {
          const double d = scale * m(center, t);
          if (d <= delta) hits.emplace_back(d, t);
        }
      };
      take(center);
      double g = kInfinity;
      for (std::size_t t = center + 1; t < m.size(); ++t) {
        g = std::min(g, m.gap(t - 1));
        if (scale * (hc - std::min(hc, g)) > delta) break;
        take(t);
      }
      g = kInfinity;
      for (std::size_t t = center; t-- > 0;) {
        g = std::min(g, m.gap(t));
        if (scale * (hc - std::min(hc, g)) > delta) break;
        take(t);
      }
    } else {
      for (std::size_t j = 0; j < space.size(); ++j) {
        if (space.mass(j) <= 0.0) continue;
        const double d = scale * m(center, j);
        if (d <= delta) hits.emplace_back(d, j);
      }
    }
  });
  std::sort(hits.begin(), hits.end());
  return hits;
}

}  // namespace

double ball_mass(const FiniteMMSpace& space, std::size_t center, double delta) {
  if (center >= space.size()) throw ValidationError("ball_mass: center out of range");
  double s = 0.0;
  for (const auto& [d, j] : ball_hits(space, center, delta)) s += space.mass(j);
  return s;
}

double lower_mass(const FiniteMMSpace& space, double delta, double R) {
  if (!(delta > 0.0) || !(R > 0.0)) throw ValidationError("lower_mass: delta and R must be positive");
  double best = kInfinity;
  for (std::size_t x = 0; x < space.size(); ++x) {
    if (space.mass(x) <= 0.0 || !(space.root_dist(x) < R)) continue;
    best = std::min(best, ball_mass(space, x, delta));
  }
  return best;
}

double global_lower_mass(const FiniteMMSpace& space, double delta) {
  return lower_mass(space, delta, max_root_distance(space) + 1.0);
}

double LowerMassProfile::operator()(double delta) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), delta);
  if (it == breakpoints.begin()) return values.front();
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

LowerMassProfile lower_mass_profile(const FiniteMMSpace& space, double R, double delta_max) {
  if (!(R > 0.0)) throw ValidationError("lower_mass_profile: R must be positive");
  std::vector<std::size_t> centers;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.mass(x) > 0.0 && space.root_dist(x) < R) centers.push_back(x);

  LowerMassProfile out;
  out.breakpoints.push_back(0.0);
  if (centers.empty()) {
    out.values.push_back(kInfinity);
    return out;
  }

  // Event (d, center slot, prefix mass): from d on, that center's ball holds
  // prefix mass. Prefix sums follow ball_mass's summation order exactly.
  struct Event {
    double d;
    std::size_t slot;
    double value;
  };
  std::vector<Event> events;
  std::multiset<double> current;
  std::vector<std::multiset<double>::iterator> where(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto hits = ball_hits(space, centers[c], delta_max);
    double s = 0.0;
    std::size_t k = 0;
    while (k < hits.size()) {
      const double d = hits[k].first;
      while (k < hits.size() && hits[k].first == d) s += space.mass(hits[k++].second);
      if (d == 0.0)
        where[c] = current.insert(s);
      else
        events.push_back({d, c, s});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.d < b.d; });
  out.values.push_back(*current.begin());
  std::size_t k = 0;
  while (k < events.size()) {
    const double d = events[k].d;
    while (k < events.size() && events[k].d == d) {
      const Event& e = events[k++];
      current.erase(where[e.slot]);
      where[e.slot] = current.insert(e.value);
    }
    const double v = *current.begin();
    if (v != out.values.back()) {
      out.breakpoints.push_back(d);
      out.values.push_back(v);
    }
  }
  return out;
}

bool check_equivalence(const FiniteMMSpace& a, const FiniteMMSpace& b, double tol) {
  const auto sa = support_indices(a);
  const auto sb = support_indices(b);
  if (sa.size() > kEquivalenceLimit || sb.size() > kEquivalenceLimit)
    throw SizeLimitExceeded("check_equivalence: supports larger than " + std::to_string(kEquivalenceLimit) +
                            " points");
  const auto pa = support_with_root(a);
  const auto pb = support_with_root(b);
  if (pa.size() != pb.size() || sa.size() != sb.size()) return false;
  const std::size_t n = pa.size();
  std::vector<std::size_t> image(n);
  std::vector<bool> used(n, false);
  image[0] = 0;
  used[0] = true;
  if (std::abs(a.mass(pa[0]) - b.mass(pb[0])) > tol) return false;

  std::function<bool(std::size_t)> extend = [&](std::size_t k) -> bool {
    if (k == n) return true;
    for (std::size_t c = 1; c < n; ++c) {
      if (used[c] || std::abs(a.mass(pa[k]) - b.mass(pb[c])) > tol) continue;
      bool ok = true;
      for (std::size_t p = 0; p < k && ok; ++p)
        ok = std::abs(a.dist(pa[k], pa[p]) - b.dist(pb[c], pb[image[p]])) <= tol;
      if (!ok) continue;
      used[c] = true;
      image[k] = c;
      if (extend(k + 1)) return true;
      used[c] = false;
    }
    return false;
  };
  return extend(1);
}

}  // namespace mms
