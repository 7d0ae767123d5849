#include "mmspace/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmspace/error.hpp"

namespace mms {

PLExcursion::PLExcursion(std::vector<std::pair<double, double>> breakpoints, Tail tail)
    : bp_(std::move(breakpoints)), tail_(tail) {
  if (bp_.empty() || bp_[0].first != 0.0 || bp_[0].second != 0.0)
    throw ValidationError("excursion: first breakpoint must be (0, 0)");
  bool positive = false;
  for (std::size_t k = 0; k < bp_.size(); ++k) {
    const auto [t, y] = bp_[k];
    if (!std::isfinite(t) || !std::isfinite(y) || y < 0.0)
      throw ValidationError("excursion: breakpoints must be finite with nonnegative height");
    if (k > 0 && !(t > bp_[k - 1].first)) throw ValidationError("excursion: breakpoint times must increase strictly");
    positive = positive || y > 0.0;
  }
  if (tail_.kind == Tail::Kind::Compact) {
    if (bp_.back().second != 0.0) throw ValidationError("excursion: compact tail must end at height 0");
    if (!positive) throw ValidationError("excursion: identically zero");
  } else if (!(tail_.slope > 0.0) || !std::isfinite(tail_.slope)) {
    throw ValidationError("excursion: transient tail needs a positive slope");
  }
}

PLExcursion PLExcursion::compact(std::vector<std::pair<double, double>> breakpoints) {
  return PLExcursion(std::move(breakpoints), Tail{Tail::Kind::Compact, 0.0});
}

PLExcursion PLExcursion::transient(std::vector<std::pair<double, double>> breakpoints, double slope) {
  return PLExcursion(std::move(breakpoints), Tail{Tail::Kind::Linear, slope});
}

double PLExcursion::evaluate(double t) const {
  if (!(t >= 0.0)) throw ValidationError("excursion: negative time");
  const auto& [tl, yl] = bp_.back();
  if (t >= tl) return transient() ? yl + tail_.slope * (t - tl) : 0.0;
  const auto it = std::upper_bound(bp_.begin(), bp_.end(), t,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& [t1, y1] = *(it - 1);
  if (t == t1) return y1;
  const auto& [t2, y2] = *it;
  return y1 + (y2 - y1) * ((t - t1) / (t2 - t1));
}

double PLExcursion::interval_min(double s, double t) const {
  if (s > t) std::swap(s, t);
  double m = std::min(evaluate(s), evaluate(t));
  auto after = [&](double v) {
    return static_cast<std::size_t>(
        std::upper_bound(bp_.begin(), bp_.end(), v,
                         [](double x, const std::pair<double, double>& p) { return x < p.first; }) -
        bp_.begin());
  };
  const std::size_t lo = after(s);  // first breakpoint strictly after s
  const std::size_t hi = static_cast<std::size_t>(
      std::lower_bound(bp_.begin(), bp_.end(), t,
                       [](const std::pair<double, double>& p, double x) { return p.first < x; }) -
      bp_.begin());  // first breakpoint at or after t
  for (std::size_t k = lo; k < hi; ++k) m = std::min(m, bp_[k].second);
  return m;
}

double PLExcursion::tree_distance(double s, double t) const {
  if (s == t) return 0.0;
  const double m = interval_min(s, t);
  return (evaluate(s) - m) + (evaluate(t) - m);
}

ExcursionClass PLExcursion::classify() const {
  return transient() ? ExcursionClass::Transient : ExcursionClass::CompactlySupported;
}

double PLExcursion::zeta() const { return transient() ? kInfinity : bp_.back().first; }

double PLExcursion::last_exit(double R) const {
  if (!transient()) throw NotTransient("last_exit: excursion is compactly supported");
  if (!(R > 0.0)) throw ValidationError("last_exit: R must be positive");
  const auto& [tl, yl] = bp_.back();
  if (yl < R) return tl + (R - yl) / tail_.slope;
  std::size_t k = bp_.size() - 1;
  while (bp_[k].second >= R) --k;  // bp_[0] has height 0 < R
  const auto& [t1, y1] = bp_[k];
  const auto& [t2, y2] = bp_[k + 1];
  return t1 + (R - y1) * ((t2 - t1) / (y2 - y1));
}

double end_ray_error(const PLExcursion& e, const std::vector<double>& radii) {
  if (!e.transient()) throw NotTransient("end_ray_error: excursion is compactly supported");
  std::vector<double> xi;
  for (double R : radii) xi.push_back(e.last_exit(R));
  double worst = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t j = i + 1; j < radii.size(); ++j)
      worst = std::max(worst, std::abs(e.tree_distance(xi[i], xi[j]) - std::abs(radii[i] - radii[j])));
  return worst;
}

namespace {

// Walks forward through the breakpoints; queries must be nondecreasing.
class Sweep {
 public:
  explicit Sweep(const PLExcursion& e) : e_(e), bp_(e.breakpoints()) {}

  // Returns e(t) and lowers `low` to the minimum over (previous t, t).
  double advance(double t, double& low) {
    while (next_ < bp_.size() && bp_[next_].first < t) low = std::min(low, bp_[next_++].second);
    if (next_ < bp_.size() && bp_[next_].first == t) return bp_[next_].second;
    if (next_ == bp_.size()) return e_.evaluate(t);
    const auto& [t1, y1] = bp_[next_ - 1];
    const auto& [t2, y2] = bp_[next_];
    return y1 + (y2 - y1) * ((t - t1) / (t2 - t1));
  }

 private:
  const PLExcursion& e_;
  const std::vector<std::pair<double, double>>& bp_;
  std::size_t next_ = 1;
};

}  // namespace

GlueResult glue_detailed(const PLExcursion& e, double h, double R) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("glue: step must be positive");
  if (!(R > 0.0)) throw ValidationError("glue: R must be positive");
  const double T = e.transient() ? e.last_exit(R) : e.zeta();
  auto K = static_cast<std::size_t>(std::floor(T / h));
  while (static_cast<double>(K + 1) * h <= T) ++K;
  while (K > 0 && static_cast<double>(K) * h > T) --K;

  std::vector<double> times, weights;
  times.reserve(K + 2);
  for (std::size_t k = 0; k <= K; ++k) {
    times.push_back(static_cast<double>(k) * h);
    weights.push_back(h);
  }
  if (T > times.back()) {
    weights.push_back(T - times.back());
    times.push_back(T);
  }

  std::vector<std::size_t> grid_class(times.size(), kDropped);
  std::vector<double> heights, gaps, mass;
  struct Entry {
    double height;
    std::size_t cls;
  };
  std::vector<Entry> stack;
  Sweep sweep(e);
  double prev_y = 0.0;
  double since_class = kInfinity;  // contour minimum since the last new class
  for (std::size_t k = 0; k < times.size(); ++k) {
    double low = kInfinity;
    const double y = sweep.advance(times[k], low);
    if (k > 0) {
      const double g = std::min({low, prev_y, y});
      since_class = std::min(since_class, g);
      while (!stack.empty() && stack.back().height > g) stack.pop_back();
    }
    prev_y = y;
    if (y > R) continue;
    if (!stack.empty() && stack.back().height == y) {
      grid_class[k] = stack.back().cls;
    } else {
      grid_class[k] = heights.size();
      if (!heights.empty()) gaps.push_back(since_class);
      since_class = kInfinity;
      heights.push_back(y);
      mass.push_back(0.0);
      stack.push_back({y, grid_class[k]});
    }
    mass[grid_class[k]] += weights[k];
  }
  FiniteMMSpace space(Metric(ContourMetric(std::move(heights), std::move(gaps))), 0, std::move(mass));
  return GlueResult{restrict(space, R), std::move(times), std::move(grid_class)};
}

FiniteMMSpace glue_discretize(const PLExcursion& e, double h, double R) { return glue_detailed(e, h, R).space; }

Pairing time_correspondence(const GlueResult& a, const GlueResult& b) {
  Pairing p;
  auto nearest = [](const std::vector<double>& ts, double t) {
    const auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.end()) return ts.size() - 1;
    const auto k = static_cast<std::size_t>(it - ts.begin());
    if (k > 0 && t - ts[k - 1] <= ts[k] - t) return k - 1;
    return k;
  };
  for (std::size_t k = 0; k < a.grid_times.size(); ++k) {
    const std::size_t j = nearest(b.grid_times, a.grid_times[k]);
    if (a.grid_class[k] != kDropped && b.grid_class[j] != kDropped) p.emplace_back(a.grid_class[k], b.grid_class[j]);
  }
  for (std::size_t k = 0; k < b.grid_times.size(); ++k) {
    const std::size_t j = nearest(a.grid_times, b.grid_times[k]);
    if (b.grid_class[k] != kDropped && a.grid_class[j] != kDropped) p.emplace_back(a.grid_class[j], b.grid_class[k]);
  }
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

}  // namespace mms
