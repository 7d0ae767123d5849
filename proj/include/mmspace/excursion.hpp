#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "mmspace/metrics.hpp"
#include "mmspace/space.hpp"

namespace mms {

struct Tail {
  enum class Kind { Compact, Linear };
  Kind kind = Kind::Compact;
  double slope = 0.0;  // Linear only; > 0
};

enum class ExcursionClass { CompactlySupported, Transient };

/// Continuous piecewise-linear excursion: breakpoints (t, y) starting at
/// (0, 0), strictly increasing t, y >= 0. A compact tail ends at height 0
/// and stays there; a linear tail continues upward with the given slope.
class PLExcursion {
 public:
  PLExcursion(std::vector<std::pair<double, double>> breakpoints, Tail tail);

  static PLExcursion compact(std::vector<std::pair<double, double>> breakpoints);
  static PLExcursion transient(std::vector<std::pair<double, double>> breakpoints, double slope);

  const std::vector<std::pair<double, double>>& breakpoints() const { return bp_; }
  const Tail& tail() const { return tail_; }

  double evaluate(double t) const;
  /// Exact minimum over [s, t], s <= t.
  double interval_min(double s, double t) const;
  /// e(s) + e(t) - 2 min over [s ^ t, s v t].
  double tree_distance(double s, double t) const;
  ExcursionClass classify() const;
  bool transient() const { return tail_.kind == Tail::Kind::Linear; }
  /// Excursion length: last breakpoint time if compact, +inf if transient.
  double zeta() const;
  /// sup { s : e(s) < R } for transient excursions.
  double last_exit(double R) const;

 private:
  std::vector<std::pair<double, double>> bp_;
  Tail tail_;
};

/// max over pairs of radii of | r'(xi(R1), xi(R2)) - |R1 - R2| |.
double end_ray_error(const PLExcursion& e, const std::vector<double>& radii);

inline constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();

/// Discretized glue image together with the grid it came from.
struct GlueResult {
  FiniteMMSpace space;
  std::vector<double> grid_times;
  std::vector<std::size_t> grid_class;  // kDropped for grid points above height R
};

/// Grid 0, h, 2h, ... up to T (the excursion length, or the last exit from R
/// for transient excursions), plus T itself if it is off the grid. Every
/// grid time carries mass h and the off-grid end carries its remainder.
/// Grid times at tree distance 0 form one point; the root is the class of 0.
/// The result is restricted to the closed R-ball; grid points above height R
/// would carry no mass and are left out.
GlueResult glue_detailed(const PLExcursion& e, double h, double R);
FiniteMMSpace glue_discretize(const PLExcursion& e, double h, double R);

/// Pairs the classes of grid times that are nearest to each other in time.
Pairing time_correspondence(const GlueResult& a, const GlueResult& b);

}  // namespace mms
