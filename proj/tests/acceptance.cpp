// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "mmspace/harness.hpp"
#include "mmspace/metrics.hpp"
#include "mmspace/sampling.hpp"
#include "oracles.hpp"

using namespace mms;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "    failed: " << what << '\n';
    }
  }
  void note(const std::string& what) { detail << "    " << what << '\n'; }
};

int failures = 0;
std::string only;  // comma-separated criterion ids to run; empty runs all

void criterion(int id, const std::string& name, double limit_seconds, const std::function<void(Outcome&)>& body) {
  if (!only.empty() && ("," + only + ",").find("," + std::to_string(id) + ",") == std::string::npos) return;
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0) out.require(secs < limit_seconds, "runtime " + std::to_string(secs) + " s over the limit");
  std::printf("%s [%d] %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), secs);
  std::fputs(out.detail.str().c_str(), stdout);
  std::fflush(stdout);
  failures += !out.pass;
}

DistanceFn of(const FiniteMMSpace& s) {
  return [&s](std::size_t i, std::size_t j) { return s.dist(i, j); };
}

std::vector<double> masses(oracle::Rng& rng, std::size_t n) {
  std::vector<double> m(n);
  for (auto& x : m) x = oracle::unif(rng, 0, 1) < 0.15 ? 0.0 : oracle::unif(rng, 0, 3);
  return m;
}

std::string fmt(double v) { return format_double(v); }

void prohorov_oracle_equivalence(Outcome& out) {
  oracle::Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + oracle::pick(rng, 10);
    const auto s = trial % 4 ? oracle::random_space(rng, n) : oracle::random_lattice_space(rng, n);
    const auto mu = masses(rng, n), nu = masses(rng, n);
    const double flow = prohorov(mu, nu, s.metric());
    worst = std::max(worst, std::abs(flow - prohorov_oracle(mu, nu, of(s))));
  }
  out.note("max |flow - oracle| = " + fmt(worst));
  out.require(worst <= 1e-9, "flow and subset enumeration disagree");
}

void metric_sanity(Outcome& out) {
  oracle::Rng rng(1002);
  double sym = 0.0, tri = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + oracle::pick(rng, 10);
    const auto s = oracle::random_space(rng, n);
    const auto a = masses(rng, n), b = masses(rng, n), c = masses(rng, n);
    const double ab = prohorov(a, b, s.metric()), ba = prohorov(b, a, s.metric());
    const double bc = prohorov(b, c, s.metric()), ac = prohorov(a, c, s.metric());
    sym = std::max(sym, std::abs(ab - ba));
    tri = std::max(tri, ac - ab - bc);
  }
  out.note("max asymmetry " + fmt(sym) + ", max triangle excess " + fmt(tri));
  out.require(sym <= 1e-9, "prohorov symmetry");
  out.require(tri <= 1e-9, "prohorov triangle inequality");
  double self_gp = 0.0, self_loc = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = oracle::random_space(rng, 1 + oracle::pick(rng, 8));
    self_gp = std::max(self_gp, gromov_prohorov_ub(x, x).value);
    self_loc = std::max({self_loc, localized(InnerKind::GP, x, x).value, localized(InnerKind::SGHP, x, x).value});
  }
  out.note("max gp_ub(X, X) " + fmt(self_gp) + ", max localized(X, X) " + fmt(self_loc));
  out.require(self_gp <= 1e-9, "gromov_prohorov_ub(X, X) <= 1e-9");
  out.require(self_loc == 0.0, "localized(X, X) == 0");
}

void projection_consistency(Outcome& out) {
  oracle::Rng rng(1003);
  int mismatches = 0, checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_space(rng, 2 + oracle::pick(rng, 5));
    // Radius strictly between two root distances.
    std::vector<double> rd;
    for (std::size_t i = 0; i < x.size(); ++i) rd.push_back(x.root_dist(i));
    std::sort(rd.begin(), rd.end());
    const std::size_t k = oracle::pick(rng, rd.size());
    const double R = k + 1 < rd.size() ? 0.5 * (rd[k] + rd[k + 1]) : rd[k] + 1.0;
    if (k + 1 < rd.size() && rd[k] == rd[k + 1]) continue;
    for (std::size_t m = 1; m <= 3; ++m) {
      const auto full = dmd_exact(x, m);
      EmpiricalDMD kept;
      kept.m = m;
      for (const auto& a : full.atoms) {
        bool inside = true;
        for (std::size_t j = 0; j < m; ++j) inside = inside && a.tri[j] <= R;  // row 0 = root distances
        if (inside) kept.atoms.push_back(a);
      }
      const auto direct = dmd_exact(restrict(x, R), m);
      bool same = kept.atoms.size() == direct.atoms.size();
      for (std::size_t q = 0; same && q < kept.atoms.size(); ++q)
        same = kept.atoms[q].tri == direct.atoms[q].tri && kept.atoms[q].weight == direct.atoms[q].weight;
      mismatches += !same;
      ++checked;
    }
  }
  out.note(std::to_string(checked) + " (space, radius, m) cases, " + std::to_string(mismatches) + " mismatches");
  out.require(mismatches == 0, "restricted DMD differs from the projected DMD");
}

void lower_mass_characterizations(Outcome& out) {
  oracle::Rng rng(1004);
  int monotone_bad = 0, profile_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = trial % 2 ? oracle::random_space(rng, 2 + oracle::pick(rng, 7))
                             : oracle::random_lattice_space(rng, 2 + oracle::pick(rng, 7));
    std::vector<double> deltas, radii;
    for (std::size_t i = 0; i < x.size(); ++i) {
      radii.push_back(x.root_dist(i));
      for (std::size_t j = 0; j < i; ++j) deltas.push_back(x.dist(i, j));
    }
    // Breakpoints plus points between and beyond them.
    auto expand = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      std::vector<double> out;
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] > 0) out.push_back(v[k]);
        out.push_back(k + 1 < v.size() ? 0.5 * (v[k] + v[k + 1]) : v[k] + 1.0);
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    const auto ds = expand(deltas), rs = expand(radii);
    for (std::size_t a = 0; a < ds.size(); ++a)
      for (std::size_t b = 0; b < rs.size(); ++b) {
        const double v = lower_mass(x, ds[a], rs[b]);
        if (a + 1 < ds.size() && lower_mass(x, ds[a + 1], rs[b]) < v) ++monotone_bad;
        if (b + 1 < rs.size() && lower_mass(x, ds[a], rs[b + 1]) > v) ++monotone_bad;
      }
    const double R = rs[oracle::pick(rng, rs.size())];
    const auto profile = lower_mass_profile(x, R);
    const double top = ds.back() + 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double d = top * k / 100.0;
      const double p = profile(d), v = lower_mass(x, d, R);
      if (!(p == v || (std::isinf(p) && std::isinf(v)))) ++profile_bad;
    }
    for (double d : ds)
      if (!(profile(d) == lower_mass(x, d, R) || std::isinf(lower_mass(x, d, R)))) ++profile_bad;
  }
  out.note("monotonicity violations " + std::to_string(monotone_bad) + ", profile mismatches " +
           std::to_string(profile_bad));
  out.require(monotone_bad == 0, "lower_mass monotone in (delta, R)");
  out.require(profile_bad == 0, "profile equals pointwise lower_mass");
}

void glue_exactness(Outcome& out) {
  const auto tent = glue_discretize(PLExcursion::compact({{0, 0}, {1, 1}, {2, 0}}), 0.5, 2.0);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < tent.size(); ++i) pts.emplace_back(tent.root_dist(i), tent.mass(i));
  std::sort(pts.begin(), pts.end());
  bool line = tent.size() == 3;
  for (std::size_t i = 0; line && i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) line = line && tent.dist(i, j) == std::abs(tent.root_dist(i) - tent.root_dist(j));
  out.require(pts == std::vector<std::pair<double, double>>{{0, 1.0}, {0.5, 1.0}, {1.0, 0.5}} && line,
              "tent glue is the 3-point line with masses 1, 1, 0.5");

  oracle::Rng rng(1005);
  double worst4 = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto e = oracle::random_excursion(rng, 3 + oracle::pick(rng, 10), trial % 2);
    const double end = e.breakpoints().back().first + 1.0;
    auto r = [&](double a, double b) { return e.tree_distance(a, b); };
    for (int q = 0; q < 100; ++q) {
      const double s = oracle::unif(rng, 0, end), t = oracle::unif(rng, 0, end);
      const double u = oracle::unif(rng, 0, end), v = oracle::unif(rng, 0, end);
      worst4 = std::max(worst4, r(s, t) + r(u, v) - std::max(r(s, u) + r(t, v), r(s, v) + r(t, u)));
    }
  }
  out.note("max four-point excess " + fmt(worst4));
  out.require(worst4 <= 1e-12, "four-point condition");

  double worst_ray = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto e = oracle::random_excursion(rng, 2 + oracle::pick(rng, 10), true);
    std::vector<double> radii;
    for (int k = 0; k < 8; ++k) radii.push_back(oracle::unif(rng, 0.01, 6.0));
    worst_ray = std::max(worst_ray, end_ray_error(e, radii));
  }
  out.note("max end-ray error " + fmt(worst_ray));
  out.require(worst_ray <= 1e-12, "end ray is isometric");
}

// e plus eta * phi, where phi is piecewise linear through random knots in
// [0, 1] on [0, span], with phi(0) = 0, max phi = 1 and phi = 0 from span on.
PLExcursion perturb(const PLExcursion& e, double eta, double span, std::uint64_t seed) {
  oracle::Rng rng(seed);
  std::vector<double> knots_t, knots_v;
  const int K = 40;
  for (int k = 0; k <= K; ++k) {
    knots_t.push_back(span * k / K);
    knots_v.push_back(k == 0 || k == K ? 0.0 : oracle::unif(rng, 0, 1));
  }
  knots_v[K / 2] = 1.0;
  auto phi = [&](double t) {
    if (t >= span) return 0.0;
    const std::size_t k = std::min<std::size_t>(K - 1, static_cast<std::size_t>(t / span * K));
    const double w = (t - knots_t[k]) / (knots_t[k + 1] - knots_t[k]);
    return knots_v[k] + w * (knots_v[k + 1] - knots_v[k]);
  };
  std::vector<double> times(knots_t);
  for (const auto& [t, y] : e.breakpoints()) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<std::pair<double, double>> bp;
  for (double t : times) bp.emplace_back(t, e.evaluate(t) + eta * phi(t));
  return PLExcursion::transient(std::move(bp), e.tail().slope);
}

void glue_continuity(Outcome& out) {
  oracle::Rng rng(1006);
  const PLExcursion e = oracle::random_excursion(rng, 6, true);
  const double h = 0.01, R = 2.0;
  const double span = e.last_exit(R) + 1.0;
  const auto base = glue_detailed(e, h, R);
  const SearchParams search{3, 0, 0};
  std::vector<double> vals;
  for (double eta : {0.1, 0.01, 0.001}) {
    const auto pert = glue_detailed(perturb(e, eta, span, 77), h, R);
    SearchHints hints;
    hints.pairings.push_back(time_correspondence(base, pert));
    vals.push_back(localized(InnerKind::GP, base.space, pert.space, search, hints).value);
    out.note("eta " + fmt(eta) + ": localized GP " + fmt(vals.back()) + " (" + std::to_string(base.space.size()) +
             " vs " + std::to_string(pert.space.size()) + " points)");
  }
  out.require(strictly_decreasing(vals), "localized GP strictly decreasing in eta");
}

void perturbation_bounds(Outcome& out) {
  const auto r = run_measure_swap(Json{{"seed", 2024}, {"trials", 100}, {"max_nodes", 200}, {"alpha", 1.0},
                                       {"h", 0.25}, {"R", 8.0}},
                                  1);
  out.note("bounded trials " + fmt(r.summary_value("bounded_trials")) + ", unbounded " +
           fmt(r.summary_value("unbounded_trials")));
  for (const char* f : {"hausdorff_bound_holds", "degree_bound_holds", "node_bound_holds", "boundary_bound_holds"})
    out.require(r.flag(f), f);
  out.require(r.summary_value("bounded_trials") > 0 && r.summary_value("unbounded_trials") > 0,
              "both the bounded and the boundary case are exercised");
}

void cube(Outcome& out) {
  const auto r = run_cube(Json{{"seed", 42}, {"dims", 5}, {"eps", 0.1}, {"mc_points", 2000}}, 1);
  const auto dmd = r.column("dmd_m1"), glmb = r.column("glmb"), ghp = r.column("ghp_ub");
  const auto exact = r.column("corner_exact"), mc = r.column("corner_mc"), se = r.column("corner_se");
  for (std::size_t n = 0; n < dmd.size(); ++n)
    out.note("n=" + std::to_string(n + 1) + " dmd_m1 " + fmt(dmd[n]) + " glmb " + fmt(glmb[n]) + " ghp_ub " +
             fmt(ghp[n]) + " corner " + fmt(mc[n]) + " vs " + fmt(exact[n]) + " (se " + fmt(se[n]) + ")");
  out.require(strictly_decreasing(dmd), "dmd_discrepancy(m=1) to the one-point target decreases across n");
  bool nonincreasing = true;
  for (std::size_t n = 1; n < glmb.size(); ++n) nonincreasing = nonincreasing && glmb[n] <= glmb[n - 1];
  out.require(nonincreasing && glmb.back() < glmb.front(), "global_lower_mass(0.1) decreases across n");
  for (std::size_t n = 0; n < 3; ++n)
    out.require(std::abs(mc[n] - exact[n]) <= 3 * se[n], "corner ball mass within 3 SE for n=" + std::to_string(n + 1));
  for (std::size_t n = 0; n < ghp.size(); ++n)
    out.require(ghp[n] >= 0.4, "ghp_ub >= 0.4 for n=" + std::to_string(n + 1));
}

void kallenberg(Outcome& out) {
  const auto r = run_kallenberg(Json{{"seed", 7}, {"trials", 200}, {"R", 1.0}, {"n_list", {16, 64, 128}},
                                     {"generator_samples", 10000}},
                                1);
  const auto ks = r.column("ks");
  for (std::size_t k = 0; k < ks.size(); ++k)
    out.note("n=" + fmt(r.column("n")[k]) + " KS " + fmt(ks[k]));
  out.note("generator KS " + fmt(r.summary_value("generator_ks")) + " vs 1% critical " +
           fmt(r.summary_value("generator_ks_critical")));
  out.require(r.flag("ks_decreasing"), "KS decreases across n_list");
  out.require(r.flag("generators_agree"), "Pitman and Bessel generators agree");
}

void determinism(Outcome& out, const std::string& cli) {
  const std::string dir = "acceptance_determinism";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"sequence", R"({"generator": "mass_perturb", "index_range": [1, 5]})"},
      {"cube", R"({"dims": 3, "mc_points": 400})"},
      {"swap", R"({"trials": 30, "max_nodes": 80})"},
      {"kallenberg", R"({"trials": 50, "n_list": [4, 8], "horizon": 2, "continuum_h": 0.002,)"
                     R"( "generator_samples": 500, "generator_grid": 500})"}};
  for (const auto& [kind, config] : runs) {
    const std::string cfg = dir + "/" + kind + ".json";
    std::ofstream(cfg) << config;
    std::string outputs[2];
    int k = 0;
    for (int workers : {1, 8}) {
      const std::string csv = dir + "/" + kind + "_w" + std::to_string(workers) + ".csv";
      const std::string cmd = cli + " run " + kind + " --seed 99 --workers " + std::to_string(workers) +
                              " --config " + cfg + " --out csv -o " + csv;
      const int status = std::system(cmd.c_str());
      out.require(status == 0, kind + " exited with status " + std::to_string(status));
      std::ifstream in(csv, std::ios::binary);
      outputs[k++] = std::string(std::istreambuf_iterator<char>(in), {});
    }
    out.note(kind + ": " + std::to_string(outputs[0].size()) + " bytes, identical: " +
             (outputs[0] == outputs[1] && !outputs[0].empty() ? "yes" : "no"));
    out.require(outputs[0] == outputs[1] && !outputs[0].empty(), kind + " CSV identical at 1 and 8 workers");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "mmspace";
  if (argc > 2) only = argv[2];
  criterion(1, "prohorov flow equals subset enumeration on 200 instances", 30, prohorov_oracle_equivalence);
  criterion(2, "prohorov symmetry/triangle; self-distances vanish", 60, metric_sanity);
  criterion(3, "distance matrix distribution commutes with restriction", 30, projection_consistency);
  criterion(4, "lower mass monotonicity and exact profiles", 0, lower_mass_characterizations);
  criterion(5, "glue exactness, four-point condition, end ray isometry", 30, glue_exactness);
  criterion(6, "glue continuity under sup-norm perturbations", 60, glue_continuity);
  criterion(7, "node/degree/length measure perturbation bounds", 120, perturbation_bounds);
  criterion(8, "cube family: weak convergence without lower mass bound", 180, cube);
  criterion(9, "discrete vs continuum Kallenberg trend and generator agreement", 600, kallenberg);
  criterion(10, "run reports identical at 1 and 8 workers", 0, [&](Outcome& o) { determinism(o, cli); });
  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
