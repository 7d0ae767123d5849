#include "mmspace/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "mmspace/error.hpp"
#include "mmspace/rng.hpp"

namespace mms {

bool Report::flag(const std::string& name) const {
  for (const auto& [k, v] : flags)
    if (k == name) return v;
  throw ValidationError("report: no flag " + name);
}

double Report::summary_value(const std::string& name) const {
  for (const auto& [k, v] : summary)
    if (k == name) return v;
  throw ValidationError("report: no summary value " + name);
}

std::vector<double> Report::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("report: no column " + name);
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

std::string report_csv(const Report& report) {
  std::ostringstream out;
  out << "# schema: " << kReportSchema << '\n';
  out << "# experiment: " << report.experiment << '\n';
  out << "# seed: " << report.seed << '\n';
  out << "# config: " << report.config.dump() << '\n';
  for (const auto& [k, v] : report.flags) out << "# flag " << k << ": " << (v ? "true" : "false") << '\n';
  for (const auto& [k, v] : report.summary) out << "# summary " << k << ": " << format_double(v) << '\n';
  for (std::size_t c = 0; c < report.columns.size(); ++c) out << (c ? "," : "") << report.columns[c];
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  return out.str();
}

Json report_json(const Report& report) {
  Json flags = Json::object(), summary = Json::object(), rows = Json::array();
  for (const auto& [k, v] : report.flags) flags[k] = v;
  for (const auto& [k, v] : report.summary) summary[k] = format_double(v);
  for (const auto& row : report.rows) {
    Json r = Json::array();
    for (double v : row) r.push_back(format_double(v));
    rows.push_back(r);
  }
  return Json{{"schema", kReportSchema}, {"experiment", report.experiment}, {"seed", report.seed},
              {"config", report.config}, {"columns", report.columns}, {"rows", rows},
              {"flags", flags}, {"summary", summary}};
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool strictly_decreasing(const std::vector<double>& values) {
  for (std::size_t k = 1; k < values.size(); ++k)
    if (!(values[k] < values[k - 1])) return false;
  return true;
}

bool trend_passes(const std::vector<double>& values, double threshold) {
  if (values.empty() || !(values.back() < threshold)) return false;
  const std::size_t from = values.size() >= 3 ? values.size() - 3 : 0;
  const std::vector<double> tail(values.begin() + static_cast<long>(from), values.end());
  const bool zero = std::all_of(tail.begin(), tail.end(), [](double v) { return std::abs(v) <= 1e-12; });
  return zero || strictly_decreasing(tail);
}

double ks_statistic(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b) {
  double ta = 0.0, tb = 0.0;
  for (const auto& p : a) ta += p.second;
  for (const auto& p : b) tb += p.second;
  if (!(ta > 0.0) || !(tb > 0.0)) return 1.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double fa = 0.0, fb = 0.0, worst = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    const double x = std::min(i < a.size() ? a[i].first : kInfinity, j < b.size() ? b[j].first : kInfinity);
    while (i < a.size() && a[i].first == x) fa += a[i++].second;
    while (j < b.size() && b[j].first == x) fb += b[j++].second;
    worst = std::max(worst, std::abs(fa / ta - fb / tb));
  }
  return worst;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) * std::sqrt((nn + mm) / (nn * mm));
}

double ball_volume(std::size_t n, double r) {
  const double k = static_cast<double>(n);
  return std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0) * std::pow(r, k);
}

namespace {

std::uint64_t parse_seed(const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  if (v.is_string()) {
    try {
      return std::stoull(v.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw ValidationError("config: seed must be a nonnegative integer");
}

// Copies `config` and fills in every key of `defaults` that is missing.
Json normalize(const Json& config, const Json& defaults) {
  if (!config.is_object()) throw ValidationError("config: must be a JSON object");
  if (!config.contains("seed")) throw ValidationError("config: seed is required");
  Json out = config;
  for (auto it = defaults.begin(); it != defaults.end(); ++it)
    if (!out.contains(it.key())) out[it.key()] = it.value();
  out["seed"] = parse_seed(config["seed"]);
  for (auto it = out.begin(); it != out.end(); ++it)
    if (defaults.contains(it.key()) && it.key() != "search" && it.key() != "base" &&
        defaults[it.key()].type() != Json::value_t::null) {
      const auto want = defaults[it.key()];
      const bool ok = (want.is_number() && it.value().is_number()) || (want.is_array() && it.value().is_array()) ||
                      (want.is_string() && it.value().is_string()) || (want.is_boolean() && it.value().is_boolean());
      if (!ok) throw ValidationError("config: wrong type for \"" + it.key() + "\"");
    }
  return out;
}

template <class T>
T get(const Json& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("config: bad value for \"") + key + "\": " + e.what());
  }
}

std::size_t positive_count(const Json& cfg, const char* key) {
  const auto v = get<long long>(cfg, key);
  if (v <= 0) throw ValidationError(std::string("config: \"") + key + "\" must be positive");
  return static_cast<std::size_t>(v);
}

double positive_real(const Json& cfg, const char* key) {
  const auto v = get<double>(cfg, key);
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("config: \"") + key + "\" must be positive");
  return v;
}

std::vector<double> increasing_grid(const Json& cfg, const char* key) {
  const auto v = get<std::vector<double>>(cfg, key);
  if (v.empty()) throw ValidationError(std::string("config: \"") + key + "\" must be nonempty");
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!(v[k] > 0.0) || (k > 0 && !(v[k] > v[k - 1])))
      throw ValidationError(std::string("config: \"") + key + "\" must be positive and strictly increasing");
  return v;
}

std::vector<std::size_t> positive_list(const Json& cfg, const char* key) {
  const auto v = get<std::vector<long long>>(cfg, key);
  if (v.empty()) throw ValidationError(std::string("config: \"") + key + "\" must be nonempty");
  std::vector<std::size_t> out;
  for (long long x : v) {
    if (x <= 0) throw ValidationError(std::string("config: entries of \"") + key + "\" must be positive");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

std::string label(double v) { return format_double(v); }

Json common_defaults() {
  return Json{{"m_list", {1}},
              {"delta_grid", {0.25, 0.5}},
              {"R", 10.0},
              {"n0", 1},
              {"mass_threshold", 1e-3},
              {"trend_threshold", 0.1},
              {"samples", 20000},
              {"search", search_to_json(SearchParams{})},
              {"localized_point_cap", 2500},
              {"sghp_point_cap", 300}};
}

FiniteMMSpace default_base() {
  // Root with two unit branches and one branch of length 2.
  return FiniteMMSpace::from_dense(4, {0, 1, 1, 2, 1, 0, 2, 3, 1, 2, 0, 3, 2, 3, 3, 0}, 0, {0.5, 1.0, 1.0, 0.5});
}

EmpiricalDMD dmd_for(const FiniteMMSpace& s, std::size_t m, std::size_t samples, std::uint64_t seed) {
  const double count = std::pow(static_cast<double>(support_indices(s).size()), static_cast<double>(m));
  if (count <= kEnumerationLimit) return dmd_exact(s, m);
  return dmd_sample(s, m, samples, seed);
}

// Columns shared by every sequence-type experiment.
struct SequenceSpec {
  std::vector<std::size_t> indices;
  std::function<FiniteMMSpace(std::size_t)> make;
  FiniteMMSpace target;
  // Extra columns computed per index from the generated space.
  std::vector<std::string> extra_columns;
  std::function<std::vector<double>(std::size_t, const FiniteMMSpace&)> extra;
};

Report run_sequence_core(const std::string& experiment, const Json& cfg, const SequenceSpec& spec,
                         std::size_t workers) {
  Report rep;
  rep.experiment = experiment;
  rep.config = cfg;
  rep.seed = get<std::uint64_t>(cfg, "seed");
  const auto m_list = positive_list(cfg, "m_list");
  const auto deltas = increasing_grid(cfg, "delta_grid");
  const double R = positive_real(cfg, "R");
  const auto n0 = get<std::size_t>(cfg, "n0");
  const double mass_threshold = get<double>(cfg, "mass_threshold");
  const double trend_threshold = get<double>(cfg, "trend_threshold");
  const std::size_t samples = positive_count(cfg, "samples");
  const SearchParams search = search_from_json(cfg.at("search"));
  const auto loc_cap = get<std::size_t>(cfg, "localized_point_cap");
  const auto sghp_cap = get<std::size_t>(cfg, "sghp_point_cap");

  rep.columns.push_back("n");
  for (std::size_t m : m_list) rep.columns.push_back("dmd_m" + std::to_string(m));
  for (double d : deltas) rep.columns.push_back("lowmass_d" + label(d));
  for (const char* c : {"ghp_ub", "loc_gp", "loc_sghp"}) rep.columns.push_back(c);
  for (const auto& c : spec.extra_columns) rep.columns.push_back(c);

  std::vector<EmpiricalDMD> target_dmd;
  for (std::size_t m : m_list) target_dmd.push_back(dmd_for(spec.target, m, samples, split_seed(rep.seed, m)));

  rep.rows.resize(spec.indices.size());
  parallel_for(spec.indices.size(), workers, [&](std::size_t k) {
    const std::size_t n = spec.indices[k];
    const FiniteMMSpace x = spec.make(n);
    std::vector<double> row{static_cast<double>(n)};
    for (std::size_t q = 0; q < m_list.size(); ++q) {
      const auto dmd = dmd_for(x, m_list[q], samples, split_seed(rep.seed, 1000 * n + m_list[q]));
      row.push_back(dmd_discrepancy(dmd, target_dmd[q]));
    }
    for (double d : deltas) row.push_back(lower_mass(x, d, R));
    row.push_back(ghp_ub(x, spec.target, search).value);
    const std::size_t size = std::max(x.size(), spec.target.size());
    const double nan = std::nan("");
    row.push_back(size <= loc_cap ? localized(InnerKind::GP, x, spec.target, search).value : nan);
    row.push_back(size <= sghp_cap ? localized(InnerKind::SGHP, x, spec.target, search).value : nan);
    if (spec.extra) {
      const auto more = spec.extra(n, x);
      row.insert(row.end(), more.begin(), more.end());
    }
    rep.rows[k] = std::move(row);
  });

  bool weak = true;
  for (std::size_t m : m_list) weak = trend_passes(rep.column("dmd_m" + std::to_string(m)), trend_threshold) && weak;
  double min_mass = kInfinity;
  for (std::size_t k = 0; k < spec.indices.size(); ++k) {
    if (spec.indices[k] < n0) continue;
    for (double d : deltas) min_mass = std::min(min_mass, rep.column("lowmass_d" + label(d))[k]);
  }
  rep.flags = {{"gromov_weak_trend", weak},
               {"mass_bound_holds", min_mass > mass_threshold},
               {"ghw_trend", trend_passes(rep.column("ghp_ub"), trend_threshold)}};
  rep.summary = {{"n0", static_cast<double>(n0)},
                 {"mass_threshold", mass_threshold},
                 {"trend_threshold", trend_threshold},
                 {"min_lower_mass", min_mass}};
  return rep;
}

std::vector<std::size_t> index_range(const Json& cfg) {
  const auto r = get<std::vector<long long>>(cfg, "index_range");
  if (r.size() != 2 || r[0] <= 0 || r[1] < r[0])
    throw ValidationError("config: \"index_range\" must be [first, last] with 0 < first <= last");
  std::vector<std::size_t> out;
  for (long long n = r[0]; n <= r[1]; ++n) out.push_back(static_cast<std::size_t>(n));
  return out;
}

// Root atom 1 - eps at the origin plus mc points uniform in [0,1]^n.
FiniteMMSpace cube_space(std::size_t n, double eps, std::size_t mc, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> coords(n, 0.0);
  for (std::size_t p = 0; p < mc * n; ++p) coords.push_back(uniform01(rng));
  std::vector<double> mass(mc + 1, eps / static_cast<double>(mc));
  mass[0] = 1.0 - eps;
  return FiniteMMSpace(Metric(EuclideanMetric(n, std::move(coords))), 0, std::move(mass));
}

FiniteMMSpace point_space(double mass) { return FiniteMMSpace::from_dense(1, {0.0}, 0, {mass}); }

}  // namespace

Report run_sequence(const Json& config, std::size_t workers) {
  Json defaults = common_defaults();
  defaults["generator"] = "constant";
  defaults["index_range"] = {1, 8};
  defaults["base"] = nullptr;
  const Json cfg = normalize(config, defaults);
  const FiniteMMSpace base = cfg.at("base").is_null() ? default_base() : space_from_json(cfg.at("base"));
  const auto gen = get<std::string>(cfg, "generator");
  SequenceSpec spec{index_range(cfg), nullptr, base, {}, nullptr};
  if (gen == "constant") {
    spec.make = [&](std::size_t) { return base; };
  } else if (gen == "mass_perturb") {
    spec.make = [&](std::size_t n) { return rescale(base, 1.0, 1.0 + 1.0 / static_cast<double>(n)); };
  } else {
    throw ValidationError("config: unknown sequence generator \"" + gen + "\"");
  }
  return run_sequence_core("sequence", cfg, spec, workers);
}

Report run_cube(const Json& config, std::size_t workers) {
  Json defaults = common_defaults();
  defaults["dims"] = 5;
  defaults["eps"] = 0.1;
  defaults["mc_points"] = 2000;
  defaults["delta"] = 0.1;
  defaults["target_mass"] = 1.0;
  defaults["delta_grid"] = {0.1};
  defaults["n0"] = 3;
  const Json cfg = normalize(config, defaults);
  const std::size_t dims = positive_count(cfg, "dims");
  if (dims > 6) throw ValidationError("config: cube dimension is limited to 6");
  const double eps = get<double>(cfg, "eps");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("config: eps must lie in (0, 1)");
  const std::size_t mc = positive_count(cfg, "mc_points");
  const double delta = positive_real(cfg, "delta");
  if (delta > 1.0) throw ValidationError("config: corner ball needs delta <= 1");
  const double target_mass = positive_real(cfg, "target_mass");
  const std::uint64_t seed = get<std::uint64_t>(cfg, "seed");

  SequenceSpec spec{{}, nullptr, point_space(target_mass), {}, nullptr};
  for (std::size_t n = 1; n <= dims; ++n) spec.indices.push_back(n);
  spec.make = [=](std::size_t n) { return cube_space(n, eps, mc, split_seed(seed, n)); };
  spec.extra_columns = {"glmb", "max_root_dist", "corner_exact", "corner_mc", "corner_se"};
  spec.extra = [=](std::size_t n, const FiniteMMSpace& x) {
    // Mass near the corner (1, ..., 1): exact value, MC estimate and its SE.
    const double p = ball_volume(n, delta) / std::pow(2.0, static_cast<double>(n));
    std::size_t hits = 0;
    const auto& e = std::get<EuclideanMetric>(x.metric().store());
    for (std::size_t i = 1; i < x.size(); ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) s += (1.0 - e.point(i)[c]) * (1.0 - e.point(i)[c]);
      hits += std::sqrt(s) <= delta;
    }
    const double w = eps / static_cast<double>(mc);
    return std::vector<double>{global_lower_mass(x, delta), max_root_distance(x), eps * p,
                               w * static_cast<double>(hits), eps * std::sqrt(p * (1.0 - p) / static_cast<double>(mc))};
  };
  return run_sequence_core("cube", cfg, spec, workers);
}

namespace {

GraphTree random_tree(const std::string& kind, std::size_t max_nodes, std::uint64_t seed) {
  if (kind == "gw") {
    // Critical geometric offspring, truncated at max_nodes.
    std::vector<double> p;
    double rest = 1.0;
    for (int k = 0; k < 60; ++k) {
      p.push_back(std::ldexp(1.0, -(k + 1)));
      rest -= p.back();
    }
    p.back() += rest;
    return gw_tree(p, seed, max_nodes).tree;
  }
  if (kind != "recursive") throw ValidationError("config: unknown tree kind \"" + kind + "\"");
  Rng rng(seed);
  const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(max_nodes));
  GraphTree t;
  t.parent.push_back(0);
  for (std::size_t v = 1; v < n; ++v) t.parent.push_back(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(v)));
  return t;
}

}  // namespace

Report run_measure_swap(const Json& config, std::size_t workers) {
  const Json defaults{{"trials", 100},   {"max_nodes", 200},         {"alpha", 1.0},
                      {"h", 0.25},       {"R", 8.0},                 {"tree", "recursive"},
                      {"search", search_to_json(SearchParams{})}, {"localized_point_cap", 120}};
  const Json cfg = normalize(config, defaults);
  const std::size_t trials = positive_count(cfg, "trials");
  const std::size_t max_nodes = positive_count(cfg, "max_nodes");
  const double alpha = positive_real(cfg, "alpha");
  const double h = positive_real(cfg, "h");
  const double R = positive_real(cfg, "R");
  const auto kind = get<std::string>(cfg, "tree");
  const auto cap = get<std::size_t>(cfg, "localized_point_cap");
  const SearchParams search = search_from_json(cfg.at("search"));

  Report rep;
  rep.experiment = "swap";
  rep.config = cfg;
  rep.seed = get<std::uint64_t>(cfg, "seed");
  rep.columns = {"trial",       "nodes",      "diameter",  "hausdorff", "hausdorff_bound", "bounded",
                 "pr_deg",      "pr_deg_bound", "pr_nod",  "pr_nod_bound", "annulus_length", "pr_deg_R",
                 "pr_deg_R_bound", "loc_gp_deg", "loc_gp_nod"};
  rep.rows.resize(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const GraphTree tree = random_tree(kind, max_nodes, split_seed(rep.seed, t));
    const GridMeasures gm = grid_measures(tree, alpha, h);
    const FiniteMMSpace& grid = gm.grid;
    std::vector<double> lam = grid.masses();
    for (double& w : lam) w /= alpha;  // length measure in units of edges
    const FiniteMMSpace lam_space = with_mass(grid, lam);
    const FiniteMMSpace deg_space = with_mass(grid, gm.degree_mass);
    const FiniteMMSpace nod_space = with_mass(grid, gm.node_mass);
    const auto dist = [&](std::size_t i, std::size_t j) { return grid.dist(i, j); };

    std::vector<std::size_t> nodes(gm.node_count), all(grid.size());
    for (std::size_t v = 0; v < nodes.size(); ++v) nodes[v] = v;
    for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
    const double haus = hausdorff(nodes, all, dist);

    std::size_t far = tree.root;
    for (std::size_t v = 0; v < gm.node_count; ++v)
      if (grid.root_dist(v) > grid.root_dist(far)) far = v;
    double diameter = 0.0;
    for (std::size_t v = 0; v < gm.node_count; ++v) diameter = std::max(diameter, grid.dist(far, v));
    const bool bounded = diameter < R;

    const double nan = std::nan("");
    const double pr_deg = prohorov(gm.degree_mass, lam, grid.metric());
    const double pr_nod = prohorov(gm.node_mass, lam, grid.metric());
    // Length (in edge units) of B(rho, R + alpha/2) minus the open B(rho, R - alpha/2).
    double annulus = 0.0;
    const double lo = R - alpha / 2.0, hi = R + alpha / 2.0;
    for (std::size_t v = 0; v < gm.node_count; ++v) {
      if (v == tree.root) continue;
      const double top = grid.root_dist(v), bottom = top - alpha;
      annulus += std::max(0.0, std::min(top, hi) - std::max(bottom, lo)) / alpha;
    }
    const double pr_deg_R =
        prohorov(restrict(deg_space, R).masses(), restrict(lam_space, R).masses(), grid.metric());

    double loc_deg = nan, loc_nod = nan;
    if (grid.size() <= cap) {
      SearchHints hints;
      hints.embeddings.push_back(union_metric_from_common(deg_space, lam_space, dist));
      loc_deg = localized(InnerKind::GP, deg_space, lam_space, search, hints).value;
      hints.embeddings = {union_metric_from_common(nod_space, lam_space, dist)};
      loc_nod = localized(InnerKind::GP, nod_space, lam_space, search, hints).value;
    }
    rep.rows[t] = {static_cast<double>(t),
                   static_cast<double>(gm.node_count),
                   diameter,
                   haus,
                   alpha,
                   bounded ? 1.0 : 0.0,
                   pr_deg,
                   alpha / 2.0 + h,
                   pr_nod,
                   alpha + h,
                   annulus,
                   pr_deg_R,
                   std::max(alpha / 2.0, annulus) + h,
                   loc_deg,
                   loc_nod};
  });

  bool haus_ok = true, deg_ok = true, nod_ok = true, boundary_ok = true;
  std::size_t n_bounded = 0;
  for (const auto& r : rep.rows) {
    haus_ok = haus_ok && r[3] <= r[4];
    if (r[5] == 1.0) {
      ++n_bounded;
      deg_ok = deg_ok && r[6] <= r[7];
      nod_ok = nod_ok && r[8] <= r[9];
    } else {
      boundary_ok = boundary_ok && r[11] <= r[12];
    }
  }
  rep.flags = {{"hausdorff_bound_holds", haus_ok},
               {"degree_bound_holds", deg_ok},
               {"node_bound_holds", nod_ok},
               {"boundary_bound_holds", boundary_ok}};
  rep.summary = {{"bounded_trials", static_cast<double>(n_bounded)},
                 {"unbounded_trials", static_cast<double>(trials - n_bounded)}};
  return rep;
}

double generator_agreement_ks(std::size_t samples, std::size_t n_grid, std::uint64_t seed, std::size_t workers) {
  std::vector<std::pair<double, double>> pitman(samples), bessel(samples);
  parallel_for(samples, workers, [&](std::size_t k) {
    const LatticePath b = pitman_transform(brownian_path(n_grid, 1.0, split_seed(seed, 2 * k)));
    const LatticePath x = bessel3_em(n_grid, 1.0, split_seed(seed, 2 * k + 1));
    pitman[k] = {b.values.back(), 1.0};
    bessel[k] = {x.values.back(), 1.0};
  });
  return ks_statistic(std::move(pitman), std::move(bessel));
}

namespace {

// Distance-to-root atoms of the support, merged by height.
std::vector<std::pair<double, double>> root_profile(const FiniteMMSpace& s) {
  std::map<double, double> by_height;
  for (std::size_t i : support_indices(s)) by_height[s.root_dist(i)] += s.mass(i);
  return {by_height.begin(), by_height.end()};
}

struct TrialResult {
  // Index 0: continuum; 1..: discrete at each n.
  std::vector<std::vector<std::pair<double, double>>> atoms;
  std::vector<std::vector<double>> lowmass;
  std::vector<double> mass;
  double horizon = 0.0;
};

}  // namespace

Report run_kallenberg(const Json& config, std::size_t workers) {
  const Json defaults{{"n_list", {16, 64, 128}},  {"trials", 200},        {"R", 1.0},
                      {"delta_grid", {0.1}},      {"horizon", 4.0},       {"dt_factor", 32},
                      {"continuum_h", 1e-4},      {"max_doublings", 6},   {"generator_samples", 10000},
                      {"generator_grid", 100000}};
  const Json cfg = normalize(config, defaults);
  const auto n_list = positive_list(cfg, "n_list");
  const std::size_t trials = positive_count(cfg, "trials");
  if (trials < 50) throw ValidationError("config: kallenberg needs at least 50 trials");
  const double R = positive_real(cfg, "R");
  const auto deltas = increasing_grid(cfg, "delta_grid");
  const double horizon0 = positive_real(cfg, "horizon");
  const std::size_t dt_factor = positive_count(cfg, "dt_factor");
  const double hc = positive_real(cfg, "continuum_h");
  const auto max_doublings = get<std::size_t>(cfg, "max_doublings");
  const auto gen_samples = get<std::size_t>(cfg, "generator_samples");
  const auto gen_grid = get<std::size_t>(cfg, "generator_grid");

  Report rep;
  rep.experiment = "kallenberg";
  rep.config = cfg;
  rep.seed = get<std::uint64_t>(cfg, "seed");
  const double n_max = static_cast<double>(*std::max_element(n_list.begin(), n_list.end()));
  // Brownian resolution: dt_factor grid steps per walk step at the finest scale.
  const double steps_per_unit = n_max * n_max * static_cast<double>(dt_factor);

  std::vector<TrialResult> results(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const std::uint64_t seed_t = split_seed(rep.seed, t);
    double horizon = horizon0;
    for (std::size_t attempt = 0;; ++attempt) {
      const auto n_grid = static_cast<std::size_t>(std::llround(horizon * steps_per_unit));
      const LatticePath b = brownian_path(n_grid, horizon, seed_t);
      const LatticePath pitman = pitman_transform(b);
      bool long_enough = pitman.values.back() >= R;
      std::vector<LatticePath> walks;
      for (std::size_t n : n_list) {
        if (!long_enough) break;
        walks.push_back(reflected_from_steps(skorokhod_embedded_steps(b, n)));
        long_enough = walks.back().values.back() / static_cast<double>(n) >= R;
      }
      if (!long_enough) {
        if (attempt >= max_doublings)
          throw HorizonTooShort("kallenberg: path stays below R after " + std::to_string(max_doublings) +
                                " horizon doublings");
        horizon *= 2.0;
        continue;
      }
      TrialResult& res = results[t];
      res.horizon = horizon;
      auto record = [&](const FiniteMMSpace& s) {
        res.atoms.push_back(root_profile(s));
        std::vector<double> lm;
        for (double d : deltas) lm.push_back(lower_mass(s, d, R));
        res.lowmass.push_back(std::move(lm));
        res.mass.push_back(s.total_mass());
      };
      record(continuum_from_path(pitman, R, hc));
      for (std::size_t q = 0; q < n_list.size(); ++q) record(kallenberg_from_walk(walks[q], n_list[q], R));
      return;
    }
  });

  rep.columns = {"n", "ks"};
  for (double d : deltas) {
    rep.columns.push_back("lowmass_disc_d" + label(d));
    rep.columns.push_back("lowmass_cont_d" + label(d));
  }
  rep.columns.push_back("mass_disc");
  rep.columns.push_back("mass_cont");

  auto pooled = [&](std::size_t e) {
    std::vector<std::pair<double, double>> all;
    for (const auto& r : results)
      for (const auto& [x, w] : r.atoms[e]) all.emplace_back(x, w / static_cast<double>(trials));
    return all;
  };
  auto mean = [&](auto&& f) {
    double s = 0.0;
    for (const auto& r : results) s += f(r);
    return s / static_cast<double>(trials);
  };
  const auto continuum = pooled(0);
  std::vector<double> ks_values;
  for (std::size_t q = 0; q < n_list.size(); ++q) {
    const double ks = ks_statistic(pooled(q + 1), continuum);
    ks_values.push_back(ks);
    std::vector<double> row{static_cast<double>(n_list[q]), ks};
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      row.push_back(mean([&](const TrialResult& r) { return r.lowmass[q + 1][d]; }));
      row.push_back(mean([&](const TrialResult& r) { return r.lowmass[0][d]; }));
    }
    row.push_back(mean([&](const TrialResult& r) { return r.mass[q + 1]; }));
    row.push_back(mean([&](const TrialResult& r) { return r.mass[0]; }));
    rep.rows.push_back(std::move(row));
  }
  rep.flags = {{"ks_decreasing", strictly_decreasing(ks_values)}};
  double max_h = 0.0;
  for (const auto& r : results) max_h = std::max(max_h, r.horizon);
  rep.summary = {{"max_horizon", max_h}};
  if (gen_samples > 0) {
    const double ks = generator_agreement_ks(gen_samples, gen_grid, split_seed(rep.seed, 0xbe55e1ULL), workers);
    const double crit = ks_critical(0.01, gen_samples, gen_samples);
    rep.summary.emplace_back("generator_ks", ks);
    rep.summary.emplace_back("generator_ks_critical", crit);
    rep.flags.emplace_back("generators_agree", ks < crit);
  }
  return rep;
}

Report run_experiment(const Json& config, std::size_t workers) {
  if (!config.is_object() || !config.contains("experiment"))
    throw ValidationError("config: \"experiment\" is required");
  const auto kind = get<std::string>(config, "experiment");
  if (kind == "sequence") return run_sequence(config, workers);
  if (kind == "cube") return run_cube(config, workers);
  if (kind == "swap") return run_measure_swap(config, workers);
  if (kind == "kallenberg") return run_kallenberg(config, workers);
  throw ValidationError("config: unknown experiment \"" + kind + "\"");
}

}  // namespace mms
