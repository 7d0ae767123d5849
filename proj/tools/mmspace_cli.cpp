// Command-line front end: space utilities, distances, generators, experiments.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmspace/error.hpp"
#include "mmspace/harness.hpp"
#include "mmspace/io.hpp"
#include "mmspace/treegen.hpp"

namespace {

using namespace mms;

enum class Format { Csv, Json };

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::string out = "json";
  std::string config;
  std::string output;

  Format format() const {
    if (out == "csv") return Format::Csv;
    if (out == "json") return Format::Json;
    throw ValidationError("--out must be csv or json");
  }
  std::uint64_t require_seed() const {
    if (!seed) throw ValidationError("--seed is required");
    return *seed;
  }
  Json config_json() const { return config.empty() ? Json::object() : read_json_file(config); }
};

void emit(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw Error("cannot open output file " + c.output);
  f << text;
}

void emit_json(const Common& c, const Json& j) { emit(c, j.dump(2) + "\n"); }

// Scalar results: JSON object or a two-line CSV.
void emit_record(const Common& c, const std::vector<std::pair<std::string, Json>>& fields) {
  if (c.format() == Format::Json) {
    Json j = Json::object();
    for (const auto& [k, v] : fields) j[k] = v;
    emit_json(c, j);
    return;
  }
  std::ostringstream head, row;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    head << (k ? "," : "") << fields[k].first;
    const Json& v = fields[k].second;
    row << (k ? "," : "") << (v.is_number() ? format_double(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump());
  }
  emit(c, head.str() + "\n" + row.str() + "\n");
}

FiniteMMSpace load_space(const std::string& path) { return space_from_json(read_json_file(path)); }

SearchParams search_params(const Common& c) {
  const Json cfg = c.config_json();
  return cfg.contains("search") ? search_from_json(cfg.at("search")) : SearchParams{};
}

// Two spaces over the same metric (same points and distances), as needed by
// the single-space measure comparisons.
void require_same_metric(const FiniteMMSpace& a, const FiniteMMSpace& b) {
  if (a.size() != b.size()) throw DimensionMismatch("spaces must have the same points");
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (a.dist(i, j) != b.dist(i, j)) throw DimensionMismatch("spaces must share one metric");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad number in list: \"" + item + "\"");
    }
  }
  return out;
}

void add_common(CLI::App* cmd, Common& c, bool with_seed) {
  if (with_seed) cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output format: csv or json");
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("-o,--output", c.output, "Write to file instead of stdout");
}

int run(int argc, char** argv) {
  CLI::App app{"Finite pointed metric measure spaces: distances, trees and convergence experiments"};
  app.require_subcommand(1);
  Common c;

  // space ...
  auto* space = app.add_subcommand("space", "Single-space utilities");
  space->require_subcommand(1);
  std::string file_a, file_b;
  double R = 0.0, delta = 0.0;
  std::size_t m = 1, samples = 0;

  auto* validate = space->add_subcommand("validate", "Validate a space file");
  validate->add_option("file", file_a)->required();
  add_common(validate, c, false);
  validate->callback([&] {
    const auto s = load_space(file_a);
    emit_record(c, {{"valid", true},
                    {"points", s.size()},
                    {"root", s.root()},
                    {"support", support_indices(s).size()},
                    {"total_mass", s.total_mass()}});
  });

  auto* restrict_cmd = space->add_subcommand("restrict", "Restrict to the closed R-ball of the root");
  restrict_cmd->add_option("file", file_a)->required();
  restrict_cmd->add_option("-R,--radius", R)->required();
  add_common(restrict_cmd, c, false);
  restrict_cmd->callback([&] { emit_json(c, space_to_json(restrict(load_space(file_a), R))); });

  auto* dmd = space->add_subcommand("dmd", "Distance-matrix distribution (exact, or sampled with --samples)");
  dmd->add_option("file", file_a)->required();
  dmd->add_option("-m", m)->required()->check(CLI::PositiveNumber);
  dmd->add_option("--samples", samples, "Sample instead of enumerating");
  add_common(dmd, c, true);
  dmd->callback([&] {
    const auto s = load_space(file_a);
    emit_json(c, dmd_to_json(samples ? dmd_sample(s, m, samples, c.require_seed()) : dmd_exact(s, m)));
  });

  auto* lowmass = space->add_subcommand("lowmass", "Lower mass function");
  lowmass->add_option("file", file_a)->required();
  lowmass->add_option("--delta", delta)->required();
  lowmass->add_option("-R,--radius", R, "Radius (omit for the global value)");
  add_common(lowmass, c, false);
  lowmass->callback([&] {
    const auto s = load_space(file_a);
    const bool global = lowmass->count("--radius") == 0;
    emit_record(c, {{"delta", delta}, {"R", global ? Json("inf") : Json(R)},
                    {"value", global ? global_lower_mass(s, delta) : lower_mass(s, delta, R)}});
  });

  // dist ...
  auto* dist = app.add_subcommand("dist", "Distances between two spaces");
  dist->require_subcommand(1);
  std::string inner = "gp";
  auto two_files = [&](CLI::App* cmd) {
    cmd->add_option("a", file_a)->required();
    cmd->add_option("b", file_b)->required();
    add_common(cmd, c, false);
  };
  auto report = [&](const DistanceReport& r) {
    emit_record(c, {{"value", r.value}, {"certificate", r.certificate}});
  };

  auto* pr = dist->add_subcommand("pr", "Prohorov distance between the measures of two spaces on one metric");
  two_files(pr);
  pr->callback([&] {
    const auto a = load_space(file_a), b = load_space(file_b);
    require_same_metric(a, b);
    report({prohorov(a.masses(), b.masses(), a.metric()), "exact", {}});
  });
  auto* haus = dist->add_subcommand("hausdorff", "Hausdorff distance between supports plus roots on one metric");
  two_files(haus);
  haus->callback([&] {
    const auto a = load_space(file_a), b = load_space(file_b);
    require_same_metric(a, b);
    report({hausdorff(support_with_root(a), support_with_root(b), [&](std::size_t i, std::size_t j) {
              return a.dist(i, j);
            }),
            "exact",
            {}});
  });
  auto* gp = dist->add_subcommand("gp", "Gromov-Prohorov upper bound");
  two_files(gp);
  gp->callback([&] { report(gromov_prohorov_ub(load_space(file_a), load_space(file_b), search_params(c))); });
  auto* ghp = dist->add_subcommand("ghp", "Gromov-Hausdorff-Prohorov upper bound");
  two_files(ghp);
  ghp->callback([&] { report(ghp_ub(load_space(file_a), load_space(file_b), search_params(c))); });
  auto* sg = dist->add_subcommand("sghp", "Support GHP upper bound");
  two_files(sg);
  sg->callback([&] { report(sghp(load_space(file_a), load_space(file_b), search_params(c))); });
  auto* loc = dist->add_subcommand("localized", "Localized distance over root balls");
  two_files(loc);
  loc->add_option("--inner", inner, "gp or sghp")->check(CLI::IsMember({"gp", "sghp"}));
  loc->callback([&] {
    const auto kind = inner == "gp" ? InnerKind::GP : InnerKind::SGHP;
    report(localized(kind, load_space(file_a), load_space(file_b), search_params(c)));
  });

  // gen ...
  auto* gen = app.add_subcommand("gen", "Random generators");
  gen->require_subcommand(1);
  std::string offspring = "0.5,0,0.5";
  std::size_t cap = 1000, steps = 0, n_grid = 1000;
  double horizon = 1.0, h = 0.0;
  std::string process = "brownian";

  auto* gw = gen->add_subcommand("gw", "Galton-Watson tree");
  gw->add_option("--offspring", offspring, "Offspring probabilities p0,p1,...");
  gw->add_option("--cap", cap, "Node cap")->check(CLI::PositiveNumber);
  add_common(gw, c, true);
  gw->callback([&] {
    const auto res = gw_tree(parse_list(offspring), c.require_seed(), cap);
    Json j = tree_to_json(res.tree);
    j["status"] = res.status == GwStatus::Extinct ? "extinct" : "truncated";
    emit_json(c, j);
  });

  auto* kal = gen->add_subcommand("kallenberg", "Discrete (with -n) or continuum (with --pitch) Kallenberg tree ball");
  kal->add_option("-n", m, "Scale of the discrete tree");
  kal->add_option("--steps", steps, "Walk steps (discrete)");
  kal->add_option("-R,--radius", R)->required();
  kal->add_option("--pitch", h, "Grid pitch (continuum)");
  kal->add_option("--horizon", horizon, "Path horizon (continuum)");
  kal->add_option("--grid", n_grid, "Path grid points (continuum)");
  add_common(kal, c, true);
  kal->callback([&] {
    if (kal->count("--pitch"))
      emit_json(c, space_to_json(continuum_kallenberg_sample(horizon, n_grid, c.require_seed(), R, h)));
    else if (kal->count("-n") && kal->count("--steps"))
      emit_json(c, space_to_json(kallenberg_discrete(m, steps, c.require_seed(), R)));
    else
      throw ValidationError("gen kallenberg needs -n and --steps, or --pitch");
  });

  auto* bm = gen->add_subcommand("brownian", "Brownian, Pitman or Bessel-3 path as t,value CSV");
  bm->add_option("--grid", n_grid)->check(CLI::PositiveNumber);
  bm->add_option("--horizon", horizon);
  bm->add_option("--process", process, "brownian, pitman or bessel")
      ->check(CLI::IsMember({"brownian", "pitman", "bessel"}));
  add_common(bm, c, true);
  bm->callback([&] {
    const auto seed = c.require_seed();
    LatticePath p = process == "bessel" ? bessel3_em(n_grid, horizon, seed) : brownian_path(n_grid, horizon, seed);
    if (process == "pitman") p = pitman_transform(p);
    std::ostringstream s;
    write_path_csv(s, p);
    emit(c, s.str());
  });

  // run ...
  auto* runc = app.add_subcommand("run", "Convergence experiments");
  runc->require_subcommand(1);
  for (const char* kind : {"sequence", "cube", "swap", "kallenberg"}) {
    auto* cmd = runc->add_subcommand(kind, std::string("Run the ") + kind + " experiment");
    add_common(cmd, c, true);
    cmd->callback([&c, kind] {
      Json cfg = c.config_json();
      if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
      cfg["experiment"] = kind;
      if (c.seed) cfg["seed"] = *c.seed;
      const Report r = run_experiment(cfg, c.workers);
      if (c.format() == Format::Csv)
        emit(c, report_csv(r));
      else
        emit_json(c, report_json(r));
    });
  }
  // Runs default to CSV unless --out is given.
  for (auto* cmd : runc->get_subcommands({}))
    cmd->preparse_callback([&c](std::size_t) { c.out = "csv"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mms::SizeLimitExceeded& e) {
    std::cerr << "size limit: " << e.what() << '\n';
    return 3;
  } catch (const mms::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid JSON: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
