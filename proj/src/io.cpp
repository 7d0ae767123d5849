#include "mmspace/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "mmspace/error.hpp"

namespace mms {

namespace {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("json: missing key \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("json: bad value for \"") + key + "\": " + e.what());
  }
}

}  // namespace

Json space_to_json(const FiniteMMSpace& space) {
  const std::size_t n = space.size();
  const auto flat = space.metric().to_dense();
  Json dist = Json::array();
  for (std::size_t i = 0; i < n; ++i)
    dist.push_back(std::vector<double>(flat.begin() + static_cast<long>(i * n), flat.begin() + static_cast<long>((i + 1) * n)));
  return Json{{"points", n}, {"root", space.root()}, {"dist", dist}, {"mass", space.masses()}};
}

FiniteMMSpace space_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("json: space must be an object");
  const auto n = field<std::size_t>(j, "points");
  const auto root = field<std::size_t>(j, "root");
  const auto mass = field<std::vector<double>>(j, "mass");
  std::vector<double> d(n * n, 0.0);
  if (j.contains("dist")) {
    const auto rows = field<std::vector<std::vector<double>>>(j, "dist");
    if (rows.size() != n) throw DimensionMismatch("json: dist must have one row per point");
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw DimensionMismatch("json: dist rows must have one entry per point");
      for (std::size_t k = 0; k < n; ++k) d[i * n + k] = rows[i][k];
    }
  } else if (j.contains("tri")) {
    const auto tri = field<std::vector<double>>(j, "tri");
    const bool diag = tri.size() == n * (n + 1) / 2;
    if (!diag && tri.size() != n * (n - 1) / 2) throw DimensionMismatch("json: tri has the wrong length");
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < (diag ? i + 1 : i); ++c, ++k) d[i * n + c] = d[c * n + i] = tri[k];
  } else {
    throw ValidationError("json: space needs \"dist\" or \"tri\"");
  }
  return FiniteMMSpace::from_dense(n, std::move(d), root, mass);
}

Json dmd_to_json(const EmpiricalDMD& dmd) {
  Json atoms = Json::array();
  for (const auto& a : dmd.atoms) atoms.push_back(Json{{"tri", a.tri}, {"w", a.weight}});
  return Json{{"m", dmd.m}, {"atoms", atoms}};
}

EmpiricalDMD dmd_from_json(const Json& j) {
  EmpiricalDMD out;
  out.m = field<std::size_t>(j, "m");
  for (const auto& a : field<Json>(j, "atoms")) {
    EmpiricalDMD::Atom atom{field<std::vector<double>>(a, "tri"), field<double>(a, "w")};
    if (atom.tri.size() != tri_size(out.m)) throw DimensionMismatch("json: atom matrix has the wrong size");
    out.atoms.push_back(std::move(atom));
  }
  return out;
}

Json excursion_to_json(const PLExcursion& e) {
  Json bp = Json::array();
  for (const auto& [t, y] : e.breakpoints()) bp.push_back({t, y});
  Json tail = e.transient() ? Json{{"kind", "linear"}, {"slope", e.tail().slope}} : Json{{"kind", "compact"}};
  return Json{{"bp", bp}, {"tail", tail}};
}

PLExcursion excursion_from_json(const Json& j) {
  std::vector<std::pair<double, double>> bp;
  for (const auto& p : field<Json>(j, "bp")) {
    if (!p.is_array() || p.size() != 2) throw ValidationError("json: breakpoints must be [t, y] pairs");
    bp.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  const Json tail = j.value("tail", Json{{"kind", "compact"}});
  const auto kind = field<std::string>(tail, "kind");
  if (kind == "compact") return PLExcursion::compact(std::move(bp));
  if (kind == "linear") return PLExcursion::transient(std::move(bp), field<double>(tail, "slope"));
  throw ValidationError("json: unknown tail kind \"" + kind + "\"");
}

Json tree_to_json(const GraphTree& tree) { return Json{{"parent", tree.parent}, {"root", tree.root}}; }

GraphTree tree_from_json(const Json& j) {
  GraphTree t{field<std::vector<std::size_t>>(j, "parent"), field<std::size_t>(j, "root")};
  validate_tree(t);
  return t;
}

Json search_to_json(const SearchParams& p) {
  return Json{{"max_pairing_size", p.max_pairing_size},
              {"exhaustive_limit", p.exhaustive_limit},
              {"greedy_restarts", p.greedy_restarts}};
}

SearchParams search_from_json(const Json& j) {
  SearchParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ValidationError("json: search params must be an object");
  p.max_pairing_size = j.value("max_pairing_size", p.max_pairing_size);
  p.exhaustive_limit = j.value("exhaustive_limit", p.exhaustive_limit);
  p.greedy_restarts = j.value("greedy_restarts", p.greedy_restarts);
  return p;
}

Json report_to_json(const DistanceReport& r) {
  Json pairing = Json::array();
  for (const auto& [i, j] : r.pairing) pairing.push_back({i, j});
  return Json{{"value", r.value}, {"certificate", r.certificate}, {"pairing", pairing}};
}

void write_path_csv(std::ostream& out, const LatticePath& path) {
  out << "t,value\n";
  for (std::size_t k = 0; k < path.values.size(); ++k)
    out << format_double(static_cast<double>(k) * path.dt) << ',' << format_double(path.values[k]) << '\n';
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("json: " + path + ": " + e.what());
  }
}

}  // namespace mms
