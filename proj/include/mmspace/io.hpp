#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "mmspace/excursion.hpp"
#include "mmspace/metrics.hpp"
#include "mmspace/sampling.hpp"
#include "mmspace/space.hpp"
#include "mmspace/treegen.hpp"

namespace mms {

using Json = nlohmann::json;

/// {"points": n, "root": i, "dist": [[...]], "mass": [...]}; on input a
/// row-major lower triangle under "tri" (with or without the diagonal) may
/// replace "dist".
Json space_to_json(const FiniteMMSpace& space);
FiniteMMSpace space_from_json(const Json& j);

Json dmd_to_json(const EmpiricalDMD& dmd);
EmpiricalDMD dmd_from_json(const Json& j);

Json excursion_to_json(const PLExcursion& e);
PLExcursion excursion_from_json(const Json& j);

Json tree_to_json(const GraphTree& tree);
GraphTree tree_from_json(const Json& j);

Json search_to_json(const SearchParams& p);
SearchParams search_from_json(const Json& j);

Json report_to_json(const DistanceReport& r);

/// "t,value" lines for plotting.
void write_path_csv(std::ostream& out, const LatticePath& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

Json read_json_file(const std::string& path);

}  // namespace mms
