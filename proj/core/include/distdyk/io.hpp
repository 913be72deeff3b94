#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "distdyk/analysis.hpp"
#include "distdyk/engine.hpp"
#include "distdyk/instances.hpp"
#include "distdyk/schedule.hpp"
#include "distdyk/topology.hpp"

namespace distdyk {

/// Instance as JSON:
///   {"num_nodes", "dim", "edges": [[i,j],...], "anchor": [[...] per node],
///    "nodes": [{"kind", "class", ...parameters}], "planted_optimum": [...] | null}
/// Infinite box bounds are written as the strings "inf" / "-inf".
std::string instance_to_json(const Instance& instance);
/// Throws IoError on malformed text and StructuralError on inconsistent data.
Instance instance_from_json(std::string_view text);

/// Schedule as JSON: {"w_bar", "cycles": [{"active_edges": [...], "blocks": [[...], ...]}]}.
/// Inside a block set a node is an integer, a whole-edge subspace is [i,j] and a
/// single-coordinate subspace is [i,j,k]; active_edges uses the edge forms.
std::string schedule_to_json(const Schedule& schedule, const SubspaceSet& subspaces);
Schedule schedule_from_json(std::string_view text, const SubspaceSet& subspaces);

/// Header n,w,dual_value,gap,dist_sq,step_norm_sq; 17 significant digits,
/// -inf / inf / nan literals.
void write_history_csv(std::ostream& out, const RunHistory& history);
RunHistory read_history_csv(std::istream& in);

/// {"model", "parameter", "r_squared", "window": [lo, hi]}
std::string rate_fit_to_json(const RateFit& fit);

std::string read_file(const std::filesystem::path& path);
/// Throws IoError when the file cannot be written.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace distdyk
