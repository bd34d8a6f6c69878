#pragma once

#include "eddp/engine.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace eddp {

/// Header iter,lb_root,ub_model,ub_policy,t_star,selected,wall_ms,cuts_total
/// (plus eps_c_max,pdsa_iters when `hierarchical`). Unrecorded fields are empty.
/// Numbers use the shortest round-trip decimal form, so equal runs give equal bytes.
void write_trace(std::ostream& out, const std::vector<IterationRecord>& records, bool hierarchical = false);
void save_trace(const std::string& path, const std::vector<IterationRecord>& records, bool hierarchical = false);

/// Parses a trace written by write_trace. Throws ParseError.
std::vector<IterationRecord> read_trace(std::istream& in);
std::vector<IterationRecord> load_trace(const std::string& path);

} // namespace eddp
