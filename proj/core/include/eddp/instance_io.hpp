#pragma once

#include "eddp/model.hpp"

#include <iosfwd>
#include <string>

namespace eddp {

enum class InstanceKind { Stationary, Hierarchical };

/// Reads the header token of an instance file. Throws ParseError.
InstanceKind detect_instance_kind(const std::string& path);

/// Parses and validates (finalize()); see docs/instance_format.md.
/// Throws ParseError, DimensionError, ConfigError or InfeasibleRoot.
StationaryInstance load_instance(const std::string& path);
StationaryInstance parse_instance(std::istream& in);
void write_instance(std::ostream& out, const StationaryInstance& inst);
void save_instance(const std::string& path, const StationaryInstance& inst);

HierarchicalInstance load_hierarchical(const std::string& path);
HierarchicalInstance parse_hierarchical(std::istream& in);
void write_hierarchical(std::ostream& out, const HierarchicalInstance& h);
void save_hierarchical(const std::string& path, const HierarchicalInstance& h);

} // namespace eddp
