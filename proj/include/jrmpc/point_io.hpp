#pragma once

#include <string>
#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

enum class PointFormat { ply_ascii, xyz };

/// ".ply" -> ply_ascii, ".xyz"/".txt"/".pts" -> xyz. Throws ContractViolation otherwise.
PointFormat format_from_path(const std::string& path);

/// Reads an ASCII PLY (vertex x/y/z, other properties and elements skipped) or
/// an xyz file (three numbers per line, '#' comments). Throws ParseError with
/// the offending line number; a missing file is reported as line 0.
PointSet parse_point_file(const std::string& path, PointFormat format, std::size_t id = 0);
PointSet parse_point_file(const std::string& path);

/// Writes coordinates multiplied by `scale` with round-trip precision.
/// Throws std::runtime_error naming the path on I/O failure.
void write_point_file(const PointSet& set, const std::string& path, PointFormat format,
                      double scale = 1.0);
void write_point_file(const PointSet& set, const std::string& path, double scale = 1.0);

/// Divides every set by the bounding-box diameter of their union and returns
/// that factor (1 when the union is a single point).
double normalize_sets(std::vector<PointSet>& sets);

}  // namespace jrmpc
