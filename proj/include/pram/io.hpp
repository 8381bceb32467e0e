#pragma once

#include "pram/engine.hpp"
#include "pram/relational.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace pram {

std::string read_text_file(const std::filesystem::path& path);

/// Population file:
///
///     { "sites": [...],
///       "schema": {"features": [...], "relations": [...]},
///       "groups": [ {"features": {...}, "relations": {...}, "mass": 450.0}, ... ] }
///
/// Duplicate signatures are merged on load with summed mass.
Population parse_population_json(std::string_view text);
Population load_population(const std::filesystem::path& path);
std::string population_to_json(const Population& pop);

/// Schema file: `{"features": [...], "relations": [...], "sites": [...]}`.
Schema parse_schema_json(std::string_view text);
Schema load_schema(const std::filesystem::path& path);

/// Trajectory CSV: `iteration,total_mass,nu,<probe names...>`, one row per
/// iteration, reals with up to 12 significant digits.
std::string csv_header(const Trajectory& t);
std::string csv_row(const Observation& o);
void write_trajectory_csv(std::ostream& out, const Trajectory& t);
std::string format_real(double v);

}  // namespace pram
