#pragma once

#include "pram/dsl.hpp"
#include "pram/engine.hpp"
#include "pram/io.hpp"

#include <filesystem>
#include <string>

namespace pram::testing {

std::filesystem::path models_dir();

Population outbreak_population();
Population two_school_population();
RuleSet core_rules(const Schema& schema);
RuleSet flu_rules(const Schema& schema);

/// Signature in the two-group example's schema (income m, school adams).
GroupSignature outbreak_sig(const std::string& flu, const std::string& mood, const std::string& location);

/// Total mass, relative drift of total mass, etc. over a trajectory.
double max_relative_mass_drift(const Trajectory& t, double reference);

}  // namespace pram::testing
