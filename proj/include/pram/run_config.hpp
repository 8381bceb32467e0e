#pragma once

#include "pram/errors.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pram {

/// `[[probe]]` entry: proportion of the mass related to `site` via
/// `relation` that satisfies `where` (DSL condition syntax).
struct ProbeSpec {
    std::string name;
    std::string relation;
    std::string site;
    std::string where = "true";
    SourcePos pos;
};

struct RunConfig {
    std::filesystem::path population;
    std::filesystem::path rules;
    std::uint64_t iterations = 0;
    std::vector<ProbeSpec> probes;
    std::optional<double> prune_epsilon;
    std::optional<std::filesystem::path> csv;   // stdout when unset
    std::optional<std::filesystem::path> plot;
    std::string plot_title;
};

/// Reads the TOML subset used by run configs:
///
///     [model]   population = "...", rules = "..."
///     [run]     iterations = N, prune_epsilon = X, csv = "...", plot = "...", title = "..."
///     [[probe]] name = "...", relation = "...", site = "...", where = '...'
///
/// Relative paths resolve against `base_dir`. Throws ParseError for syntax
/// and ValidationError for semantic problems, with line/column.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace pram
