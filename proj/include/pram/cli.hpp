#pragma once

#include "pram/engine.hpp"
#include "pram/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace pram::cli {

struct RunArgs {
    std::filesystem::path config;
    std::optional<std::filesystem::path> plot;
    std::optional<double> prune_epsilon;
    std::optional<std::filesystem::path> out;  // overrides [run] csv
    bool serial = false;
    bool quiet = false;  // suppress the per-iteration nu log
};

struct CompileArgs {
    std::filesystem::path records;
    std::filesystem::path schema;
    std::filesystem::path rules;
    std::filesystem::path out;
};

/// Each command returns a process exit status: 0 on success, 1 on input or
/// validation errors, 2 when the simulation fails mid-run (the trajectory up
/// to the failure is still written).
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& rules, const std::filesystem::path& schema, std::ostream& out,
                 std::ostream& err);
int cmd_inspect(const std::filesystem::path& population, std::ostream& out, std::ostream& err);
int cmd_compile(const CompileArgs& args, std::ostream& out, std::ostream& err);

std::vector<Probe> build_probes(const std::vector<ProbeSpec>& specs, const Schema& schema);

}  // namespace pram::cli
