#include "pram/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

void apply_thread_limit() {
    const char* env = std::getenv("PRAM_THREADS");
    if (!env) return;
    try {
        pram::set_max_threads(std::stoi(env));
    } catch (const std::exception&) {
        std::cerr << "warning: ignoring invalid PRAM_THREADS='" << env << "'\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic relational agent-based model simulator"};
    app.require_subcommand(1);

    pram::cli::RunArgs run_args;
    std::string plot, out;
    double prune = -1;
    auto* run = app.add_subcommand("run", "Run a simulation from a config file");
    run->add_option("--config", run_args.config, "Run config (TOML subset)")->required()->check(CLI::ExistingFile);
    auto* plot_opt = run->add_option("--plot", plot, "Write an SVG chart of the probes");
    auto* prune_opt = run->add_option("--prune-epsilon", prune, "Drop groups whose mass falls below X");
    auto* out_opt = run->add_option("--out", out, "Trajectory CSV path (overrides the config)");
    run->add_flag("--serial", run_args.serial, "Use the single-threaded reference step");
    run->add_flag("--quiet", run_args.quiet, "Do not log nu per iteration");

    std::string rules_path, schema_path;
    auto* validate = app.add_subcommand("validate", "Parse and check a rule file");
    validate->add_option("--rules", rules_path)->required()->check(CLI::ExistingFile);
    validate->add_option("--schema", schema_path)->required()->check(CLI::ExistingFile);

    std::string population_path;
    auto* inspect = app.add_subcommand("inspect", "Summarize a population file");
    inspect->add_option("--population", population_path)->required()->check(CLI::ExistingFile);

    pram::cli::CompileArgs compile_args;
    auto* compile = app.add_subcommand("compile", "Compile individual records into groups");
    compile->add_option("--records", compile_args.records)->required()->check(CLI::ExistingFile);
    compile->add_option("--schema", compile_args.schema)->required()->check(CLI::ExistingFile);
    compile->add_option("--rules", compile_args.rules)->required()->check(CLI::ExistingFile);
    compile->add_option("--out", compile_args.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;  // --help exits 0; usage errors are input errors
    }
    apply_thread_limit();

    if (*run) {
        if (*plot_opt) run_args.plot = plot;
        if (*prune_opt) run_args.prune_epsilon = prune;
        if (*out_opt) run_args.out = out;
        return pram::cli::cmd_run(run_args, std::cout, std::cerr);
    }
    if (*validate) return pram::cli::cmd_validate(rules_path, schema_path, std::cout, std::cerr);
    if (*inspect) return pram::cli::cmd_inspect(population_path, std::cout, std::cerr);
    return pram::cli::cmd_compile(compile_args, std::cout, std::cerr);
}
