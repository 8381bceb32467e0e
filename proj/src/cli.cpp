#include "pram/cli.hpp"

#include "pram/compiler.hpp"
#include "pram/dsl.hpp"
#include "pram/io.hpp"
#include "pram/svg.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

namespace pram::cli {

namespace {

void report(std::ostream& err, const std::filesystem::path& file, const Error& e) {
    err << "error: ";
    if (!file.empty()) err << file.string() << ": ";
    err << e.kind() << ": " << e.what() << '\n';
}

void print_diagnostics(std::ostream& os, const std::filesystem::path& file, const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) {
        os << to_string(d.severity) << ": " << file.string();
        if (d.pos.line > 0) os << ":" << to_string(d.pos);
        os << ": " << d.message << '\n';
    }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << contents;
}

}  // namespace

std::vector<Probe> build_probes(const std::vector<ProbeSpec>& specs, const Schema& schema) {
    std::vector<Probe> out;
    for (const auto& s : specs) {
        if (!schema.relation_index(s.relation))
            throw SchemaError("probe '" + s.name + "': unknown relation '" + s.relation + "'", s.pos);
        if (!schema.has_site(SiteId(s.site)))
            throw UnknownSiteError("probe '" + s.name + "': unknown site '" + s.site + "'", s.pos);
        Condition where;
        try {
            where = parse_condition(s.where, schema);
        } catch (const Error& e) {
            throw ValidationError("probe '" + s.name + "': " + e.what(), s.pos);
        }
        out.push_back({s.name, s.relation, SiteId(s.site), std::move(where)});
    }
    return out;
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    Population pop;
    RuleSet rules;
    std::vector<Probe> probes;
    std::filesystem::path current = args.config;
    try {
        cfg = load_run_config(args.config);
        current = cfg.population;
        pop = load_population(cfg.population);
        current = cfg.rules;
        rules = parse_rules(read_text_file(cfg.rules), pop.schema());
        for (const auto& d : validate_ruleset(rules, pop.schema()))
            if (d.severity == Severity::Warning) print_diagnostics(err, cfg.rules, {d});
        current = args.config;
        probes = build_probes(cfg.probes, pop.schema());
    } catch (const Error& e) {
        report(err, current, e);
        return 1;
    }

    if (args.prune_epsilon) {
        if (*args.prune_epsilon < 0) {
            err << "error: --prune-epsilon must be non-negative\n";
            return 1;
        }
        cfg.prune_epsilon = args.prune_epsilon;
    }
    if (args.out) cfg.csv = args.out;
    if (args.plot) cfg.plot = args.plot;

    std::ofstream csv_file;
    if (cfg.csv) {
        csv_file.open(*cfg.csv, std::ios::binary);
        if (!csv_file) {
            err << "error: cannot write '" << cfg.csv->string() << "'\n";
            return 1;
        }
    }
    std::ostream& csv = cfg.csv ? static_cast<std::ostream&>(csv_file) : out;

    Trajectory header;
    for (const auto& p : probes) header.probe_names.push_back(p.name);
    csv << csv_header(header) << '\n';

    RunOptions opts;
    opts.serial = args.serial;
    opts.step.redistribute.prune_epsilon = cfg.prune_epsilon;
    opts.on_observation = [&](const Observation& o) {
        csv << csv_row(o) << '\n';
        csv.flush();
        if (!args.quiet)
            err << "iteration " << o.iteration << ": nu=" << o.nu << " total_mass=" << format_real(o.total_mass)
                << '\n';
    };

    Trajectory trajectory;
    int status = 0;
    try {
        trajectory = run(pop, rules, cfg.iterations, probes, opts).trajectory;
    } catch (const RunError& e) {
        err << "error: " << e.cause_kind() << ": " << e.what() << '\n';
        trajectory = e.partial();
        status = 2;
    }

    if (cfg.plot && !trajectory.probe_names.empty()) {
        std::vector<svg::Series> series(trajectory.probe_names.size());
        for (std::size_t k = 0; k < series.size(); ++k) {
            series[k].name = trajectory.probe_names[k];
            for (const auto& row : trajectory.rows) {
                series[k].x.push_back(static_cast<double>(row.iteration));
                series[k].y.push_back(row.probes[k]);
            }
        }
        svg::ChartOptions chart;
        chart.title = cfg.plot_title;
        chart.y_min = 0.0;
        try {
            write_file(*cfg.plot, svg::line_chart(series, chart));
        } catch (const Error& e) {
            report(err, {}, e);
            return status ? status : 1;
        }
    }
    return status;
}

int cmd_validate(const std::filesystem::path& rules_path, const std::filesystem::path& schema_path,
                 std::ostream& out, std::ostream& err) {
    Schema schema;
    try {
        schema = load_schema(schema_path);
    } catch (const Error& e) {
        report(err, schema_path, e);
        return 1;
    }
    RuleSet rules;
    try {
        rules = parse_rules(read_text_file(rules_path), schema);
    } catch (const Error& e) {
        report(err, rules_path, e);
        return 1;
    }
    const auto diags = validate_ruleset(rules, schema);
    print_diagnostics(out, rules_path, diags);
    const bool errors = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
        return d.severity == Severity::Error;
    });
    out << rules_path.string() << ": " << rules.rules.size() << " rule(s), " << (errors ? "invalid" : "ok") << '\n';
    return errors ? 1 : 0;
}

int cmd_inspect(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
    Population pop;
    try {
        pop = load_population(path);
    } catch (const Error& e) {
        report(err, path, e);
        return 1;
    }
    const Schema& schema = pop.schema();
    auto join = [](const auto& items, auto name_of) {
        std::string s;
        for (const auto& x : items) s += (s.empty() ? "" : ", ") + name_of(x);
        return s.empty() ? std::string("-") : s;
    };
    auto id = [](const std::string& s) { return s; };
    out << "groups (nu): " << pop.size() << '\n';
    out << "total mass:  " << format_real(pop.total_mass()) << '\n';
    out << "features:    " << join(schema.features, id) << '\n';
    out << "relations:   " << join(schema.relations, id) << '\n';
    out << "sites:       " << join(schema.sites, [](const SiteId& s) { return s.str(); }) << '\n';
    if (pop.size() == 0) return 0;

    // Group table: one column per attribute, then the mass.
    std::vector<std::string> head = schema.features;
    head.insert(head.end(), schema.relations.begin(), schema.relations.end());
    head.push_back("mass");
    std::vector<std::vector<std::string>> rows;
    for (const auto& g : pop.groups()) {
        std::vector<std::string> row;
        for (const auto& v : g.signature.features()) row.push_back(v.str());
        for (const auto& s : g.signature.relations()) row.push_back(s.str());
        row.push_back(format_real(g.mass));
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> width(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) {
        width[c] = head[c].size();
        for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    auto print_row = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) out << "  ";
            if (c + 1 == r.size())
                out << std::setw(static_cast<int>(width[c])) << std::right << r[c];
            else
                out << std::setw(static_cast<int>(width[c])) << std::left << r[c];
        }
        out << '\n';
    };
    out << '\n';
    print_row(head);
    for (const auto& r : rows) print_row(r);

    out << "\nmass per site:\n";
    for (std::size_t r = 0; r < schema.relations.size(); ++r) {
        out << "  " << schema.relations[r] << ":";
        for (const auto& site : schema.sites) {
            double m = 0;
            for (std::size_t i : pop.indices_at_site(r, site)) m += pop.groups()[i].mass;
            out << "  " << site.str() << "=" << format_real(m);
        }
        out << '\n';
    }
    return 0;
}

int cmd_compile(const CompileArgs& args, std::ostream& out, std::ostream& err) {
    std::filesystem::path current = args.schema;
    try {
        const Schema schema = load_schema(args.schema);
        current = args.rules;
        const RuleSet rules = parse_rules(read_text_file(args.rules), schema);
        current = args.records;
        std::ifstream in(args.records, std::ios::binary);
        if (!in) throw IoError("cannot open '" + args.records.string() + "'");
        const auto records = read_records_csv(in);
        const Population pop = compile_population(records, rules, schema);
        current = args.out;
        write_file(args.out, population_to_json(pop));
        out << "compiled " << records.size() << " records into " << pop.size() << " groups ("
            << pop.schema().features.size() << " features, " << pop.schema().relations.size() << " relations)\n";
        return 0;
    } catch (const Error& e) {
        report(err, current, e);
        return 1;
    }
}

}  // namespace pram::cli
