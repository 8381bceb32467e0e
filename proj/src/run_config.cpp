#include "pram/run_config.hpp"

#include "pram/io.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <variant>

namespace pram {

namespace {

using Value = std::variant<std::string, double, bool>;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Parses one value starting at `s`; the remainder may only hold a comment.
Value parse_value(std::string_view s, SourcePos pos) {
    std::string_view rest;
    Value v;
    if (s.empty()) throw ParseError("missing value", pos);
    if (s.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < s.size() && s[i] != '"'; ++i) {
            if (s[i] == '\\' && i + 1 < s.size()) {
                const char e = s[++i];
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                out += s[i];
            }
        }
        if (i >= s.size()) throw ParseError("unterminated string", pos);
        v = out;
        rest = s.substr(i + 1);
    } else if (s.front() == '\'') {
        const auto end = s.find('\'', 1);
        if (end == std::string_view::npos) throw ParseError("unterminated string", pos);
        v = std::string(s.substr(1, end - 1));
        rest = s.substr(end + 1);
    } else {
        const auto hash = s.find('#');
        std::string_view tok = trim(s.substr(0, hash));
        rest = hash == std::string_view::npos ? std::string_view{} : s.substr(hash);
        if (tok == "true" || tok == "false") {
            v = tok == "true";
        } else {
            double d = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                throw ParseError("cannot parse value '" + std::string(tok) + "'", pos);
            v = d;
        }
    }
    rest = trim(rest);
    if (!rest.empty() && rest.front() != '#') throw ParseError("unexpected text after value", pos);
    return v;
}

const std::string& as_string(const Value& v, const std::string& key, SourcePos pos) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ValidationError("'" + key + "' must be a string", pos);
}

double as_number(const Value& v, const std::string& key, SourcePos pos) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw ValidationError("'" + key + "' must be a number", pos);
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::string section;
    bool have_population = false, have_rules = false, have_iterations = false;
    auto resolve = [&](const std::string& p) { return base_dir.empty() ? std::filesystem::path(p) : base_dir / p; };

    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto indent = raw.find_first_not_of(" \t");
        std::string_view line = trim(raw);
        const SourcePos pos{line_no, indent == std::string_view::npos ? 1 : static_cast<int>(indent) + 1};
        if (line.empty() || line.front() == '#') continue;

        if (line.starts_with("[[")) {
            const auto end = line.find("]]");
            if (end == std::string_view::npos) throw ParseError("unterminated table header", pos);
            section = std::string(trim(line.substr(2, end - 2)));
            if (section != "probe") throw ValidationError("unknown array table [[" + section + "]]", pos);
            cfg.probes.push_back(ProbeSpec{});
            cfg.probes.back().pos = pos;
            continue;
        }
        if (line.front() == '[') {
            const auto end = line.find(']');
            if (end == std::string_view::npos) throw ParseError("unterminated table header", pos);
            section = std::string(trim(line.substr(1, end - 1)));
            if (section != "model" && section != "run") throw ValidationError("unknown table [" + section + "]", pos);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", pos);
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ParseError("empty key", pos);
        const Value value = parse_value(trim(line.substr(eq + 1)), pos);

        if (section == "model") {
            if (key == "population") {
                cfg.population = resolve(as_string(value, key, pos));
                have_population = true;
            } else if (key == "rules") {
                cfg.rules = resolve(as_string(value, key, pos));
                have_rules = true;
            } else {
                throw ValidationError("unknown key '" + key + "' in [model]", pos);
            }
        } else if (section == "run") {
            if (key == "iterations") {
                const double n = as_number(value, key, pos);
                if (!(n >= 1) || n != static_cast<double>(static_cast<std::uint64_t>(n)))
                    throw ValidationError("iterations must be a positive integer", pos);
                cfg.iterations = static_cast<std::uint64_t>(n);
                have_iterations = true;
            } else if (key == "prune_epsilon") {
                const double e = as_number(value, key, pos);
                if (!(e >= 0)) throw ValidationError("prune_epsilon must be non-negative", pos);
                cfg.prune_epsilon = e;
            } else if (key == "csv") {
                cfg.csv = resolve(as_string(value, key, pos));
            } else if (key == "plot") {
                cfg.plot = resolve(as_string(value, key, pos));
            } else if (key == "title") {
                cfg.plot_title = as_string(value, key, pos);
            } else {
                throw ValidationError("unknown key '" + key + "' in [run]", pos);
            }
        } else if (section == "probe") {
            ProbeSpec& p = cfg.probes.back();
            const std::string& s = as_string(value, key, pos);
            if (key == "name") p.name = s;
            else if (key == "relation") p.relation = s;
            else if (key == "site") p.site = s;
            else if (key == "where") p.where = s;
            else throw ValidationError("unknown key '" + key + "' in [[probe]]", pos);
        } else {
            throw ValidationError("key '" + key + "' outside of any table", pos);
        }
    }

    if (!have_population) throw ValidationError("missing [model] population", SourcePos{line_no, 1});
    if (!have_rules) throw ValidationError("missing [model] rules", SourcePos{line_no, 1});
    if (!have_iterations) throw ValidationError("missing [run] iterations", SourcePos{line_no, 1});
    std::set<std::string> names;
    for (const auto& p : cfg.probes) {
        if (p.name.empty() || p.relation.empty() || p.site.empty())
            throw ValidationError("probe needs name, relation and site", p.pos);
        if (!names.insert(p.name).second) throw ValidationError("duplicate probe name '" + p.name + "'", p.pos);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_text_file(path), path.parent_path());
}

}  // namespace pram
