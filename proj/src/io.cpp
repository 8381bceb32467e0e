#include "pram/io.hpp"

#include "pram/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pram {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("invalid JSON: ") + e.what());
    }
}

std::vector<std::string> string_list(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    const json& arr = j.at(key);
    if (!arr.is_array()) throw SchemaError(std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw SchemaError(std::string("'") + key + "' must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::vector<SiteId> site_list(const json& j) {
    std::vector<SiteId> out;
    for (auto& s : string_list(j, "sites")) out.emplace_back(std::move(s));
    return out;
}

std::string value_at(const json& obj, const std::string& name, std::size_t group, const char* what) {
    if (!obj.is_object() || !obj.contains(name))
        throw SchemaError("group " + std::to_string(group) + ": missing " + what + " '" + name + "'");
    const json& v = obj.at(name);
    if (!v.is_string())
        throw SchemaError("group " + std::to_string(group) + ": " + what + " '" + name + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

Population parse_population_json(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw SchemaError("population file must be a JSON object");
    Schema schema;
    schema.sites = site_list(doc);
    if (!doc.contains("schema") || !doc.at("schema").is_object()) throw SchemaError("population file lacks 'schema'");
    schema.features = string_list(doc.at("schema"), "features");
    schema.relations = string_list(doc.at("schema"), "relations");
    schema.normalize();

    std::vector<Group> groups;
    if (doc.contains("groups")) {
        const json& arr = doc.at("groups");
        if (!arr.is_array()) throw SchemaError("'groups' must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const json& g = arr[i];
            std::vector<AttributeValue> features;
            for (const auto& f : schema.features)
                features.emplace_back(value_at(g.value("features", json::object()), f, i, "feature"));
            std::vector<SiteId> relations;
            for (const auto& r : schema.relations)
                relations.emplace_back(value_at(g.value("relations", json::object()), r, i, "relation"));
            for (const char* part : {"features", "relations"}) {
                if (!g.contains(part)) continue;
                for (const auto& [k, _] : g.at(part).items()) {
                    const bool known = std::string(part) == "features" ? schema.feature_index(k).has_value()
                                                                       : schema.relation_index(k).has_value();
                    if (!known)
                        throw SchemaError("group " + std::to_string(i) + ": attribute '" + k + "' not in schema");
                }
            }
            if (!g.contains("mass") || !g.at("mass").is_number())
                throw SchemaError("group " + std::to_string(i) + ": 'mass' must be a number");
            groups.push_back({GroupSignature(std::move(features), std::move(relations)), g.at("mass").get<double>()});
        }
    }
    return Population(std::move(schema), std::move(groups));
}

Population load_population(const std::filesystem::path& path) { return parse_population_json(read_text_file(path)); }

std::string population_to_json(const Population& pop) {
    const Schema& schema = pop.schema();
    json doc;
    doc["sites"] = json::array();
    for (const auto& s : schema.sites) doc["sites"].push_back(s.str());
    doc["schema"] = {{"features", schema.features}, {"relations", schema.relations}};
    doc["groups"] = json::array();
    for (const auto& g : pop.groups()) {
        json features = json::object();
        for (std::size_t i = 0; i < schema.features.size(); ++i)
            features[schema.features[i]] = g.signature.feature(i).str();
        json relations = json::object();
        for (std::size_t i = 0; i < schema.relations.size(); ++i)
            relations[schema.relations[i]] = g.signature.relation(i).str();
        doc["groups"].push_back({{"features", features}, {"relations", relations}, {"mass", g.mass}});
    }
    return doc.dump(2) + "\n";
}

Schema parse_schema_json(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw SchemaError("schema file must be a JSON object");
    Schema schema;
    schema.features = string_list(doc, "features");
    schema.relations = string_list(doc, "relations");
    schema.sites = site_list(doc);
    schema.normalize();
    return schema;
}

Schema load_schema(const std::filesystem::path& path) { return parse_schema_json(read_text_file(path)); }

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_header(const Trajectory& t) {
    std::string out = "iteration,total_mass,nu";
    for (const auto& name : t.probe_names) out += "," + name;
    return out;
}

std::string csv_row(const Observation& o) {
    std::string out = std::to_string(o.iteration) + "," + format_real(o.total_mass) + "," + std::to_string(o.nu);
    for (double p : o.probes) out += "," + format_real(p);
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
    out << csv_header(t) << '\n';
    for (const auto& row : t.rows) out << csv_row(row) << '\n';
}

}  // namespace pram
