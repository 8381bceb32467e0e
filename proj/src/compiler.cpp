#include "pram/compiler.hpp"

#include "pram/errors.hpp"

#include <istream>

namespace pram {

RelevanceSet relevant_attributes(const RuleSet& rules) {
    RelevanceSet out;
    for (const AttrRef* ref : attribute_references(rules)) {
        if (!ref->resolved()) throw SchemaError("unbound attribute '" + ref->name + "'", ref->pos);
        (*ref->kind == AttributeKind::Feature ? out.features : out.relations).insert(ref->name);
    }
    return out;
}

Schema project_schema(const Schema& schema, const RelevanceSet& relevant) {
    Schema out;
    for (const auto& f : schema.features)
        if (relevant.features.count(f)) out.features.push_back(f);
    for (const auto& r : schema.relations)
        if (relevant.relations.count(r)) out.relations.push_back(r);
    out.sites = schema.sites;
    out.normalize();
    return out;
}

Population compile_population(std::span<const IndividualRecord> records, const RuleSet& rules,
                              const Schema& schema) {
    const RelevanceSet relevant = relevant_attributes(rules);
    for (const auto& f : relevant.features)
        if (!schema.feature_index(f)) throw SchemaError("rules reference feature '" + f + "' absent from the schema");
    for (const auto& r : relevant.relations)
        if (!schema.relation_index(r)) throw SchemaError("rules reference relation '" + r + "' absent from the schema");

    const Schema projected = project_schema(schema, relevant);
    std::map<GroupSignature, double> counts;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& attrs = records[i].attributes;
        auto lookup = [&](const std::string& name) -> const std::string& {
            auto it = attrs.find(name);
            if (it == attrs.end() || it->second.empty())
                throw SchemaError("record " + std::to_string(i) + ": missing attribute '" + name + "'");
            return it->second;
        };
        std::vector<AttributeValue> features;
        for (const auto& f : projected.features) features.emplace_back(lookup(f));
        std::vector<SiteId> relations;
        for (const auto& r : projected.relations) {
            SiteId site(lookup(r));
            if (!projected.has_site(site))
                throw UnknownSiteError("record " + std::to_string(i) + ": unknown site '" + site.str() + "'");
            relations.push_back(std::move(site));
        }
        counts[GroupSignature(std::move(features), std::move(relations))] += 1.0;
    }

    std::vector<Group> groups;
    groups.reserve(counts.size());
    for (auto& [sig, n] : counts) groups.push_back({sig, n});
    return Population(projected, std::move(groups));
}

Population project_population(const Population& pop, const RelevanceSet& relevant) {
    const Schema& schema = pop.schema();
    const Schema projected = project_schema(schema, relevant);
    std::vector<std::size_t> fidx;
    std::vector<std::size_t> ridx;
    for (const auto& f : projected.features) fidx.push_back(*schema.feature_index(f));
    for (const auto& r : projected.relations) ridx.push_back(*schema.relation_index(r));

    std::vector<Group> groups;
    groups.reserve(pop.size());
    for (const auto& g : pop.groups()) {
        std::vector<AttributeValue> features;
        for (std::size_t i : fidx) features.push_back(g.signature.feature(i));
        std::vector<SiteId> relations;
        for (std::size_t i : ridx) relations.push_back(g.signature.relation(i));
        groups.push_back({GroupSignature(std::move(features), std::move(relations)), g.mass});
    }
    return Population(projected, std::move(groups), pop.iteration());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) throw IoError("CSV line " + std::to_string(line_no) + ": unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace

std::vector<IndividualRecord> read_records_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::vector<IndividualRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line, line_no);
        if (header.empty()) {
            header = std::move(fields);
            continue;
        }
        if (fields.size() != header.size())
            throw IoError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                          " fields, found " + std::to_string(fields.size()));
        IndividualRecord rec;
        for (std::size_t i = 0; i < header.size(); ++i) rec.attributes[header[i]] = std::move(fields[i]);
        out.push_back(std::move(rec));
    }
    if (header.empty()) throw IoError("CSV input has no header row");
    return out;
}

}  // namespace pram
