#pragma once

#include "pram/relational.hpp"
#include "pram/rules.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace pram {

/// One individual: attribute name -> value. Features and relations are not
/// distinguished here; the schema says which columns are relations.
struct IndividualRecord {
    std::map<std::string, std::string> attributes;
};

/// Attributes queried or changed by at least one rule.
struct RelevanceSet {
    std::set<std::string> features;
    std::set<std::string> relations;

    bool empty() const noexcept { return features.empty() && relations.empty(); }
    friend bool operator==(const RelevanceSet&, const RelevanceSet&) = default;
};

/// Union of the attributes appearing in conditions, proportion predicates and
/// relation arguments, action targets and rel() sources. `rules` must be bound.
RelevanceSet relevant_attributes(const RuleSet& rules);

/// `schema` restricted to the relevant attributes, declaration order kept.
Schema project_schema(const Schema& schema, const RelevanceSet& relevant);

/// Projects every record onto the rule-relevant attributes and counts
/// records per projected signature. Throws SchemaError naming the record
/// index when a relevant attribute is missing.
Population compile_population(std::span<const IndividualRecord> records, const RuleSet& rules,
                              const Schema& schema);

/// Re-projects an existing population onto `relevant`, merging groups whose
/// projections coincide.
Population project_population(const Population& pop, const RelevanceSet& relevant);

/// Header row of attribute names, one row per individual. Quoted fields
/// (with "" escapes) are accepted.
std::vector<IndividualRecord> read_records_csv(std::istream& in);

}  // namespace pram
