#include "fixtures.hpp"

#include "pram/compiler.hpp"
#include "pram/dsl.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace pram;

namespace {

std::vector<IndividualRecord> people() {
    std::ifstream in(pram::testing::models_dir() / "people.csv");
    return read_records_csv(in);
}

Schema people_schema() { return load_schema(pram::testing::models_dir() / "people_schema.json"); }

/// Every individual as its own group over the full schema.
Population uncompiled(const std::vector<IndividualRecord>& records, const Schema& schema) {
    std::vector<Group> groups;
    for (const auto& r : records) {
        std::vector<AttributeValue> f;
        std::vector<SiteId> rel;
        for (const auto& n : schema.features) f.emplace_back(r.attributes.at(n));
        for (const auto& n : schema.relations) rel.emplace_back(r.attributes.at(n));
        groups.push_back({GroupSignature(std::move(f), std::move(rel)), 1.0});
    }
    return Population(schema, std::move(groups));
}

}  // namespace

TEST(Relevance, CoreRules) {
    const auto schema = people_schema();
    const auto rules = parse_rules(read_text_file(pram::testing::models_dir() / "flu_core.rules"), schema);
    const auto rel = relevant_attributes(rules);
    EXPECT_EQ(rel.features, (std::set<std::string>{"flu", "mood", "income"}));
    EXPECT_EQ(rel.relations, (std::set<std::string>{"has_location", "has_school"}));
    const auto projected = project_schema(schema, rel);
    EXPECT_EQ(projected.features, (std::vector<std::string>{"flu", "income", "mood"}));
    EXPECT_EQ(projected.sites, schema.sites);
}

TEST(Compile, PeopleIntoEightGroups) {
    const auto records = people();
    ASSERT_EQ(records.size(), 2000u);
    const auto schema = people_schema();
    const auto pop = compile_population(records, pram::testing::flu_rules(schema), schema);
    ASSERT_EQ(pop.size(), 8u);
    EXPECT_EQ(pop.total_mass(), 2000.0);
    for (const auto& g : pop.groups()) EXPECT_TRUE(g.mass == 450.0 || g.mass == 50.0);
    const auto expected = pram::testing::two_school_population();
    EXPECT_EQ(pop.schema().features.size(), expected.schema().features.size());
    for (const auto& g : expected.groups()) {
        // Attribute order may differ; compare by name.
        std::map<std::string, std::string> want;
        for (std::size_t i = 0; i < expected.schema().features.size(); ++i)
            want[expected.schema().features[i]] = g.signature.feature(i).str();
        for (std::size_t i = 0; i < expected.schema().relations.size(); ++i)
            want[expected.schema().relations[i]] = g.signature.relation(i).str();
        std::vector<AttributeValue> f;
        std::vector<SiteId> r;
        for (const auto& n : pop.schema().features) f.emplace_back(want.at(n));
        for (const auto& n : pop.schema().relations) r.emplace_back(want.at(n));
        const auto* found = pop.find(GroupSignature(f, r));
        ASSERT_NE(found, nullptr);
        EXPECT_EQ(found->mass, g.mass);
    }
}

TEST(Compile, DynamicsMatchUncompiled) {
    const auto records = people();
    const auto schema = people_schema();
    const auto full_rules = pram::testing::flu_rules(schema);
    Population full = uncompiled(records, schema);
    ASSERT_EQ(full.size(), 2000u);
    Population compiled = compile_population(records, full_rules, schema);
    const auto compiled_rules = pram::testing::flu_rules(compiled.schema());
    const auto relevant = relevant_attributes(full_rules);
    for (int k = 0; k < 3; ++k) {
        full = step(full, full_rules);
        compiled = step(compiled, compiled_rules);
        const auto projected = project_population(full, relevant);
        ASSERT_EQ(projected.schema(), compiled.schema());
        ASSERT_EQ(projected.size(), compiled.size()) << "iteration " << k + 1;
        for (std::size_t i = 0; i < compiled.size(); ++i) {
            ASSERT_EQ(projected.groups()[i].signature, compiled.groups()[i].signature);
            EXPECT_NEAR(projected.groups()[i].mass, compiled.groups()[i].mass, 1e-9);
        }
    }
}

TEST(Compile, ProjectionIsIdempotent) {
    const auto schema = people_schema();
    const auto rules = pram::testing::flu_rules(schema);
    const auto relevant = relevant_attributes(rules);
    const auto once = project_population(uncompiled(people(), schema), relevant);
    const auto twice = project_population(once, relevant);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        EXPECT_EQ(once.groups()[i].signature, twice.groups()[i].signature);
        EXPECT_EQ(once.groups()[i].mass, twice.groups()[i].mass);
    }
}

TEST(Compile, MissingAttributeNamesRecord) {
    auto records = people();
    records[17].attributes.erase("income");
    const auto schema = people_schema();
    try {
        compile_population(records, pram::testing::flu_rules(schema), schema);
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("record 17"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("income"), std::string::npos);
    }
    records = people();
    records[3].attributes["flu"] = "";
    EXPECT_THROW(compile_population(records, pram::testing::flu_rules(schema), schema), SchemaError);
}

TEST(Compile, IrrelevantAttributesMayBeMissing) {
    auto records = people();
    for (auto& r : records) r.attributes.erase("bus_route");
    const auto schema = people_schema();
    EXPECT_EQ(compile_population(records, pram::testing::flu_rules(schema), schema).size(), 8u);
}

TEST(Compile, UnknownSiteRejected) {
    auto records = people();
    records[0].attributes["has_school"] = "carver";
    const auto schema = people_schema();
    EXPECT_THROW(compile_population(records, pram::testing::flu_rules(schema), schema), UnknownSiteError);
}

TEST(Compile, RuleAttributeAbsentFromSchema) {
    const auto schema = people_schema();
    auto rules = pram::testing::flu_rules(schema);
    Schema narrow = schema;
    narrow.features.erase(std::find(narrow.features.begin(), narrow.features.end(), "mood"));
    EXPECT_THROW(compile_population(people(), rules, narrow), SchemaError);
}

TEST(RecordsCsv, QuotesAndLineEndings) {
    std::istringstream in("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",z\r\n\n1,2,3\n");
    const auto rs = read_records_csv(in);
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_EQ(rs[0].attributes.at("a"), "x,1");
    EXPECT_EQ(rs[0].attributes.at("b"), "say \"hi\"");
    EXPECT_EQ(rs[0].attributes.at("c"), "z");
    EXPECT_EQ(rs[1].attributes.at("c"), "3");
}

TEST(RecordsCsv, Malformed) {
    std::istringstream short_row("a,b\n1\n");
    EXPECT_THROW(read_records_csv(short_row), IoError);
    std::istringstream empty("");
    EXPECT_THROW(read_records_csv(empty), IoError);
    std::istringstream open_quote("a\n\"x\n");
    EXPECT_THROW(read_records_csv(open_quote), IoError);
}
