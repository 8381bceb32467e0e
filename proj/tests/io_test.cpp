#include "fixtures.hpp"

#include "pram/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace pram;

TEST(PopulationJson, RoundTrip) {
    for (const char* f : {"outbreak_population.json", "two_school_population.json", "snapshot_population.json"}) {
        const auto a = load_population(pram::testing::models_dir() / f);
        const auto b = parse_population_json(population_to_json(a));
        EXPECT_EQ(a.schema(), b.schema()) << f;
        ASSERT_EQ(a.size(), b.size()) << f;
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a.groups()[i].signature, b.groups()[i].signature);
            EXPECT_EQ(a.groups()[i].mass, b.groups()[i].mass);
        }
    }
}

TEST(PopulationJson, TableOneHasZeroMassGroups) {
    const auto pop = load_population(pram::testing::models_dir() / "snapshot_population.json");
    EXPECT_EQ(pop.size(), 12u);
    // The published counts sum to 1000 at adams and 1030 at berry.
    EXPECT_EQ(pop.total_mass(), 2030.0);
    EXPECT_TRUE(std::any_of(pop.groups().begin(), pop.groups().end(), [](const Group& g) { return g.mass == 0; }));
}

TEST(PopulationJson, MergesDuplicates) {
    const auto pop = parse_population_json(R"({"sites":["a"],"schema":{"features":["f"],"relations":["r"]},
        "groups":[{"features":{"f":"x"},"relations":{"r":"a"},"mass":1},
                  {"features":{"f":"x"},"relations":{"r":"a"},"mass":2.5}]})");
    ASSERT_EQ(pop.size(), 1u);
    EXPECT_EQ(pop.groups()[0].mass, 3.5);
}

TEST(PopulationJson, Errors) {
    EXPECT_THROW(parse_population_json("{"), IoError);
    EXPECT_THROW(parse_population_json("[]"), SchemaError);
    EXPECT_THROW(parse_population_json(R"({"sites":["a"],"groups":[]})"), SchemaError);
    const std::string head = R"({"sites":["a"],"schema":{"features":["f"],"relations":["r"]},"groups":[)";
    EXPECT_THROW(parse_population_json(head + R"({"features":{},"relations":{"r":"a"},"mass":1}]})"), SchemaError);
    EXPECT_THROW(parse_population_json(head + R"({"features":{"f":"x","g":"y"},"relations":{"r":"a"},"mass":1}]})"),
                 SchemaError);
    EXPECT_THROW(parse_population_json(head + R"({"features":{"f":"x"},"relations":{"r":"b"},"mass":1}]})"),
                 UnknownSiteError);
    EXPECT_THROW(parse_population_json(head + R"({"features":{"f":"x"},"relations":{"r":"a"},"mass":-1}]})"),
                 SchemaError);
    EXPECT_THROW(parse_population_json(head + R"({"features":{"f":"x"},"relations":{"r":"a"},"mass":"1"}]})"),
                 SchemaError);
    EXPECT_THROW(load_population("/nonexistent/pop.json"), IoError);
}

TEST(SchemaJson, Load) {
    const auto s = load_schema(pram::testing::models_dir() / "flu_schema.json");
    EXPECT_TRUE(s.feature_index("flu"));
    EXPECT_TRUE(s.relation_index("has_school"));
    EXPECT_TRUE(s.has_site(SiteId("berry")));
    EXPECT_THROW(parse_schema_json(R"({"features":["a"],"relations":["a"],"sites":[]})"), SchemaError);
}

TEST(TrajectoryCsv, Format) {
    Trajectory t;
    t.probe_names = {"p", "q"};
    t.rows.push_back({0, 1000, 2, {0.1, std::numeric_limits<double>::quiet_NaN()}});
    t.rows.push_back({1, 999.9999999999999, 7, {2.0 / 3.0, 1}});
    std::ostringstream os;
    write_trajectory_csv(os, t);
    EXPECT_EQ(os.str(), "iteration,total_mass,nu,p,q\n0,1000,2,0.1,nan\n1,1000,7,0.666666666667,1\n");
}
