#include "fixtures.hpp"

#include "pram/relational.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace pram;
using pram::testing::outbreak_sig;

namespace {

Schema school_schema() {
    Schema s{{"flu"}, {"has_school"}, {SiteId("berry"), SiteId("adams"), SiteId("home")}};
    s.normalize();
    return s;
}

GroupSignature sig(const std::string& flu, const std::string& school) {
    return GroupSignature({AttributeValue(flu)}, {SiteId(school)});
}

}  // namespace

TEST(Schema, NormalizeSortsAndDedupsSites) {
    Schema s{{"flu"}, {"r"}, {SiteId("b"), SiteId("a"), SiteId("b")}};
    s.normalize();
    ASSERT_EQ(s.sites.size(), 2u);
    EXPECT_EQ(s.sites[0].str(), "a");
    EXPECT_TRUE(s.has_site(SiteId("b")));
    EXPECT_FALSE(s.has_site(SiteId("c")));
    EXPECT_EQ(s.feature_index("flu"), 0u);
    EXPECT_EQ(s.relation_index("r"), 0u);
    EXPECT_FALSE(s.feature_index("r"));
}

TEST(Schema, RejectsClashingNames) {
    Schema s{{"x"}, {"x"}, {}};
    EXPECT_THROW(s.normalize(), SchemaError);
    Schema e{{""}, {}, {}};
    EXPECT_THROW(e.normalize(), SchemaError);
}

TEST(GroupSignature, EqualityHashAndOrder) {
    const auto a = sig("s", "adams");
    const auto b = sig("s", "adams");
    const auto c = sig("s", "berry");
    const auto d = sig("e", "berry");
    EXPECT_EQ(a, b);
    EXPECT_TRUE(signature_equal(a, b));
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a, c);
    EXPECT_LT(a, c);
    EXPECT_LT(d, a);  // features compare first
}

TEST(GroupSignature, ToStringNamesAttributes) {
    EXPECT_EQ(to_string(sig("s", "adams"), school_schema()), "{flu:s | has_school:adams}");
}

TEST(GroupSignature, ApplyAssignments) {
    const auto s = sig("s", "adams");
    const std::vector<Assignment> as{{AttributeKind::Feature, 0, "e"}, {AttributeKind::Relation, 0, "home"}};
    EXPECT_EQ(apply_assignments(s, as), sig("e", "home"));
    const std::vector<Assignment> bad{{AttributeKind::Feature, 3, "e"}};
    EXPECT_THROW(apply_assignments(s, bad), SchemaError);
}

TEST(Population, CanonicalSortedAndMerged) {
    Population p(school_schema(), {{sig("s", "berry"), 2}, {sig("e", "adams"), 1}, {sig("s", "berry"), 3}});
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p.groups()[0].signature, sig("e", "adams"));
    EXPECT_EQ(p.groups()[1].mass, 5.0);
    EXPECT_EQ(p.total_mass(), 6.0);
    EXPECT_EQ(p.index_of(sig("s", "berry")), 1u);
    EXPECT_EQ(p.find(sig("r", "berry")), nullptr);
}

TEST(Population, KeepsZeroMassGroups) {
    Population p(school_schema(), {{sig("s", "berry"), 0}, {sig("e", "adams"), 1}});
    EXPECT_EQ(p.size(), 2u);
}

TEST(Population, RejectsInvalidGroups) {
    const auto schema = school_schema();
    EXPECT_THROW(Population(schema, {{sig("s", "nowhere"), 1}}), UnknownSiteError);
    EXPECT_THROW(Population(schema, {{sig("s", "adams"), -1}}), SchemaError);
    EXPECT_THROW(Population(schema, {{sig("s", "adams"), std::numeric_limits<double>::infinity()}}), SchemaError);
    EXPECT_THROW(Population(schema, {{GroupSignature({}, {SiteId("adams")}), 1}}), SchemaError);
}

TEST(Population, InverseRelationIndex) {
    Population p(school_schema(), {{sig("s", "berry"), 2}, {sig("e", "adams"), 1}, {sig("r", "berry"), 4}});
    const auto at_berry = groups_at_site(p, SiteId("berry"), "has_school");
    ASSERT_EQ(at_berry.size(), 2u);
    EXPECT_EQ(at_berry[0]->signature, sig("r", "berry"));
    EXPECT_TRUE(groups_at_site(p, SiteId("home"), "has_school").empty());
    EXPECT_THROW(groups_at_site(p, SiteId("mars"), "has_school"), UnknownSiteError);
    EXPECT_THROW(groups_at_site(p, SiteId("berry"), "has_location"), SchemaError);
}

TEST(Proportion, FractionOfSiteMass) {
    const auto pop = pram::testing::outbreak_population();
    const std::vector<std::pair<std::string, std::string>> exposed{{"flu", "e"}};
    EXPECT_EQ(proportion_at_site(pop, SiteId("adams"), "has_location", exposed), 0.1);
    const std::vector<std::pair<std::string, std::string>> both{{"flu", "s"}, {"mood", "happy"}};
    EXPECT_EQ(proportion_at_site(pop, SiteId("adams"), "has_school", both), 0.9);
}

TEST(Proportion, EmptyAndUnknownSites) {
    const auto pop = pram::testing::outbreak_population();
    const std::vector<std::pair<std::string, std::string>> exposed{{"flu", "e"}};
    EXPECT_THROW(proportion_at_site(pop, SiteId("home"), "has_location", exposed), EmptySiteError);
    EXPECT_THROW(proportion_at_site(pop, SiteId("mars"), "has_location", exposed), UnknownSiteError);
    const std::vector<std::pair<std::string, std::string>> bad{{"colour", "red"}};
    EXPECT_THROW(proportion_at_site(pop, SiteId("adams"), "has_location", bad), SchemaError);
}

TEST(Proportion, AllZeroMassSiteIsEmpty) {
    Population p(school_schema(), {{sig("e", "berry"), 0}, {sig("s", "adams"), 1}});
    const std::vector<Conjunct> exposed{{AttributeKind::Feature, 0, "e"}};
    EXPECT_THROW(proportion_at_site(p, SiteId("berry"), 0, exposed), EmptySiteError);
}

TEST(Fixtures, OutbreakSignatureHelper) {
    const auto pop = pram::testing::outbreak_population();
    ASSERT_NE(pop.find(outbreak_sig("s", "happy", "adams")), nullptr);
    EXPECT_EQ(pop.find(outbreak_sig("s", "happy", "adams"))->mass, 900.0);
}

TEST(Errors, PositionPrefixesMessage) {
    ParseError e("boom", SourcePos{3, 7});
    EXPECT_STREQ(e.what(), "3:7: boom");
    EXPECT_EQ(e.position()->line, 3);
    EXPECT_STREQ(e.kind(), "ParseError");
}
