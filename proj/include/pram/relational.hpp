#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pram {

/// A discrete feature value such as `s`, `happy` or `m`. Equality is exact
/// symbol equality.
class AttributeValue {
public:
    AttributeValue() = default;
    explicit AttributeValue(std::string text) : text_(std::move(text)) {}

    const std::string& str() const noexcept { return text_; }

    friend bool operator==(const AttributeValue&, const AttributeValue&) = default;
    friend auto operator<=>(const AttributeValue&, const AttributeValue&) = default;

private:
    std::string text_;
};

/// Name of a site (school, home, ...) that relations point at.
class SiteId {
public:
    SiteId() = default;
    explicit SiteId(std::string name) : name_(std::move(name)) {}

    const std::string& str() const noexcept { return name_; }

    friend bool operator==(const SiteId&, const SiteId&) = default;
    friend auto operator<=>(const SiteId&, const SiteId&) = default;

private:
    std::string name_;
};

enum class AttributeKind : std::uint8_t { Feature, Relation };

/// Closed per-model schema: feature names, relation names and the site
/// registry. Every group of one population carries exactly these attributes.
struct Schema {
    std::vector<std::string> features;
    std::vector<std::string> relations;
    std::vector<SiteId> sites;  // sorted, unique after normalize()

    std::optional<std::size_t> feature_index(std::string_view name) const;
    std::optional<std::size_t> relation_index(std::string_view name) const;
    bool has_site(const SiteId& site) const;

    /// Sorts and deduplicates the site registry; rejects duplicate or
    /// clashing attribute names with SchemaError.
    void normalize();

    friend bool operator==(const Schema&, const Schema&) = default;
};

/// Feature values and relation targets, positional w.r.t. the Schema.
/// Immutable; ordering is lexicographic (features first, then relations),
/// which is the canonical order used for deterministic reductions.
class GroupSignature {
public:
    GroupSignature() = default;
    GroupSignature(std::vector<AttributeValue> features, std::vector<SiteId> relations);

    const std::vector<AttributeValue>& features() const noexcept { return features_; }
    const std::vector<SiteId>& relations() const noexcept { return relations_; }
    const AttributeValue& feature(std::size_t i) const { return features_.at(i); }
    const SiteId& relation(std::size_t i) const { return relations_.at(i); }
    std::size_t hash() const noexcept { return hash_; }

    friend bool operator==(const GroupSignature& a, const GroupSignature& b) {
        return a.hash_ == b.hash_ && a.features_ == b.features_ && a.relations_ == b.relations_;
    }
    friend std::strong_ordering operator<=>(const GroupSignature& a, const GroupSignature& b);

private:
    std::vector<AttributeValue> features_;
    std::vector<SiteId> relations_;
    std::size_t hash_ = 0;
};

bool signature_equal(const GroupSignature& a, const GroupSignature& b);

/// Renders `{flu:s, mood:happy | has_location:adams}`.
std::string to_string(const GroupSignature& sig, const Schema& schema);

struct Group {
    GroupSignature signature;
    double mass = 0.0;
};

/// One equality test against a resolved attribute: `flu == "e"` or
/// `has_location == "home"`.
struct Conjunct {
    AttributeKind kind = AttributeKind::Feature;
    std::size_t index = 0;
    std::string value;

    bool matches(const GroupSignature& sig) const;

    friend bool operator==(const Conjunct&, const Conjunct&) = default;
};

/// One resolved write of an attribute.
struct Assignment {
    AttributeKind kind = AttributeKind::Feature;
    std::size_t index = 0;
    std::string value;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Returns a copy of `sig` with each assignment applied. Throws SchemaError
/// when an assignment targets an attribute outside the signature.
GroupSignature apply_assignments(const GroupSignature& sig, std::span<const Assignment> assignments);

}  // namespace pram

template <>
struct std::hash<pram::GroupSignature> {
    std::size_t operator()(const pram::GroupSignature& s) const noexcept { return s.hash(); }
};

namespace pram {

/// The extant groups at one time index plus the model schema. Groups are kept
/// sorted by signature and are unique; the population is immutable once
/// built, so concurrent readers are safe.
class Population {
public:
    Population() = default;

    /// Validates every group against the schema, rejects negative or
    /// non-finite masses and merges duplicate signatures by summing mass.
    Population(Schema schema, std::vector<Group> groups, std::uint64_t iteration = 0);

    /// Trusted constructor for groups that are already sorted and unique.
    static Population from_canonical(Schema schema, std::vector<Group> groups, std::uint64_t iteration);

    const Schema& schema() const noexcept { return schema_; }
    std::span<const Group> groups() const noexcept { return groups_; }
    std::size_t size() const noexcept { return groups_.size(); }
    std::uint64_t iteration() const noexcept { return iteration_; }

    /// Σ mass, accumulated in canonical group order.
    double total_mass() const;

    std::optional<std::size_t> index_of(const GroupSignature& sig) const;
    const Group* find(const GroupSignature& sig) const;

    /// Indices (into groups()) of the groups whose relation `relation`
    /// points at `site`, in canonical order. Empty span for unreferenced sites.
    std::span<const std::size_t> indices_at_site(std::size_t relation, const SiteId& site) const;

    /// Returns the value stored under `key`, computing and storing it on
    /// first use. Safe for concurrent callers; `compute` must be a pure
    /// function of this population. Copies share the memo.
    double memoized(const std::string& key, const std::function<double()>& compute) const;

private:
    struct Memo;

    struct CanonicalTag {};
    Population(CanonicalTag, Schema schema, std::vector<Group> groups, std::uint64_t iteration);
    void build_indices();

    Schema schema_;
    std::vector<Group> groups_;
    std::uint64_t iteration_ = 0;
    std::unordered_map<GroupSignature, std::size_t> by_signature_;
    std::vector<std::map<SiteId, std::vector<std::size_t>>> inverse_;
    std::shared_ptr<Memo> memo_;
};

/// Inverse relation: the extant groups g with g.relations[relation] == site.
std::vector<const Group*> groups_at_site(const Population& pop, const SiteId& site, std::string_view relation);

/// Fraction of the mass related to `site` via `relation` whose signature
/// satisfies every conjunct. Throws EmptySiteError when that mass is zero.
double proportion_at_site(const Population& pop, const SiteId& site, std::size_t relation,
                          std::span<const Conjunct> predicate);

/// Name-based convenience overload; predicate pairs name features or relations.
double proportion_at_site(const Population& pop, const SiteId& site, std::string_view relation,
                          std::span<const std::pair<std::string, std::string>> predicate);

}  // namespace pram
