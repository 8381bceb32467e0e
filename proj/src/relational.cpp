#include "pram/relational.hpp"

#include "pram/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <mutex>
#include <shared_mutex>

namespace pram {

std::string to_string(const SourcePos& pos) {
    return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

Error::Error(const std::string& what, std::optional<SourcePos> pos)
    : std::runtime_error(pos ? to_string(*pos) + ": " + what : what), pos_(pos) {}

namespace {

std::optional<std::size_t> find_name(const std::vector<std::string>& names, std::string_view name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

void hash_combine(std::size_t& seed, std::size_t v) {
    seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

std::optional<std::size_t> Schema::feature_index(std::string_view name) const {
    return find_name(features, name);
}

std::optional<std::size_t> Schema::relation_index(std::string_view name) const {
    return find_name(relations, name);
}

bool Schema::has_site(const SiteId& site) const {
    return std::binary_search(sites.begin(), sites.end(), site);
}

void Schema::normalize() {
    std::set<std::string> seen;
    for (const auto* names : {&features, &relations}) {
        for (const auto& n : *names) {
            if (n.empty()) throw SchemaError("empty attribute name in schema");
            if (!seen.insert(n).second) throw SchemaError("attribute '" + n + "' declared twice in schema");
        }
    }
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
}

GroupSignature::GroupSignature(std::vector<AttributeValue> features, std::vector<SiteId> relations)
    : features_(std::move(features)), relations_(std::move(relations)) {
    std::hash<std::string> h;
    for (const auto& f : features_) hash_combine(hash_, h(f.str()));
    hash_combine(hash_, 0x51);
    for (const auto& r : relations_) hash_combine(hash_, h(r.str()));
}

std::strong_ordering operator<=>(const GroupSignature& a, const GroupSignature& b) {
    if (auto c = a.features_ <=> b.features_; c != 0) return c;
    return a.relations_ <=> b.relations_;
}

bool signature_equal(const GroupSignature& a, const GroupSignature& b) { return a == b; }

std::string to_string(const GroupSignature& sig, const Schema& schema) {
    std::string out = "{";
    for (std::size_t i = 0; i < sig.features().size(); ++i) {
        if (i) out += ", ";
        out += (i < schema.features.size() ? schema.features[i] : "?") + ":" + sig.feature(i).str();
    }
    out += " |";
    for (std::size_t i = 0; i < sig.relations().size(); ++i) {
        out += i ? ", " : " ";
        out += (i < schema.relations.size() ? schema.relations[i] : "?") + ":" + sig.relation(i).str();
    }
    return out + "}";
}

bool Conjunct::matches(const GroupSignature& sig) const {
    if (kind == AttributeKind::Feature) return sig.feature(index).str() == value;
    return sig.relation(index).str() == value;
}

GroupSignature apply_assignments(const GroupSignature& sig, std::span<const Assignment> assignments) {
    if (assignments.empty()) return sig;
    auto features = sig.features();
    auto relations = sig.relations();
    for (const auto& a : assignments) {
        if (a.kind == AttributeKind::Feature) {
            if (a.index >= features.size()) throw SchemaError("action targets a feature absent from the signature");
            features[a.index] = AttributeValue(a.value);
        } else {
            if (a.index >= relations.size()) throw SchemaError("action targets a relation absent from the signature");
            relations[a.index] = SiteId(a.value);
        }
    }
    return GroupSignature(std::move(features), std::move(relations));
}

Population::Population(Schema schema, std::vector<Group> groups, std::uint64_t iteration)
    : schema_(std::move(schema)), iteration_(iteration) {
    schema_.normalize();
    for (const auto& g : groups) {
        if (g.signature.features().size() != schema_.features.size() ||
            g.signature.relations().size() != schema_.relations.size())
            throw SchemaError("group signature does not match the population schema");
        if (!std::isfinite(g.mass) || g.mass < 0.0)
            throw SchemaError("group mass must be a finite non-negative number");
        for (const auto& site : g.signature.relations())
            if (!schema_.has_site(site)) throw UnknownSiteError("unregistered site '" + site.str() + "'");
    }
    // Sorting on (signature, mass) makes duplicate merging independent of input order.
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        if (auto c = a.signature <=> b.signature; c != 0) return c < 0;
        return a.mass < b.mass;
    });
    for (auto& g : groups) {
        if (!groups_.empty() && groups_.back().signature == g.signature)
            groups_.back().mass += g.mass;
        else
            groups_.push_back(std::move(g));
    }
    build_indices();
}

Population::Population(CanonicalTag, Schema schema, std::vector<Group> groups, std::uint64_t iteration)
    : schema_(std::move(schema)), groups_(std::move(groups)), iteration_(iteration) {
    build_indices();
}

Population Population::from_canonical(Schema schema, std::vector<Group> groups, std::uint64_t iteration) {
    return Population(CanonicalTag{}, std::move(schema), std::move(groups), iteration);
}

struct Population::Memo {
    std::shared_mutex mutex;
    std::unordered_map<std::string, double> values;
};

double Population::memoized(const std::string& key, const std::function<double()>& compute) const {
    if (!memo_) return compute();
    {
        std::shared_lock lock(memo_->mutex);
        if (auto it = memo_->values.find(key); it != memo_->values.end()) return it->second;
    }
    const double v = compute();
    std::unique_lock lock(memo_->mutex);
    memo_->values.emplace(key, v);
    return v;
}

void Population::build_indices() {
    memo_ = std::make_shared<Memo>();
    by_signature_.clear();
    by_signature_.reserve(groups_.size());
    inverse_.assign(schema_.relations.size(), {});
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        by_signature_.emplace(groups_[i].signature, i);
        for (std::size_t r = 0; r < inverse_.size(); ++r)
            inverse_[r][groups_[i].signature.relation(r)].push_back(i);
    }
}

double Population::total_mass() const {
    double total = 0.0;
    for (const auto& g : groups_) total += g.mass;
    return total;
}

std::optional<std::size_t> Population::index_of(const GroupSignature& sig) const {
    auto it = by_signature_.find(sig);
    if (it == by_signature_.end()) return std::nullopt;
    return it->second;
}

const Group* Population::find(const GroupSignature& sig) const {
    auto i = index_of(sig);
    return i ? &groups_[*i] : nullptr;
}

std::span<const std::size_t> Population::indices_at_site(std::size_t relation, const SiteId& site) const {
    if (relation >= inverse_.size()) throw SchemaError("relation index out of range");
    const auto& idx = inverse_[relation];
    auto it = idx.find(site);
    if (it == idx.end()) return {};
    return it->second;
}

namespace {

std::size_t require_relation(const Population& pop, std::string_view relation) {
    auto r = pop.schema().relation_index(relation);
    if (!r) throw SchemaError("unknown relation '" + std::string(relation) + "'");
    return *r;
}

}  // namespace

std::vector<const Group*> groups_at_site(const Population& pop, const SiteId& site, std::string_view relation) {
    const std::size_t r = require_relation(pop, relation);
    if (!pop.schema().has_site(site)) throw UnknownSiteError("unknown site '" + site.str() + "'");
    std::vector<const Group*> out;
    for (std::size_t i : pop.indices_at_site(r, site)) out.push_back(&pop.groups()[i]);
    return out;
}

namespace {

double scan_proportion(const Population& pop, const SiteId& site, std::size_t relation,
                       std::span<const Conjunct> predicate) {
    double total = 0.0;
    double matching = 0.0;
    for (std::size_t i : pop.indices_at_site(relation, site)) {
        const Group& g = pop.groups()[i];
        total += g.mass;
        if (std::all_of(predicate.begin(), predicate.end(),
                        [&](const Conjunct& c) { return c.matches(g.signature); }))
            matching += g.mass;
    }
    if (!(total > 0.0)) {
        if (!pop.schema().has_site(site)) throw UnknownSiteError("unknown site '" + site.str() + "'");
        throw EmptySiteError("no mass at site '" + site.str() + "' via relation '" +
                             pop.schema().relations[relation] + "'");
    }
    return matching / total;
}

}  // namespace

double proportion_at_site(const Population& pop, const SiteId& site, std::size_t relation,
                          std::span<const Conjunct> predicate) {
    // Every group at a site asks the same question, so answers are memoized
    // per snapshot. Empty sites throw and are never stored.
    std::string key = std::to_string(relation);
    key += '\0';
    key += site.str();
    for (const auto& c : predicate) {
        key += '\0';
        key += c.kind == AttributeKind::Feature ? 'f' : 'r';
        key += std::to_string(c.index);
        key += '=';
        key += c.value;
    }
    return pop.memoized(key, [&] { return scan_proportion(pop, site, relation, predicate); });
}

double proportion_at_site(const Population& pop, const SiteId& site, std::string_view relation,
                          std::span<const std::pair<std::string, std::string>> predicate) {
    const std::size_t r = require_relation(pop, relation);
    if (!pop.schema().has_site(site)) throw UnknownSiteError("unknown site '" + site.str() + "'");
    std::vector<Conjunct> conj;
    for (const auto& [name, value] : predicate) {
        if (auto f = pop.schema().feature_index(name))
            conj.push_back({AttributeKind::Feature, *f, value});
        else if (auto rr = pop.schema().relation_index(name))
            conj.push_back({AttributeKind::Relation, *rr, value});
        else
            throw SchemaError("unknown attribute '" + name + "'");
    }
    return proportion_at_site(pop, site, r, conj);
}

}  // namespace pram
