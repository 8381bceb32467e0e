#pragma once

#include "pram/errors.hpp"
#include "pram/relational.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pram {

/// A reference to a schema attribute by name. `kind`/`index` are filled in by
/// bind(); positions are diagnostic only and ignored by equality.
struct AttrRef {
    std::string name;
    SourcePos pos;
    std::optional<AttributeKind> kind;
    std::size_t index = 0;

    bool resolved() const noexcept { return kind.has_value(); }
    friend bool operator==(const AttrRef& a, const AttrRef& b) {
        return a.name == b.name && a.kind == b.kind && a.index == b.index;
    }
};

/// `attr == "value"` on a feature or a relation (value is then a site name).
struct Test {
    AttrRef attr;
    std::string value;

    Conjunct conjunct() const;
    friend bool operator==(const Test& a, const Test& b) { return a.attr == b.attr && a.value == b.value; }
};

/// Conjunction of equality tests; empty means `true`.
struct Condition {
    std::vector<Test> tests;

    bool matches(const GroupSignature& sig) const;
    friend bool operator==(const Condition&, const Condition&) = default;
};

/// Target of a relation action: a literal site, or the group's current value
/// of some relation (`rel(has_school)`).
struct SiteRef {
    enum class Kind { Literal, Lookup };
    Kind kind = Kind::Literal;
    std::string site;  // Literal
    AttrRef relation;  // Lookup
    SourcePos pos;

    friend bool operator==(const SiteRef& a, const SiteRef& b) {
        if (a.kind != b.kind) return false;
        return a.kind == Kind::Literal ? a.site == b.site : a.relation == b.relation;
    }
};

/// `set target = value`; value is an atom for features, a SiteRef for relations.
struct Action {
    AttrRef target;
    std::variant<AttributeValue, SiteRef> value;

    friend bool operator==(const Action&, const Action&) = default;
};

struct ActionList {
    std::vector<Action> actions;

    friend bool operator==(const ActionList&, const ActionList&) = default;
};

struct ExprNode;

/// Probability expression tree. Immutable and cheap to copy (shared nodes).
class ProbabilityExpr {
public:
    enum class Op { Add, Sub, Mul };

    struct Literal {
        double value = 0.0;
        friend bool operator==(const Literal&, const Literal&) = default;
    };
    struct LetRef {
        std::string name;
        std::size_t slot = 0;  // index into the rule's lets
        friend bool operator==(const LetRef&, const LetRef&) = default;
    };
    struct Proportion {
        AttrRef relation;
        std::vector<Test> predicate;
        friend bool operator==(const Proportion&, const Proportion&) = default;
    };
    struct Binary;

    ProbabilityExpr() = default;
    static ProbabilityExpr literal(double v, SourcePos pos = {});
    static ProbabilityExpr let_ref(std::string name, std::size_t slot, SourcePos pos = {});
    static ProbabilityExpr proportion(AttrRef relation, std::vector<Test> predicate, SourcePos pos = {});
    static ProbabilityExpr binary(Op op, ProbabilityExpr lhs, ProbabilityExpr rhs, SourcePos pos = {});

    const ExprNode& node() const { return *node_; }
    SourcePos pos() const noexcept { return pos_; }
    std::optional<double> literal_value() const;

    // Mutable access for bind(); nodes are copied on write.
    template <class F>
    void rewrite(F&& f);

    friend bool operator==(const ProbabilityExpr& a, const ProbabilityExpr& b);

private:
    std::shared_ptr<const ExprNode> node_;
    SourcePos pos_;
};

struct ProbabilityExpr::Binary {
    Op op = Op::Add;
    ProbabilityExpr lhs;
    ProbabilityExpr rhs;
    friend bool operator==(const Binary&, const Binary&) = default;
};

struct ExprNode {
    std::variant<ProbabilityExpr::Literal, ProbabilityExpr::LetRef, ProbabilityExpr::Proportion,
                 ProbabilityExpr::Binary>
        value;
};

template <class F>
void ProbabilityExpr::rewrite(F&& f) {
    auto copy = std::make_shared<ExprNode>(*node_);
    f(*copy);
    node_ = std::move(copy);
}

struct Branch {
    ProbabilityExpr probability;
    ActionList actions;
    SourcePos pos;

    friend bool operator==(const Branch& a, const Branch& b) {
        return a.probability == b.probability && a.actions == b.actions;
    }
};

struct RuleClause {
    Condition condition;
    std::vector<Branch> branches;
    SourcePos pos;

    friend bool operator==(const RuleClause& a, const RuleClause& b) {
        return a.condition == b.condition && a.branches == b.branches;
    }
};

struct LetBinding {
    std::string name;
    ProbabilityExpr expr;
    SourcePos pos;

    friend bool operator==(const LetBinding& a, const LetBinding& b) {
        return a.name == b.name && a.expr == b.expr;
    }
};

/// Ordered guarded clauses. The first clause whose condition holds yields a
/// distribution over action lists; no matching clause yields nothing.
struct Rule {
    std::string name;
    std::vector<LetBinding> lets;
    std::vector<RuleClause> clauses;
    SourcePos pos;

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.name == b.name && a.lets == b.lets && a.clauses == b.clauses;
    }
};

struct RuleSet {
    std::vector<Rule> rules;

    bool empty() const noexcept { return rules.empty(); }
    friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

/// Resolves every attribute reference in `rules` against `schema` and checks
/// literal sites against the site registry. Throws SchemaError /
/// UnknownSiteError carrying the source position.
void bind(RuleSet& rules, const Schema& schema);

inline constexpr double kProbabilitySumTolerance = 1e-9;

struct WeightedActions {
    double probability = 0.0;
    const ActionList* actions = nullptr;
    std::size_t branch = 0;
};

using Distribution = std::vector<WeightedActions>;

/// Evaluates the rule's lets against `snapshot`, then returns the
/// distribution of the first matching clause (or nothing). Probabilities are
/// checked, never renormalized.
std::optional<Distribution> evaluate_rule(const Rule& rule, const Group& group, const Population& snapshot);

double evaluate(const ProbabilityExpr& expr, const GroupSignature& group, const Population& snapshot,
                std::span<const double> lets);

/// Resolves rel() lookups against `source` and turns the list into writes.
std::vector<Assignment> resolve_actions(const ActionList& actions, const GroupSignature& source);

/// Every attribute reference in the ruleset: condition and proportion tests,
/// proportion relation arguments, action targets and rel() sources.
std::vector<const AttrRef*> attribute_references(const RuleSet& rules);

/// Pure: returns a new signature; `sig` is unchanged.
GroupSignature apply_actions(const GroupSignature& sig, const ActionList& actions);

}  // namespace pram
