#include "pram/rules.hpp"

#include <algorithm>
#include <cmath>

namespace pram {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

bool operator==(const ProbabilityExpr& a, const ProbabilityExpr& b) {
    if (!a.node_ || !b.node_) return a.node_ == b.node_;
    return a.node_->value == b.node_->value;
}

ProbabilityExpr ProbabilityExpr::literal(double v, SourcePos pos) {
    ProbabilityExpr e;
    e.node_ = std::make_shared<ExprNode>(ExprNode{Literal{v}});
    e.pos_ = pos;
    return e;
}

ProbabilityExpr ProbabilityExpr::let_ref(std::string name, std::size_t slot, SourcePos pos) {
    ProbabilityExpr e;
    e.node_ = std::make_shared<ExprNode>(ExprNode{LetRef{std::move(name), slot}});
    e.pos_ = pos;
    return e;
}

ProbabilityExpr ProbabilityExpr::proportion(AttrRef relation, std::vector<Test> predicate, SourcePos pos) {
    ProbabilityExpr e;
    e.node_ = std::make_shared<ExprNode>(ExprNode{Proportion{std::move(relation), std::move(predicate)}});
    e.pos_ = pos;
    return e;
}

ProbabilityExpr ProbabilityExpr::binary(Op op, ProbabilityExpr lhs, ProbabilityExpr rhs, SourcePos pos) {
    ProbabilityExpr e;
    e.node_ = std::make_shared<ExprNode>(ExprNode{Binary{op, std::move(lhs), std::move(rhs)}});
    e.pos_ = pos;
    return e;
}

std::optional<double> ProbabilityExpr::literal_value() const {
    if (!node_) return std::nullopt;
    if (const auto* lit = std::get_if<Literal>(&node_->value)) return lit->value;
    return std::nullopt;
}

Conjunct Test::conjunct() const {
    if (!attr.resolved()) throw SchemaError("unbound attribute '" + attr.name + "'", attr.pos);
    return Conjunct{*attr.kind, attr.index, value};
}

bool Condition::matches(const GroupSignature& sig) const {
    return std::all_of(tests.begin(), tests.end(), [&](const Test& t) { return t.conjunct().matches(sig); });
}

// ---------------------------------------------------------------------------
// bind

namespace {

void bind_attr(AttrRef& ref, const Schema& schema) {
    if (auto f = schema.feature_index(ref.name)) {
        ref.kind = AttributeKind::Feature;
        ref.index = *f;
    } else if (auto r = schema.relation_index(ref.name)) {
        ref.kind = AttributeKind::Relation;
        ref.index = *r;
    } else {
        throw SchemaError("unknown attribute '" + ref.name + "'", ref.pos);
    }
}

void bind_relation(AttrRef& ref, const Schema& schema) {
    bind_attr(ref, schema);
    if (ref.kind != AttributeKind::Relation) throw SchemaError("'" + ref.name + "' is not a relation", ref.pos);
}

void check_site(const std::string& site, const Schema& schema, SourcePos pos) {
    if (!schema.has_site(SiteId(site))) throw UnknownSiteError("unknown site '" + site + "'", pos);
}

void bind_test(Test& t, const Schema& schema) {
    bind_attr(t.attr, schema);
    if (t.attr.kind == AttributeKind::Relation) check_site(t.value, schema, t.attr.pos);
}

void bind_expr(ProbabilityExpr& expr, const Schema& schema) {
    const auto& v = expr.node().value;
    if (std::holds_alternative<ProbabilityExpr::Proportion>(v) || std::holds_alternative<ProbabilityExpr::Binary>(v)) {
        expr.rewrite([&](ExprNode& node) {
            std::visit(overloaded{[&](ProbabilityExpr::Proportion& p) {
                                      bind_relation(p.relation, schema);
                                      for (auto& t : p.predicate) bind_test(t, schema);
                                  },
                                  [&](ProbabilityExpr::Binary& b) {
                                      bind_expr(b.lhs, schema);
                                      bind_expr(b.rhs, schema);
                                  },
                                  [](auto&) {}},
                       node.value);
        });
    }
}

void bind_action(Action& a, const Schema& schema) {
    bind_attr(a.target, schema);
    if (a.target.kind == AttributeKind::Feature) {
        if (!std::holds_alternative<AttributeValue>(a.value))
            throw SchemaError("feature '" + a.target.name + "' must be set to a quoted value", a.target.pos);
        return;
    }
    auto* ref = std::get_if<SiteRef>(&a.value);
    if (!ref) throw SchemaError("relation '" + a.target.name + "' must be set to site(...) or rel(...)", a.target.pos);
    if (ref->kind == SiteRef::Kind::Literal)
        check_site(ref->site, schema, ref->pos);
    else
        bind_relation(ref->relation, schema);
}

}  // namespace

void bind(RuleSet& rules, const Schema& schema) {
    for (auto& rule : rules.rules) {
        for (auto& let : rule.lets) bind_expr(let.expr, schema);
        for (auto& clause : rule.clauses) {
            for (auto& t : clause.condition.tests) bind_test(t, schema);
            for (auto& br : clause.branches) {
                bind_expr(br.probability, schema);
                for (auto& a : br.actions.actions) bind_action(a, schema);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// evaluation

double evaluate(const ProbabilityExpr& expr, const GroupSignature& group, const Population& snapshot,
                std::span<const double> lets) {
    return std::visit(
        overloaded{
            [](const ProbabilityExpr::Literal& l) { return l.value; },
            [&](const ProbabilityExpr::LetRef& r) {
                if (r.slot >= lets.size()) throw ParseError("let '" + r.name + "' used before definition", expr.pos());
                return lets[r.slot];
            },
            [&](const ProbabilityExpr::Proportion& p) {
                if (!p.relation.resolved()) throw SchemaError("unbound relation '" + p.relation.name + "'", expr.pos());
                std::vector<Conjunct> conj;
                conj.reserve(p.predicate.size());
                for (const auto& t : p.predicate) conj.push_back(t.conjunct());
                return proportion_at_site(snapshot, group.relation(p.relation.index), p.relation.index, conj);
            },
            [&](const ProbabilityExpr::Binary& b) {
                const double l = evaluate(b.lhs, group, snapshot, lets);
                const double r = evaluate(b.rhs, group, snapshot, lets);
                switch (b.op) {
                    case ProbabilityExpr::Op::Add: return l + r;
                    case ProbabilityExpr::Op::Sub: return l - r;
                    case ProbabilityExpr::Op::Mul: return l * r;
                }
                return 0.0;
            }},
        expr.node().value);
}

std::optional<Distribution> evaluate_rule(const Rule& rule, const Group& group, const Population& snapshot) {
    const GroupSignature& sig = group.signature;
    std::vector<double> lets;
    lets.reserve(rule.lets.size());
    for (const auto& let : rule.lets) lets.push_back(evaluate(let.expr, sig, snapshot, lets));

    for (const auto& clause : rule.clauses) {
        if (!clause.condition.matches(sig)) continue;
        Distribution dist;
        dist.reserve(clause.branches.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < clause.branches.size(); ++i) {
            const auto& br = clause.branches[i];
            const double p = evaluate(br.probability, sig, snapshot, lets);
            if (!(p >= 0.0 && p <= 1.0))
                throw ProbabilityRangeError("rule '" + rule.name + "': branch probability " + std::to_string(p) +
                                                " outside [0,1]",
                                            br.pos);
            sum += p;
            dist.push_back({p, &br.actions, i});
        }
        if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
            throw ProbabilitySumError("rule '" + rule.name + "': branch probabilities sum to " + std::to_string(sum),
                                      clause.pos);
        return dist;
    }
    return std::nullopt;
}

std::vector<Assignment> resolve_actions(const ActionList& actions, const GroupSignature& source) {
    std::vector<Assignment> out;
    out.reserve(actions.actions.size());
    for (const auto& a : actions.actions) {
        if (!a.target.resolved()) throw SchemaError("unbound attribute '" + a.target.name + "'", a.target.pos);
        Assignment asg{*a.target.kind, a.target.index, {}};
        if (const auto* atom = std::get_if<AttributeValue>(&a.value)) {
            asg.value = atom->str();
        } else {
            const auto& ref = std::get<SiteRef>(a.value);
            if (ref.kind == SiteRef::Kind::Literal) {
                asg.value = ref.site;
            } else {
                if (!ref.relation.resolved() || ref.relation.index >= source.relations().size())
                    throw SchemaError("rel(" + ref.relation.name + ") does not name a relation of the group",
                                      ref.relation.pos);
                asg.value = source.relation(ref.relation.index).str();
            }
        }
        out.push_back(std::move(asg));
    }
    return out;
}

namespace {

void collect_expr_refs(const ProbabilityExpr& expr, std::vector<const AttrRef*>& out) {
    std::visit(overloaded{[&](const ProbabilityExpr::Proportion& p) {
                              out.push_back(&p.relation);
                              for (const auto& t : p.predicate) out.push_back(&t.attr);
                          },
                          [&](const ProbabilityExpr::Binary& b) {
                              collect_expr_refs(b.lhs, out);
                              collect_expr_refs(b.rhs, out);
                          },
                          [](const auto&) {}},
               expr.node().value);
}

}  // namespace

std::vector<const AttrRef*> attribute_references(const RuleSet& rules) {
    std::vector<const AttrRef*> out;
    for (const auto& rule : rules.rules) {
        for (const auto& let : rule.lets) collect_expr_refs(let.expr, out);
        for (const auto& clause : rule.clauses) {
            for (const auto& t : clause.condition.tests) out.push_back(&t.attr);
            for (const auto& br : clause.branches) {
                collect_expr_refs(br.probability, out);
                for (const auto& a : br.actions.actions) {
                    out.push_back(&a.target);
                    if (const auto* ref = std::get_if<SiteRef>(&a.value); ref && ref->kind == SiteRef::Kind::Lookup)
                        out.push_back(&ref->relation);
                }
            }
        }
    }
    return out;
}

GroupSignature apply_actions(const GroupSignature& sig, const ActionList& actions) {
    const auto writes = resolve_actions(actions, sig);
    return apply_assignments(sig, writes);
}

}  // namespace pram
