#include "pram/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace pram {

namespace {

enum class Tok { Ident, String, Number, Punct, End };

struct Token {
    Tok type = Tok::End;
    std::string text;
    double number = 0.0;
    SourcePos pos;
};

const std::set<std::string, std::less<>> kKeywords = {"rule", "let",  "when", "true",      "and",
                                                      "set",  "site", "rel",  "proportion"};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = {line_, col_};
            if (at_end()) {
                out.push_back(t);
                return out;
            }
            const char c = peek();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.type = Tok::Ident;
                while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                    t.text += advance();
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                lex_number(t);
            } else if (c == '"') {
                lex_string(t);
            } else {
                t.type = Tok::Punct;
                const std::string_view two = src_.substr(i_, 2);
                if (two == "==" || two == "=>") {
                    t.text = std::string(two);
                    advance();
                    advance();
                } else if (std::string_view("{}();,=+-*").find(c) != std::string_view::npos) {
                    t.text = std::string(1, advance());
                } else {
                    throw ParseError(std::string("unexpected character '") + c + "'", t.pos);
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t k = 0) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
    char advance() {
        const char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (!at_end()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                advance();
            } else if (peek() == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    void lex_number(Token& t) {
        t.type = Tok::Number;
        const std::size_t start = i_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (peek() == '.') {
            advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            advance();
            if (peek() == '+' || peek() == '-') advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        t.text = std::string(src_.substr(start, i_ - start));
        const char* first = t.text.data();
        const char* last = first + t.text.size();
        if (*first == '.') {
            // from_chars rejects a leading '.'
            const std::string padded = "0" + t.text;
            t.number = std::stod(padded);
            return;
        }
        auto [ptr, ec] = std::from_chars(first, last, t.number);
        if (ec != std::errc() || ptr != last) throw ParseError("malformed number '" + t.text + "'", t.pos);
    }

    void lex_string(Token& t) {
        t.type = Tok::String;
        advance();
        for (;;) {
            if (at_end() || peek() == '\n') throw ParseError("unterminated string", t.pos);
            const char c = advance();
            if (c == '"') return;
            if (c == '\\') {
                if (at_end()) throw ParseError("unterminated string", t.pos);
                t.text += advance();
            } else {
                t.text += c;
            }
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

    RuleSet ruleset() {
        RuleSet rs;
        std::map<std::string, SourcePos> names;
        while (!check(Tok::End)) {
            Rule r = rule();
            if (auto [it, fresh] = names.emplace(r.name, r.pos); !fresh)
                throw ValidationError("duplicate rule name '" + r.name + "' (first defined at " +
                                          to_string(it->second) + ")",
                                      r.pos);
            rs.rules.push_back(std::move(r));
        }
        return rs;
    }

    Condition bare_condition() {
        Condition c = condition();
        if (!check(Tok::End)) fail("unexpected '" + cur().text + "' after condition");
        return c;
    }

private:
    const Token& cur() const { return toks_[i_]; }
    bool check(Tok t) const { return cur().type == t; }
    bool check_punct(std::string_view p) const { return cur().type == Tok::Punct && cur().text == p; }
    bool check_keyword(std::string_view k) const { return cur().type == Tok::Ident && cur().text == k; }
    const Token& take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur().pos); }

    std::string describe() const {
        switch (cur().type) {
            case Tok::End: return "end of input";
            case Tok::String: return "string \"" + cur().text + "\"";
            default: return "'" + cur().text + "'";
        }
    }

    void expect_punct(std::string_view p) {
        if (!check_punct(p)) fail("expected '" + std::string(p) + "', found " + describe());
        take();
    }
    void expect_keyword(std::string_view k) {
        if (!check_keyword(k)) fail("expected '" + std::string(k) + "', found " + describe());
        take();
    }
    Token expect_ident(std::string_view what) {
        if (!check(Tok::Ident) || kKeywords.count(cur().text))
            fail("expected " + std::string(what) + ", found " + describe());
        return take();
    }
    Token expect_string() {
        if (!check(Tok::String)) fail("expected a quoted string, found " + describe());
        return take();
    }

    AttrRef attr_ref(std::string_view what) {
        Token t = expect_ident(what);
        return AttrRef{t.text, t.pos, std::nullopt, 0};
    }

    Rule rule() {
        Rule r;
        r.pos = cur().pos;
        expect_keyword("rule");
        r.name = expect_ident("rule name").text;
        expect_punct("{");
        lets_.clear();
        while (check_keyword("let")) {
            LetBinding b;
            b.pos = cur().pos;
            take();
            Token name = expect_ident("let name");
            b.name = name.text;
            if (std::find(lets_.begin(), lets_.end(), b.name) != lets_.end())
                throw ParseError("let '" + b.name + "' defined twice", name.pos);
            expect_punct("=");
            b.expr = pexpr();
            expect_punct(";");
            lets_.push_back(b.name);
            r.lets.push_back(std::move(b));
        }
        if (!check_keyword("when")) fail("expected 'when' clause, found " + describe());
        while (check_keyword("when")) r.clauses.push_back(clause());
        expect_punct("}");
        return r;
    }

    RuleClause clause() {
        RuleClause c;
        c.pos = cur().pos;
        expect_keyword("when");
        c.condition = condition();
        expect_punct("{");
        if (check_punct("}")) fail("clause needs at least one branch");
        while (!check_punct("}")) c.branches.push_back(branch());
        take();
        check_literal_sum(c);
        return c;
    }

    static void check_literal_sum(const RuleClause& c) {
        double sum = 0.0;
        for (const auto& b : c.branches) {
            auto v = b.probability.literal_value();
            if (!v) return;
            sum += *v;
        }
        if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
            throw ValidationError("branch probabilities of clause sum to " + std::to_string(sum) + ", not 1", c.pos);
    }

    Condition condition() {
        Condition c;
        if (check_keyword("true")) {
            take();
            return c;
        }
        c.tests.push_back(test());
        while (check_keyword("and")) {
            take();
            c.tests.push_back(test());
        }
        return c;
    }

    Test test() {
        Test t;
        t.attr = attr_ref("attribute name");
        expect_punct("==");
        t.value = expect_string().text;
        return t;
    }

    Branch branch() {
        Branch b;
        b.pos = cur().pos;
        b.probability = pexpr();
        if (auto v = b.probability.literal_value(); v && !(*v >= 0.0 && *v <= 1.0))
            throw ValidationError("branch probability " + std::to_string(*v) + " outside [0,1]", b.pos);
        expect_punct("=>");
        std::map<std::string, SourcePos> targets;
        do {
            Action a = action();
            if (auto [it, fresh] = targets.emplace(a.target.name, a.target.pos); !fresh)
                throw ValidationError("'" + a.target.name + "' set twice in one branch", a.target.pos);
            b.actions.actions.push_back(std::move(a));
        } while (check_punct(",") && (take(), true));
        expect_punct(";");
        return b;
    }

    Action action() {
        expect_keyword("set");
        Action a;
        a.target = attr_ref("attribute name");
        expect_punct("=");
        if (check(Tok::String)) {
            a.value = AttributeValue(take().text);
        } else if (check_keyword("site")) {
            SiteRef ref;
            ref.pos = take().pos;
            expect_punct("(");
            ref.kind = SiteRef::Kind::Literal;
            ref.site = expect_string().text;
            expect_punct(")");
            a.value = std::move(ref);
        } else if (check_keyword("rel")) {
            SiteRef ref;
            ref.pos = take().pos;
            expect_punct("(");
            ref.kind = SiteRef::Kind::Lookup;
            ref.relation = attr_ref("relation name");
            expect_punct(")");
            a.value = std::move(ref);
        } else {
            fail("expected a quoted value, site(...) or rel(...), found " + describe());
        }
        return a;
    }

    ProbabilityExpr pexpr() {
        ProbabilityExpr lhs = term();
        while (check_punct("+") || check_punct("-")) {
            const Token op = take();
            ProbabilityExpr rhs = term();
            lhs = ProbabilityExpr::binary(op.text == "+" ? ProbabilityExpr::Op::Add : ProbabilityExpr::Op::Sub,
                                          std::move(lhs), std::move(rhs), op.pos);
        }
        return lhs;
    }

    ProbabilityExpr term() {
        ProbabilityExpr lhs = atom();
        while (check_punct("*")) {
            const Token op = take();
            lhs = ProbabilityExpr::binary(ProbabilityExpr::Op::Mul, std::move(lhs), atom(), op.pos);
        }
        return lhs;
    }

    ProbabilityExpr atom() {
        const SourcePos pos = cur().pos;
        if (check(Tok::Number)) return ProbabilityExpr::literal(take().number, pos);
        if (check_punct("(")) {
            take();
            ProbabilityExpr e = pexpr();
            expect_punct(")");
            return e;
        }
        if (check_keyword("proportion")) {
            take();
            expect_punct("(");
            AttrRef rel = attr_ref("relation name");
            std::vector<Test> pred;
            while (check_punct(",")) {
                take();
                pred.push_back(test());
            }
            expect_punct(")");
            return ProbabilityExpr::proportion(std::move(rel), std::move(pred), pos);
        }
        if (check(Tok::Ident) && !kKeywords.count(cur().text)) {
            const Token name = take();
            auto it = std::find(lets_.begin(), lets_.end(), name.text);
            if (it == lets_.end()) throw ParseError("undefined name '" + name.text + "'", name.pos);
            return ProbabilityExpr::let_ref(name.text, static_cast<std::size_t>(it - lets_.begin()), pos);
        }
        fail("expected a probability expression, found " + describe());
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    std::vector<std::string> lets_;
};

// ---------------------------------------------------------------------------
// printing

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

int precedence(const ProbabilityExpr& e) {
    if (const auto* b = std::get_if<ProbabilityExpr::Binary>(&e.node().value))
        return b->op == ProbabilityExpr::Op::Mul ? 2 : 1;
    return 3;
}

std::string print_test(const Test& t) { return t.attr.name + " == " + quote(t.value); }

std::string print_condition(const Condition& c) {
    if (c.tests.empty()) return "true";
    std::string out;
    for (std::size_t i = 0; i < c.tests.size(); ++i) {
        if (i) out += " and ";
        out += print_test(c.tests[i]);
    }
    return out;
}

std::string print_action(const Action& a) {
    std::string out = "set " + a.target.name + " = ";
    if (const auto* v = std::get_if<AttributeValue>(&a.value)) return out + quote(v->str());
    const auto& ref = std::get<SiteRef>(a.value);
    if (ref.kind == SiteRef::Kind::Literal) return out + "site(" + quote(ref.site) + ")";
    return out + "rel(" + ref.relation.name + ")";
}

}  // namespace

std::string print_expr(const ProbabilityExpr& expr) {
    const auto& v = expr.node().value;
    if (const auto* l = std::get_if<ProbabilityExpr::Literal>(&v)) return format_number(l->value);
    if (const auto* r = std::get_if<ProbabilityExpr::LetRef>(&v)) return r->name;
    if (const auto* p = std::get_if<ProbabilityExpr::Proportion>(&v)) {
        std::string out = "proportion(" + p->relation.name;
        for (const auto& t : p->predicate) out += ", " + print_test(t);
        return out + ")";
    }
    const auto& b = std::get<ProbabilityExpr::Binary>(v);
    const int prec = b.op == ProbabilityExpr::Op::Mul ? 2 : 1;
    std::string lhs = print_expr(b.lhs);
    std::string rhs = print_expr(b.rhs);
    // Left-associative: the right operand needs parentheses at equal precedence.
    if (precedence(b.lhs) < prec) lhs = "(" + lhs + ")";
    if (precedence(b.rhs) <= prec) rhs = "(" + rhs + ")";
    const char* op = b.op == ProbabilityExpr::Op::Add ? " + " : b.op == ProbabilityExpr::Op::Sub ? " - " : " * ";
    return lhs + op + rhs;
}

std::string print_rules(const RuleSet& rules) {
    std::string out;
    for (std::size_t r = 0; r < rules.rules.size(); ++r) {
        const Rule& rule = rules.rules[r];
        if (r) out += "\n";
        out += "rule " + rule.name + " {\n";
        for (const auto& let : rule.lets) out += "  let " + let.name + " = " + print_expr(let.expr) + ";\n";
        for (const auto& clause : rule.clauses) {
            out += "  when " + print_condition(clause.condition) + " {\n";
            for (const auto& br : clause.branches) {
                out += "    " + print_expr(br.probability) + " =>";
                for (std::size_t i = 0; i < br.actions.actions.size(); ++i)
                    out += (i ? ", " : " ") + print_action(br.actions.actions[i]);
                out += ";\n";
            }
            out += "  }\n";
        }
        out += "}\n";
    }
    return out;
}

RuleSet parse_rules(std::string_view text) { return Parser(text).ruleset(); }

RuleSet parse_rules(std::string_view text, const Schema& schema) {
    RuleSet rs = parse_rules(text);
    bind(rs, schema);
    return rs;
}

Condition parse_condition(std::string_view text, const Schema& schema) {
    RuleSet holder;
    holder.rules.push_back(Rule{});
    holder.rules[0].clauses.push_back(RuleClause{Parser(text).bare_condition(), {}, {}});
    bind(holder, schema);
    return std::move(holder.rules[0].clauses[0].condition);
}

std::string to_string(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Warning: return "warning";
        case Severity::Error: return "error";
    }
    return "?";
}

namespace {

/// Equality guards as attribute -> value; nullopt when the guard contradicts
/// itself and can never match.
std::optional<std::map<std::string, std::string>> guard_map(const Condition& c) {
    std::map<std::string, std::string> m;
    for (const auto& t : c.tests) {
        auto [it, fresh] = m.emplace(t.attr.name, t.value);
        if (!fresh && it->second != t.value) return std::nullopt;
    }
    return m;
}

bool guards_overlap(const std::map<std::string, std::string>& a, const std::map<std::string, std::string>& b) {
    for (const auto& [attr, value] : a) {
        auto it = b.find(attr);
        if (it != b.end() && it->second != value) return false;
    }
    return true;
}

}  // namespace

std::vector<Diagnostic> validate_ruleset(const RuleSet& rules, const Schema& schema) {
    std::vector<Diagnostic> out;
    for (const auto& rule : rules.rules) {
        std::vector<std::optional<std::map<std::string, std::string>>> guards;
        for (const auto& c : rule.clauses) guards.push_back(guard_map(c.condition));
        for (std::size_t i = 0; i < guards.size(); ++i) {
            for (std::size_t j = i + 1; j < guards.size(); ++j) {
                if (guards[i] && guards[j] && guards_overlap(*guards[i], *guards[j]))
                    out.push_back({Severity::Warning,
                                   "rule '" + rule.name + "': clause at " + to_string(rule.clauses[j].pos) +
                                       " overlaps clause at " + to_string(rule.clauses[i].pos) +
                                       "; the earlier clause wins",
                                   rule.clauses[j].pos});
            }
        }
        for (const auto& c : rule.clauses)
            for (const auto& br : c.branches)
                if (auto v = br.probability.literal_value(); v && *v == 0.0)
                    out.push_back({Severity::Warning, "rule '" + rule.name + "': branch has probability 0", br.pos});
    }

    std::set<std::string> used;
    for (const AttrRef* ref : attribute_references(rules)) used.insert(ref->name);
    for (const auto* names : {&schema.features, &schema.relations})
        for (const auto& n : *names)
            if (!used.count(n))
                out.push_back({Severity::Info, "attribute '" + n + "' is never read or written by any rule", {}});
    return out;
}

}  // namespace pram
