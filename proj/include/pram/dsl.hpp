#pragma once

#include "pram/rules.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pram {

/// Parses rule-DSL source. With a schema the result is bound (attribute and
/// site references checked); without one it is left unbound.
///
/// Grammar (whitespace-insensitive, `#` starts a line comment):
///
///     ruleset := rule*
///     rule    := "rule" IDENT "{" let* clause+ "}"
///     let     := "let" IDENT "=" pexpr ";"
///     clause  := "when" cond "{" branch+ "}"
///     cond    := "true" | test ("and" test)*
///     test    := IDENT "==" STRING
///     branch  := pexpr "=>" action ("," action)* ";"
///     action  := "set" IDENT "=" (STRING | "site(" STRING ")" | "rel(" IDENT ")")
///     pexpr   := term (("+" | "-") term)*
///     term    := atom ("*" atom)*
///     atom    := NUMBER | IDENT | "proportion(" IDENT ("," test)* ")" | "(" pexpr ")"
///
/// Errors: ParseError (syntax, undefined let names), SchemaError /
/// UnknownSiteError (bad references), ValidationError (all-literal branch
/// sums outside 1 ± 1e-9, probabilities outside [0,1], duplicate targets in
/// one action list, duplicate rule names). All carry a line/column.
RuleSet parse_rules(std::string_view text);
RuleSet parse_rules(std::string_view text, const Schema& schema);

/// Parses a bare condition (`flu == "e" and sex == "f"`, or `true`), bound
/// against `schema`. Used for run-config probe predicates.
Condition parse_condition(std::string_view text, const Schema& schema);

/// Canonical text form; parse_rules(print_rules(r)) == r.
std::string print_rules(const RuleSet& rules);
std::string print_expr(const ProbabilityExpr& expr);

enum class Severity { Info, Warning, Error };

struct Diagnostic {
    Severity severity = Severity::Info;
    std::string message;
    SourcePos pos;
};

std::string to_string(Severity s);

/// Static checks over a bound ruleset: overlapping equality guards within a
/// rule (warning), literal zero-probability branches (warning), schema
/// attributes never read or written (info).
std::vector<Diagnostic> validate_ruleset(const RuleSet& rules, const Schema& schema);

}  // namespace pram
