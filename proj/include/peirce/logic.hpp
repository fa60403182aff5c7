#pragma once
// Function-free Horn programs (facts, rules, one conjunctive goal) in
// Prolog-style concrete syntax. All types are immutable values; the parser is
// stateless and reentrant.

#include <string>
#include <vector>

namespace peirce::logic {

enum class TermKind { variable, constant };

struct Term {
    TermKind kind;
    std::string name;

    static Term var(std::string name) { return {TermKind::variable, std::move(name)}; }
    static Term constant(std::string name) { return {TermKind::constant, std::move(name)}; }
    bool is_var() const { return kind == TermKind::variable; }
    bool operator==(const Term&) const = default;
};

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    size_t arity() const { return args.size(); }
    bool is_ground() const;
    bool operator==(const Atom&) const = default;
};

// Empty body => fact. Labels name clauses in diagnostics; a clause at 1-based
// position i defaults to "axiom_i".
struct Clause {
    Atom head;
    std::vector<Atom> body;
    std::string label;

    bool is_fact() const { return body.empty(); }
    bool operator==(const Clause&) const = default;
};

struct Theory {
    std::vector<Clause> clauses;
    std::vector<Atom> goal;  // conjunctive query; empty when no ?- was given

    bool operator==(const Theory&) const = default;
};

// Grammar: `fact.` | `head :- b1, ..., bn.` | `?- g1, ..., gn.`
// `%` starts a line comment; `@label(name)` preceding a clause names it.
// Variables start uppercase or `_`, constants lowercase or digit. Predicate
// arities must be consistent across the theory (ArityConflict), and exactly
// one goal is allowed. Non-Horn constructs are syntax errors.
Theory parse_theory(const std::string& source);

// Canonical text: one clause per line, single spaces after commas, `@label`
// emitted only where the label differs from its positional default.
// parse_theory(pretty_print(t)) is structurally equal to t.
std::string pretty_print(const Theory& theory);

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Clause& c);

std::string default_label(size_t position_1based);

}  // namespace peirce::logic
