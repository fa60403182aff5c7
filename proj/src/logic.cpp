#include "peirce/logic.hpp"

#include <cctype>
#include <map>

#include "peirce/errors.hpp"

namespace peirce::logic {

bool Atom::is_ground() const {
    for (const auto& t : args)
        if (t.is_var()) return false;
    return true;
}

std::string default_label(size_t position_1based) {
    return "axiom_" + std::to_string(position_1based);
}

namespace {

struct Token {
    enum Kind { ident, punct, end } kind;
    std::string text;  // for punct: one of ":-", "?-", ".", ",", "(", ")", "@"
    size_t line;
    size_t col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        skip_ws_and_comments();
        size_t line = line_, col = col_;
        if (pos_ >= src_.size()) return {Token::end, "", line, col};
        char c = src_[pos_];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            std::string text;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                text.push_back(advance());
            return {Token::ident, text, line, col};
        }
        if (c == ':' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
            advance();
            advance();
            return {Token::punct, ":-", line, col};
        }
        if (c == '?' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
            advance();
            advance();
            return {Token::punct, "?-", line, col};
        }
        if (c == '.' || c == ',' || c == '(' || c == ')' || c == '@') {
            advance();
            return {Token::punct, std::string(1, c), line, col};
        }
        throw TheorySyntaxError(line, col, "a clause, goal or @label directive");
    }

private:
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    const std::string& src_;
    size_t pos_ = 0;
    size_t line_ = 1;
    size_t col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lexer_(src) { shift(); }

    Theory parse() {
        Theory theory;
        bool goal_seen = false;
        while (tok_.kind != Token::end) {
            if (tok_.kind == Token::punct && tok_.text == "@") {
                std::string label = parse_label_directive();
                theory.clauses.push_back(parse_clause(label));
            } else if (tok_.kind == Token::punct && tok_.text == "?-") {
                if (goal_seen) throw TheorySyntaxError(tok_.line, tok_.col, "at most one goal");
                goal_seen = true;
                shift();
                theory.goal = parse_atom_list();
                expect_punct(".");
            } else if (tok_.kind == Token::ident) {
                theory.clauses.push_back(parse_clause(""));
            } else {
                throw TheorySyntaxError(tok_.line, tok_.col, "a clause, goal or @label directive");
            }
        }
        for (size_t i = 0; i < theory.clauses.size(); ++i)
            if (theory.clauses[i].label.empty()) theory.clauses[i].label = default_label(i + 1);
        return theory;
    }

private:
    void shift() { tok_ = lexer_.next(); }

    void expect_punct(const std::string& p) {
        if (tok_.kind != Token::punct || tok_.text != p)
            throw TheorySyntaxError(tok_.line, tok_.col, "'" + p + "'");
        shift();
    }

    std::string parse_label_directive() {
        expect_punct("@");
        if (tok_.kind != Token::ident || tok_.text != "label") {
            // Point at the first character that stops matching the keyword, so a
            // damaged "label" is reported inside the damage rather than at the '@'.
            int off = 0;
            if (tok_.kind == Token::ident) {
                static const std::string kw = "label";
                while (off < static_cast<int>(tok_.text.size()) &&
                       off < static_cast<int>(kw.size()) &&
                       tok_.text[static_cast<size_t>(off)] == kw[static_cast<size_t>(off)])
                    ++off;
            }
            throw TheorySyntaxError(tok_.line, tok_.col + off, "'label'");
        }
        shift();
        expect_punct("(");
        if (tok_.kind != Token::ident)
            throw TheorySyntaxError(tok_.line, tok_.col, "a label name");
        std::string name = tok_.text;
        shift();
        expect_punct(")");
        return name;
    }

    Clause parse_clause(std::string label) {
        Clause c;
        c.label = std::move(label);
        c.head = parse_atom();
        if (tok_.kind == Token::punct && tok_.text == ":-") {
            shift();
            c.body = parse_atom_list();
        }
        expect_punct(".");
        return c;
    }

    std::vector<Atom> parse_atom_list() {
        std::vector<Atom> atoms{parse_atom()};
        while (tok_.kind == Token::punct && tok_.text == ",") {
            shift();
            atoms.push_back(parse_atom());
        }
        return atoms;
    }

    Atom parse_atom() {
        if (tok_.kind != Token::ident)
            throw TheorySyntaxError(tok_.line, tok_.col, "a predicate name");
        char first = tok_.text[0];
        if (!std::islower(static_cast<unsigned char>(first)))
            throw TheorySyntaxError(tok_.line, tok_.col, "a lowercase predicate name");
        Atom atom;
        atom.predicate = tok_.text;
        size_t line = tok_.line, col = tok_.col;
        shift();
        if (tok_.kind == Token::punct && tok_.text == "(") {
            shift();
            atom.args.push_back(parse_term());
            while (tok_.kind == Token::punct && tok_.text == ",") {
                shift();
                atom.args.push_back(parse_term());
            }
            expect_punct(")");
        }
        check_arity(atom, line, col);
        return atom;
    }

    Term parse_term() {
        if (tok_.kind != Token::ident)
            throw TheorySyntaxError(tok_.line, tok_.col, "a term");
        char first = tok_.text[0];
        Term t;
        if (std::isupper(static_cast<unsigned char>(first)) || first == '_')
            t = Term::var(tok_.text);
        else
            t = Term::constant(tok_.text);
        shift();
        return t;
    }

    void check_arity(const Atom& atom, size_t line, size_t col) {
        auto [it, inserted] = arities_.emplace(atom.predicate, atom.arity());
        if (!inserted && it->second != atom.arity())
            throw ArityConflictError(atom.predicate, it->second, atom.arity());
        (void)line;
        (void)col;
    }

    Lexer lexer_;
    Token tok_;
    std::map<std::string, size_t> arities_;
};

}  // namespace

Theory parse_theory(const std::string& source) { return Parser(source).parse(); }

std::string to_string(const Term& t) { return t.name; }

std::string to_string(const Atom& a) {
    std::string out = a.predicate;
    if (!a.args.empty()) {
        out += "(";
        for (size_t i = 0; i < a.args.size(); ++i) {
            if (i) out += ", ";
            out += to_string(a.args[i]);
        }
        out += ")";
    }
    return out;
}

std::string to_string(const Clause& c) {
    std::string out = to_string(c.head);
    if (!c.body.empty()) {
        out += " :- ";
        for (size_t i = 0; i < c.body.size(); ++i) {
            if (i) out += ", ";
            out += to_string(c.body[i]);
        }
    }
    out += ".";
    return out;
}

std::string pretty_print(const Theory& theory) {
    std::string out;
    for (size_t i = 0; i < theory.clauses.size(); ++i) {
        const Clause& c = theory.clauses[i];
        if (c.label != default_label(i + 1)) out += "@label(" + c.label + ")\n";
        out += to_string(c);
        out += "\n";
    }
    if (!theory.goal.empty()) {
        out += "?- ";
        for (size_t i = 0; i < theory.goal.size(); ++i) {
            if (i) out += ", ";
            out += to_string(theory.goal[i]);
        }
        out += ".\n";
    }
    return out;
}

}  // namespace peirce::logic
