#include "peirce/prover.hpp"

#include <algorithm>
#include <set>

#include "peirce/errors.hpp"

namespace peirce::prover {

using logic::Atom;
using logic::Clause;
using logic::Term;
using logic::TermKind;
using logic::Theory;

namespace {

// Follow variable bindings to a fixpoint. Function-free terms make this a
// plain chain walk.
Term walk(const Substitution& s, Term t) {
    while (t.kind == TermKind::variable) {
        auto it = s.find(t.name);
        if (it == s.end()) break;
        t = it->second;
    }
    return t;
}

bool unify_terms(const Term& a, const Term& b, Substitution& s) {
    Term x = walk(s, a);
    Term y = walk(s, b);
    if (x == y) return true;
    // Occurs check is vacuous without function symbols: a variable can only
    // be bound to a constant or a different variable.
    if (x.kind == TermKind::variable) {
        s[x.name] = y;
        return true;
    }
    if (y.kind == TermKind::variable) {
        s[y.name] = x;
        return true;
    }
    return false;  // distinct constants
}

// Resolve every binding chain so the substitution is idempotent.
Substitution normalised(const Substitution& s) {
    Substitution out;
    for (const auto& [name, value] : s) out[name] = walk(s, value);
    return out;
}

Term rename_term(const Term& t, const std::string& suffix) {
    if (t.kind == TermKind::variable) return Term::var(t.name + suffix);
    return t;
}

Clause rename_clause(const Clause& c, size_t step_index) {
    // The parser rejects '#' in identifiers, so renamed variables can never
    // collide with theory variables; live path positions are unique, so they
    // cannot collide with each other either.
    std::string suffix = "#" + std::to_string(step_index);
    Clause out;
    out.label = c.label;
    out.head.predicate = c.head.predicate;
    for (const auto& t : c.head.args) out.head.args.push_back(rename_term(t, suffix));
    for (const auto& b : c.body) {
        Atom atom;
        atom.predicate = b.predicate;
        for (const auto& t : b.args) atom.args.push_back(rename_term(t, suffix));
        out.body.push_back(atom);
    }
    return out;
}

struct GoalAtom {
    Atom atom;
    int budget;  // remaining resolution depth along this branch
};

struct Search {
    const Theory& theory;
    ProveOptions opts;
    int limit = 0;  // current iterative-deepening bound

    std::vector<ProofStep> path;
    std::set<std::string> used_labels;
    bool cut = false;             // some branch was abandoned by a resource bound
    bool pruned = false;          // some branch was cut by the ancestor check
    bool resources_hit = false;   // node or path cap tripped; abort the iteration
    long nodes = 0;

    // Ground atoms currently being resolved, outermost first. A ground atom
    // recurring as its own subgoal can be failed outright: any proof of the
    // inner occurrence would prove the outer one more cheaply.
    std::map<std::string, int> open_ground;

    // Failed goals of this iteration, keyed by printed form, with the
    // deepest selection distance at which each failed.
    std::vector<std::string> failure_order;
    std::map<std::string, std::pair<Atom, int>> failures;

    // Ground atoms that exhausted the clause list: atom -> (largest budget
    // that failed, whether that failure involved a cut). Failure is monotone
    // downward in budget, so any smaller budget may reuse the entry. Entries
    // are context-free: failures involving an ancestor prune are not stored.
    std::map<std::string, std::pair<int, bool>> ground_failed;

    explicit Search(const Theory& t, const ProveOptions& o) : theory(t), opts(o) {}

    void begin_iteration(int l) {
        limit = l;
        path.clear();
        used_labels.clear();
        cut = false;
        pruned = false;
        resources_hit = false;
        nodes = 0;
        open_ground.clear();
        failure_order.clear();
        failures.clear();
        ground_failed.clear();
    }

    void record_failure(const Atom& atom, int dist) {
        std::string key = logic::to_string(atom);
        auto it = failures.find(key);
        if (it == failures.end()) {
            failure_order.push_back(key);
            failures.emplace(key, std::make_pair(atom, dist));
        } else if (dist > it->second.second) {
            it->second.second = dist;
        }
    }

    bool solve(const std::vector<GoalAtom>& goals) {
        if (resources_hit) return false;
        if (goals.empty()) return true;
        if (++nodes > opts.max_nodes || path.size() > opts.max_path) {
            cut = true;
            resources_hit = true;
            return false;
        }

        const GoalAtom& first = goals.front();
        const int dist = limit - first.budget;

        // A ground atom shares no variables with the rest of the goal list,
        // so its proof binds nothing the continuation can see: prove it once
        // in isolation and never revisit its alternatives.
        if (first.atom.is_ground() && goals.size() > 1) {
            size_t mark = path.size();
            if (!solve({first})) return false;
            std::vector<GoalAtom> rest(goals.begin() + 1, goals.end());
            if (solve(rest)) return true;
            path.resize(mark);
            return false;
        }

        std::string ground_key;
        if (first.atom.is_ground()) {
            ground_key = logic::to_string(first.atom);
            if (open_ground.count(ground_key)) {
                // Conclusive in this context, but context-dependent: neither
                // a depth cut nor a fact about the atom itself.
                pruned = true;
                record_failure(first.atom, dist);
                return false;
            }
            auto it = ground_failed.find(ground_key);
            if (it != ground_failed.end() && it->second.first >= first.budget) {
                cut = cut || it->second.second;
                record_failure(first.atom, dist);
                return false;
            }
        }

        if (first.budget <= 0) {
            cut = true;
            record_failure(first.atom, dist);
            return false;
        }

        if (!ground_key.empty()) ++open_ground[ground_key];
        bool cut_before = cut;
        bool pruned_before = pruned;
        cut = false;
        pruned = false;
        bool solved = false;
        for (const Clause& clause : theory.clauses) {
            Clause fresh = rename_clause(clause, path.size());
            auto mgu = unify(first.atom, fresh.head);
            if (!mgu) continue;
            used_labels.insert(clause.label);
            path.push_back({first.atom, clause.label, *mgu});
            std::vector<GoalAtom> next;
            next.reserve(fresh.body.size() + goals.size() - 1);
            for (const Atom& b : fresh.body) next.push_back({prover::apply(*mgu, b), first.budget - 1});
            for (size_t i = 1; i < goals.size(); ++i)
                next.push_back({prover::apply(*mgu, goals[i].atom), goals[i].budget});
            if (solve(next)) {
                solved = true;
                break;
            }
            path.pop_back();
            if (resources_hit) break;
        }
        bool cut_below = cut;
        bool pruned_below = pruned;
        cut = cut_before || cut_below;
        pruned = pruned_before || pruned_below;
        if (!ground_key.empty()) {
            if (--open_ground[ground_key] == 0) open_ground.erase(ground_key);
        }
        if (solved) return true;

        record_failure(first.atom, dist);
        if (!ground_key.empty() && !resources_hit && !pruned_below) {
            auto& entry = ground_failed[ground_key];
            if (entry.first < first.budget) entry = {first.budget, cut_below};
        }
        return false;
    }
};

FailureDiagnostics make_diagnostics(const Search& s, int depth_reached, bool depth_limited) {
    FailureDiagnostics d;
    int deepest = 0;
    for (const auto& key : s.failure_order)
        deepest = std::max(deepest, s.failures.at(key).second);
    for (const auto& key : s.failure_order) {
        const auto& [atom, dist] = s.failures.at(key);
        if (dist == deepest) d.frontier.push_back(atom);
    }
    for (const Clause& c : s.theory.clauses)
        if (!s.used_labels.count(c.label)) d.unused_clauses.push_back(c.label);
    d.depth_reached = depth_reached;
    d.depth_limited = depth_limited;
    return d;
}

}  // namespace

Term apply(const Substitution& s, const Term& t) { return walk(s, t); }

Atom apply(const Substitution& s, const Atom& a) {
    Atom out;
    out.predicate = a.predicate;
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) out.args.push_back(walk(s, t));
    return out;
}

std::optional<Substitution> unify(const Atom& a, const Atom& b, const Substitution& base) {
    if (a.predicate != b.predicate || a.args.size() != b.args.size()) return std::nullopt;
    Substitution s = base;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!unify_terms(a.args[i], b.args[i], s)) return std::nullopt;
    return normalised(s);
}

HardVerdict prove(const Theory& theory, int max_depth) {
    ProveOptions opts;
    opts.max_depth = max_depth;
    return prove(theory, opts);
}

HardVerdict prove(const Theory& theory, const ProveOptions& options) {
    if (theory.goal.empty()) throw NoGoalError();
    if (options.max_depth <= 0) throw DepthLimitNonPositiveError();

    Search search(theory, options);
    for (int limit = 1; limit <= options.max_depth; ++limit) {
        search.begin_iteration(limit);
        std::vector<GoalAtom> goals;
        for (const Atom& g : theory.goal) goals.push_back({g, limit});
        if (search.solve(goals)) {
            HardVerdict v;
            v.valid = true;
            // Shallower iterations failed, so `limit` is the minimal depth.
            v.proof = Proof{search.path, limit};
            return v;
        }
        // An iteration that never hit a bound is conclusive: no deeper search
        // can succeed. A tripped node or path cap only gets worse with depth,
        // so stop there too.
        if (!search.cut || search.resources_hit || limit == options.max_depth) {
            HardVerdict v;
            v.valid = false;
            v.diagnostics = make_diagnostics(search, limit, search.cut);
            return v;
        }
    }
    // Unreachable: the loop always returns at limit == max_depth.
    throw Error(ErrorCategory::data, "prover: search loop exited without a verdict");
}

bool brute_force_entailed(const Theory& theory, size_t base_cap) {
    if (theory.goal.empty()) throw NoGoalError();

    std::set<std::string> constants;
    bool has_variables = false;
    auto scan_atom = [&](const Atom& a) {
        for (const Term& t : a.args) {
            if (t.kind == TermKind::constant) constants.insert(t.name);
            else has_variables = true;
        }
    };
    for (const Clause& c : theory.clauses) {
        scan_atom(c.head);
        for (const Atom& b : c.body) scan_atom(b);
    }
    for (const Atom& g : theory.goal) scan_atom(g);
    if (constants.empty() && has_variables) {
        // One witness constant suffices: with no constants anywhere, every
        // ground consequence is invariant under renaming it.
        constants.insert("herbrand#0");
    }

    std::map<std::string, size_t> arity;
    auto note_arity = [&](const Atom& a) { arity[a.predicate] = a.args.size(); };
    for (const Clause& c : theory.clauses) {
        note_arity(c.head);
        for (const Atom& b : c.body) note_arity(b);
    }
    for (const Atom& g : theory.goal) note_arity(g);

    size_t base_size = 0;
    for (const auto& [pred, k] : arity) {
        size_t combos = 1;
        for (size_t i = 0; i < k; ++i) {
            if (!constants.empty() && combos > base_cap / constants.size()) {
                combos = base_cap + 1;
                break;
            }
            combos *= std::max<size_t>(constants.size(), 1);
        }
        base_size += combos;
        if (base_size > base_cap) throw BaseTooLargeError(base_size);
    }

    std::vector<std::string> consts(constants.begin(), constants.end());

    // Enumerate all groundings of `vars` over the constant pool, invoking fn
    // with each substitution.
    auto for_each_grounding = [&](const std::vector<std::string>& vars, auto&& fn) {
        std::vector<size_t> pick(vars.size(), 0);
        while (true) {
            Substitution s;
            for (size_t i = 0; i < vars.size(); ++i)
                s[vars[i]] = Term::constant(consts[pick[i]]);
            fn(s);
            size_t i = 0;
            for (; i < pick.size(); ++i) {
                if (++pick[i] < consts.size()) break;
                pick[i] = 0;
            }
            if (i == pick.size()) break;
        }
    };

    auto clause_vars = [](const Clause& c) {
        std::set<std::string> vars;
        auto note = [&](const Atom& a) {
            for (const Term& t : a.args)
                if (t.kind == TermKind::variable) vars.insert(t.name);
        };
        note(c.head);
        for (const Atom& b : c.body) note(b);
        return std::vector<std::string>(vars.begin(), vars.end());
    };

    std::set<std::string> derived;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Clause& c : theory.clauses) {
            for_each_grounding(clause_vars(c), [&](const Substitution& s) {
                for (const Atom& b : c.body)
                    if (!derived.count(logic::to_string(prover::apply(s, b)))) return;
                std::string head = logic::to_string(prover::apply(s, c.head));
                if (derived.insert(head).second) changed = true;
            });
            if (derived.size() > base_cap) throw BaseTooLargeError(derived.size());
        }
    }

    std::set<std::string> goal_vars;
    for (const Atom& g : theory.goal)
        for (const Term& t : g.args)
            if (t.kind == TermKind::variable) goal_vars.insert(t.name);

    bool entailed = false;
    for_each_grounding(std::vector<std::string>(goal_vars.begin(), goal_vars.end()),
                       [&](const Substitution& s) {
                           if (entailed) return;
                           for (const Atom& g : theory.goal)
                               if (!derived.count(logic::to_string(prover::apply(s, g)))) return;
                           entailed = true;
                       });
    return entailed;
}

bool check_proof(const Theory& theory, const Proof& proof) {
    if (theory.goal.empty()) throw NoGoalError();

    std::map<std::string, const Clause*> by_label;
    for (const Clause& c : theory.clauses) by_label[c.label] = &c;

    std::vector<Atom> goals = theory.goal;
    for (size_t k = 0; k < proof.steps.size(); ++k) {
        const ProofStep& step = proof.steps[k];
        if (goals.empty()) return false;
        if (!(goals.front() == step.goal)) return false;
        auto it = by_label.find(step.clause_label);
        if (it == by_label.end()) throw UnknownLabelError(step.clause_label);
        Clause fresh = rename_clause(*it->second, k);
        if (!(prover::apply(step.bindings, goals.front()) == prover::apply(step.bindings, fresh.head)))
            return false;
        std::vector<Atom> next;
        for (const Atom& b : fresh.body) next.push_back(prover::apply(step.bindings, b));
        for (size_t i = 1; i < goals.size(); ++i) next.push_back(prover::apply(step.bindings, goals[i]));
        goals = std::move(next);
    }
    return goals.empty();
}

nlohmann::json to_json(const HardVerdict& v) {
    nlohmann::json j;
    j["valid"] = v.valid;
    if (v.proof) {
        nlohmann::json steps = nlohmann::json::array();
        for (const ProofStep& s : v.proof->steps) {
            nlohmann::json bindings = nlohmann::json::object();
            for (const auto& [name, term] : s.bindings) bindings[name] = term.name;
            steps.push_back({{"goal", logic::to_string(s.goal)},
                             {"clause", s.clause_label},
                             {"bindings", bindings}});
        }
        j["proof"] = {{"steps", steps}, {"depth", v.proof->depth}};
    }
    if (v.diagnostics) {
        nlohmann::json frontier = nlohmann::json::array();
        for (const Atom& a : v.diagnostics->frontier) frontier.push_back(logic::to_string(a));
        j["diagnostics"] = {{"frontier", frontier},
                            {"unused_clauses", v.diagnostics->unused_clauses},
                            {"depth_reached", v.diagnostics->depth_reached},
                            {"depth_limited", v.diagnostics->depth_limited}};
    }
    return j;
}

namespace {

Term term_from_name(const std::string& name) {
    if (name.empty()) throw Error(ErrorCategory::data, "empty term name in verdict JSON");
    char c = name[0];
    if ((c >= 'A' && c <= 'Z') || c == '_') return Term::var(name);
    return Term::constant(name);
}

// "p(a, X#0)" -> Atom. Unlike the theory parser this accepts '#', which
// renamed proof variables carry.
Atom parse_atom_text(const std::string& text) {
    size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && text[i] == ' ') ++i; };
    auto is_name_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '#';
    };
    auto read_name = [&] {
        size_t start = i;
        while (i < text.size() && is_name_char(text[i])) ++i;
        if (i == start) throw Error(ErrorCategory::data, "bad atom text: " + text);
        return text.substr(start, i - start);
    };
    skip_ws();
    Atom atom;
    atom.predicate = read_name();
    skip_ws();
    if (i < text.size() && text[i] == '(') {
        ++i;
        while (true) {
            skip_ws();
            atom.args.push_back(term_from_name(read_name()));
            skip_ws();
            if (i < text.size() && text[i] == ',') { ++i; continue; }
            if (i < text.size() && text[i] == ')') { ++i; break; }
            throw Error(ErrorCategory::data, "bad atom text: " + text);
        }
    }
    skip_ws();
    if (i != text.size()) throw Error(ErrorCategory::data, "bad atom text: " + text);
    return atom;
}

}  // namespace

HardVerdict verdict_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("valid") || !j["valid"].is_boolean())
        throw Error(ErrorCategory::data, "verdict JSON must carry a boolean \"valid\"");
    HardVerdict v;
    v.valid = j["valid"].get<bool>();
    if (j.contains("proof")) {
        const auto& p = j["proof"];
        Proof proof;
        proof.depth = p.value("depth", 0);
        for (const auto& s : p.value("steps", nlohmann::json::array())) {
            ProofStep step;
            step.goal = parse_atom_text(s.at("goal").get<std::string>());
            step.clause_label = s.at("clause").get<std::string>();
            if (s.contains("bindings")) {
                // .items() must not run on a temporary (the proxy would dangle).
                for (const auto& [name, value] : s.at("bindings").items()) {
                    // Renamed variables ("X#0") are not parser identifiers, so
                    // classify by leading character instead of reparsing.
                    step.bindings[name] = term_from_name(value.get<std::string>());
                }
            }
            proof.steps.push_back(std::move(step));
        }
        v.proof = std::move(proof);
    }
    if (j.contains("diagnostics")) {
        const auto& d = j["diagnostics"];
        FailureDiagnostics diag;
        for (const auto& f : d.value("frontier", nlohmann::json::array()))
            diag.frontier.push_back(parse_atom_text(f.get<std::string>()));
        for (const auto& u : d.value("unused_clauses", nlohmann::json::array()))
            diag.unused_clauses.push_back(u.get<std::string>());
        diag.depth_reached = d.value("depth_reached", 0);
        diag.depth_limited = d.value("depth_limited", false);
        v.diagnostics = std::move(diag);
    }
    return v;
}

}  // namespace peirce::prover
