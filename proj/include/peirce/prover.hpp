#pragma once
// Goal provability for function-free Horn theories: SLD resolution with
// leftmost selection, occurs check and iterative deepening, plus an
// independent forward-chaining oracle over the finite Herbrand base and a
// proof replay checker. prove() is a pure function of its inputs.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "peirce/logic.hpp"

namespace peirce::prover {

// Variable name -> term, idempotent: every value is fully resolved.
using Substitution = std::map<std::string, logic::Term>;

logic::Term apply(const Substitution& s, const logic::Term& t);
logic::Atom apply(const Substitution& s, const logic::Atom& a);

// mgu with occurs check; nullopt when the atoms do not unify. The result
// extends `base` (bindings already in force).
std::optional<Substitution> unify(const logic::Atom& a, const logic::Atom& b,
                                  const Substitution& base = {});

struct ProofStep {
    logic::Atom goal;          // selected atom, prior bindings applied
    std::string clause_label;
    Substitution bindings;     // mgu applied at this step
};

struct Proof {
    std::vector<ProofStep> steps;  // chronological; step k renames clause vars with #k
    int depth = 0;                 // shallowest refutation depth
};

struct FailureDiagnostics {
    std::vector<logic::Atom> frontier;       // deepest unprovable subgoals
    std::vector<std::string> unused_clauses; // labels never selected
    int depth_reached = 0;
    bool depth_limited = false;
};

// The hard critique's discrete verdict: valid <=> proof present.
struct HardVerdict {
    bool valid = false;
    std::optional<Proof> proof;
    std::optional<FailureDiagnostics> diagnostics;
};

struct ProveOptions {
    int max_depth = 50;
    // Resource guards; exceeding either aborts the search as depth-limited.
    long max_nodes = 2'000'000;
    size_t max_path = 10'000;
};

HardVerdict prove(const logic::Theory& theory, int max_depth);
HardVerdict prove(const logic::Theory& theory, const ProveOptions& options);

// Forward-chaining fixpoint over the Herbrand base; independent of the SLD
// path. base_cap bounds the number of ground atoms considered.
bool brute_force_entailed(const logic::Theory& theory, size_t base_cap = 1'000'000);

// Replays proof steps from theory.goal; true iff they derive the empty goal.
bool check_proof(const logic::Theory& theory, const Proof& proof);

nlohmann::json to_json(const HardVerdict& v);
HardVerdict verdict_from_json(const nlohmann::json& j);

}  // namespace peirce::prover
