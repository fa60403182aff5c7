#pragma once
// The refinement loop: generate an explanation, critique it, feed the critique
// text back into a repair prompt, stop on formal verification or after a
// bounded number of iterations. Everything that happened lands in the trace.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "peirce/critique.hpp"
#include "peirce/gen.hpp"
#include "peirce/kb.hpp"

namespace peirce::refine {

struct RefinementConfig {
    int max_iterations = 10;
    // Run order; names resolve against the built-in critiques
    // hard | parsimony | coherence | uncertainty.
    std::vector<std::string> critiques = {"hard", "parsimony", "coherence",
                                          "uncertainty"};
    bool stop_on_valid = true;
    int retrieval_top_k = 0;  // 0 = retrieval off
    critique::HardOptions hard;
    // Optional scorer overrides; null picks the lexical baseline / lexicon.
    std::shared_ptr<const critique::EntailmentScorer> entailment_scorer;
    std::shared_ptr<const critique::RemoteHedgingScorer> hedging_scorer;
};

struct IterationRecord {
    int index = 0;
    std::string explanation;
    std::vector<critique::CritiqueReport> reports;
    // Repair prompt sent to the generator; absent on the final iteration.
    std::optional<std::string> feedback_prompt;
};

struct RefinementTrace {
    kb::NLIProblem problem;
    std::vector<IterationRecord> iterations;
    bool final_valid = false;
    int stopped_at = 0;  // index of the last iteration
};

// kb backs retrieval augmentation and must be present when retrieval_top_k > 0.
RefinementTrace refine(gen::GenerativeModel& generator, const RefinementConfig& config,
                       const kb::NLIProblem& problem,
                       const std::optional<std::string>& initial_explanation = std::nullopt,
                       const kb::KnowledgeBase* kb = nullptr);

struct BatchSummary {
    int problems = 0;
    // [i] = how many problems had a valid hard verdict by iteration <= i.
    std::vector<int> cumulative_valid;
    std::vector<std::string> failures;  // "problem-id: error", problem order
};

struct BatchResult {
    // One trace per problem, problem order. A problem whose refinement threw
    // leaves an iteration-less placeholder trace and a failures entry.
    std::vector<RefinementTrace> traces;
    BatchSummary summary;
};

BatchResult refine_batch(gen::GenerativeModel& generator, const RefinementConfig& config,
                         const std::vector<kb::ProblemRecord>& problems,
                         const kb::KnowledgeBase* kb = nullptr, int workers = 1);

// One header record, then one record per iteration.
std::string trace_to_jsonl(const RefinementTrace& trace);
std::string trace_to_markdown(const RefinementTrace& trace);

}  // namespace peirce::refine
