#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "peirce/gen.hpp"
#include "peirce/kb.hpp"
#include "peirce/logic.hpp"
#include "peirce/prover.hpp"

namespace peirce::critique {

struct CritiqueReport {
    std::string kind;  // "hard" | "soft"
    std::string name;
    std::optional<prover::HardVerdict> verdict;  // hard only
    std::optional<double> score;                 // soft only
    std::string feedback;
    std::map<std::string, std::string> artifacts;
};

nlohmann::ordered_json report_to_json(const CritiqueReport& r);

// ---- soft critiques ---------------------------------------------------------

struct IfThenClause {
    std::string antecedent;
    std::string consequent;
    int source_sentence_index = 0;
};

class EntailmentScorer {
public:
    virtual ~EntailmentScorer() = default;
    virtual const std::string& name() const = 0;
    virtual double lo() const = 0;
    virtual double hi() const = 0;
    virtual double score(const std::string& premise,
                         const std::string& hypothesis) const = 0;
};

// Jaccard overlap of content stems; range [0,1].
class LexicalEntailmentScorer : public EntailmentScorer {
public:
    const std::string& name() const override { return name_; }
    double lo() const override { return 0.0; }
    double hi() const override { return 1.0; }
    double score(const std::string& premise,
                 const std::string& hypothesis) const override;

private:
    std::string name_ = "lexical";
};

// POST {task:"entailment", premise, hypothesis} -> {score} with
// score = P(entail) - P(contradict); range [-1,1].
class RemoteEntailmentScorer : public EntailmentScorer {
public:
    explicit RemoteEntailmentScorer(std::string endpoint, int retry_limit = 3,
                                    int backoff_initial_ms = 200);
    const std::string& name() const override { return name_; }
    double lo() const override { return -1.0; }
    double hi() const override { return 1.0; }
    double score(const std::string& premise,
                 const std::string& hypothesis) const override;

private:
    std::string name_ = "remote-entailment";
    std::string endpoint_;
    int retry_limit_;
    int backoff_initial_ms_;
};

// POST {task:"hedging", text} -> {score}; replaces the hedge lexicon.
class RemoteHedgingScorer {
public:
    explicit RemoteHedgingScorer(std::string endpoint, int retry_limit = 3,
                                 int backoff_initial_ms = 200);
    double score(const std::string& text) const;

private:
    std::string endpoint_;
    int retry_limit_;
    int backoff_initial_ms_;
};

struct SoftScores {
    int parsimony = 0;
    double coherence = 0.0;
    double uncertainty = 0.0;
};

nlohmann::ordered_json to_json(const SoftScores& s);

int parsimony(const std::string& problem_text, const std::string& explanation);
int parsimony(const kb::NLIProblem& problem, const std::string& explanation);

std::vector<IfThenClause> extract_if_then(const std::string& explanation);

struct CoherenceResult {
    double value = 0.0;
    bool no_clauses = false;
};
CoherenceResult coherence(const std::string& explanation, const EntailmentScorer& scorer);

double uncertainty(const std::string& explanation);
const std::vector<std::string>& hedge_lexicon();

CritiqueReport parsimony_report(const kb::NLIProblem& problem,
                                const std::string& explanation);
CritiqueReport coherence_report(const std::string& explanation,
                                const EntailmentScorer& scorer);
CritiqueReport uncertainty_report(const std::string& explanation);
CritiqueReport uncertainty_report(const std::string& explanation,
                                  const RemoteHedgingScorer& scorer);

struct IbeResult {
    size_t selected = 0;
    size_t coherence_vote = 0;
    size_t parsimony_vote = 0;
    size_t uncertainty_vote = 0;
    std::vector<int> votes;  // per-candidate tallies
};

IbeResult ibe_select(const std::vector<SoftScores>& candidates);

// ---- hard critique ----------------------------------------------------------

struct FormalisationResult {
    logic::Theory theory;
    std::string raw_llm_output;
    int attempts = 1;
    // clause label -> the premise / explanation sentence it encodes
    std::map<std::string, std::string> sentence_map;
    // explanation sentences no clause label points back to
    std::vector<std::string> unformalised;
};

struct HardOptions {
    int max_formalisation_attempts = 3;
    prover::ProveOptions prove;
};

FormalisationResult formalise(gen::GenerativeModel& model, const kb::NLIProblem& problem,
                              const std::string& explanation,
                              int max_attempts = 3);

CritiqueReport hard_critique(gen::GenerativeModel& model, const kb::NLIProblem& problem,
                             const std::string& explanation,
                             const HardOptions& options = {});

// Theory text in, verdict JSON out, over a subprocess ("<command> <theory-file>"
// with the verdict on stdout). Interface only — no external driver is shipped.
class ExternalProverAdapter {
public:
    explicit ExternalProverAdapter(std::string command);
    prover::HardVerdict prove_theory(const std::string& theory_text) const;

private:
    std::string command_;
};

}  // namespace peirce::critique
