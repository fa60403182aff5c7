#pragma once
// Statement knowledge bases: corpora of annotated statements whose premise
// links form explanations. Immutable after load; safe to share across threads.

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace peirce::kb {

struct Statement {
    std::string id;
    std::string surface;
    std::vector<std::string> entities;
    std::vector<std::string> premise_ids;           // link order is significant
    std::map<std::string, std::string> annotations;  // unknown keys preserved
};

// A (premise, hypothesis) or (question, candidates) problem to be explained.
struct NLIProblem {
    std::string id;
    std::optional<std::string> premise;
    std::string hypothesis;
    std::vector<std::string> candidates;             // empty or >= 2 entries
    std::vector<std::string> gold_premise_ids;
    std::map<std::string, std::string> annotations;

    // premise + hypothesis + candidates, space-joined (concept extraction input).
    std::string full_text() const;
};

class KnowledgeBase {
public:
    KnowledgeBase() = default;
    KnowledgeBase(std::string name, std::vector<Statement> statements);

    const std::string& name() const { return name_; }
    const std::vector<Statement>& statements() const { return statements_; }
    size_t size() const { return statements_.size(); }

    bool contains(const std::string& id) const { return index_.count(id) > 0; }
    const Statement& get(const std::string& id) const;  // UnknownId

    auto begin() const { return statements_.begin(); }
    auto end() const { return statements_.end(); }

private:
    std::string name_;
    std::vector<Statement> statements_;
    std::unordered_map<std::string, size_t> index_;
};

// One JSON object per line, format tag "jsonl-v1". Validates id uniqueness,
// premise resolution and premise-graph acyclicity. Statements that link
// across annotation "split" values are reported through `warnings` (never
// rejected).
KnowledgeBase load_kb(const std::string& path, const std::string& format = "jsonl-v1",
                      std::vector<std::string>* warnings = nullptr);

// Canonical jsonl-v1 text: keys in the order id, surface, entities,
// premise_ids, annotations (annotation keys sorted), one LF-terminated line
// per statement. load(save(kb)) is byte-stable.
std::string save_kb(const KnowledgeBase& kb);

// Statements whose annotations contain key with exactly value, in corpus order.
std::vector<Statement> filter_statements(const KnowledgeBase& kb, const std::string& key,
                                         const std::string& value);

// The statements referenced by premise_ids, in link order.
std::vector<Statement> explanation_of(const KnowledgeBase& kb, const std::string& id);

// Problems file: one JSON object per line with id, hypothesis, optional
// premise/candidates/gold_premise_ids/annotations. An optional
// initial_explanation string rides along for the refinement CLI.
struct ProblemRecord {
    NLIProblem problem;
    std::optional<std::string> initial_explanation;
};
std::vector<ProblemRecord> load_problems(const std::string& path);

}  // namespace peirce::kb
