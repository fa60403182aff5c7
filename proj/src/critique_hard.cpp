#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "peirce/assets_gen.hpp"
#include "peirce/critique.hpp"
#include "peirce/errors.hpp"
#include "peirce/gen.hpp"
#include "peirce/text.hpp"

namespace peirce::critique {

namespace {

// Strip surrounding whitespace and a markdown code fence if the model added one.
std::string scrub_theory_text(const std::string& raw) {
    std::vector<std::string> lines;
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    size_t begin = 0, end = lines.size();
    while (begin < end && lines[begin].find_first_not_of(" \t") == std::string::npos)
        ++begin;
    while (end > begin && lines[end - 1].find_first_not_of(" \t") == std::string::npos)
        --end;
    if (begin < end && lines[begin].rfind("```", 0) == 0) ++begin;
    if (end > begin && lines[end - 1].rfind("```", 0) == 0) --end;
    std::string out;
    for (size_t i = begin; i < end; ++i) {
        out += lines[i];
        out += '\n';
    }
    return out;
}

// "explanation_3" / "explanation_3_1" -> 3; nullopt when the label is not of
// that shape.
std::optional<int> explanation_index(const std::string& label) {
    static const std::string prefix = "explanation_";
    if (label.rfind(prefix, 0) != 0) return std::nullopt;
    size_t pos = prefix.size();
    size_t next = label.find('_', pos);
    std::string digits =
        next == std::string::npos ? label.substr(pos) : label.substr(pos, next - pos);
    if (digits.empty()) return std::nullopt;
    for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return std::stoi(digits);
}

// Rename variables to #0, #1, ... in first-occurrence order so that atoms
// identical up to renaming compare equal.
logic::Atom canonicalise(const logic::Atom& a) {
    logic::Atom out;
    out.predicate = a.predicate;
    std::map<std::string, std::string> seen;
    for (const logic::Term& t : a.args) {
        if (!t.is_var()) {
            out.args.push_back(t);
            continue;
        }
        auto [it, fresh] = seen.emplace(t.name, "#" + std::to_string(seen.size()));
        (void)fresh;
        out.args.push_back(logic::Term::var(it->second));
    }
    return out;
}

// True when every goal atom is restated by some axiom fact up to variable
// renaming — the theory proves the hypothesis by assuming it.
bool is_circular(const logic::Theory& theory) {
    if (theory.goal.empty()) return false;
    std::vector<logic::Atom> facts;
    for (const logic::Clause& c : theory.clauses)
        if (c.is_fact()) facts.push_back(canonicalise(c.head));
    for (const logic::Atom& g : theory.goal) {
        logic::Atom canon = canonicalise(g);
        bool matched = false;
        for (const logic::Atom& f : facts)
            if (f == canon) {
                matched = true;
                break;
            }
        if (!matched) return false;
    }
    return true;
}

std::string goal_to_string(const std::vector<logic::Atom>& goal) {
    std::string out;
    for (const logic::Atom& g : goal) {
        if (!out.empty()) out += ", ";
        out += logic::to_string(g);
    }
    return out;
}

}  // namespace

FormalisationResult formalise(gen::GenerativeModel& model, const kb::NLIProblem& problem,
                              const std::string& explanation, int max_attempts) {
    if (explanation.empty())
        throw Error(ErrorCategory::data, "cannot formalise an empty explanation");
    if (max_attempts < 1)
        throw Error(ErrorCategory::config, "max_formalisation_attempts must be >= 1");

    auto tmpl = gen::PromptTemplate::parse(std::string(assets::prompt_formalisation));
    std::string base_prompt = tmpl.render({{"premise", problem.premise.value_or("")},
                                           {"hypothesis", problem.hypothesis},
                                           {"explanation", explanation}});
    const std::string key = problem.id + "/formalise";

    std::string prompt = base_prompt;
    std::string last_error = "no attempt made";
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        gen::GenerationRecord rec = model.generate(prompt, key);
        std::string theory_text = scrub_theory_text(rec.response);
        logic::Theory theory;
        try {
            theory = logic::parse_theory(theory_text);
        } catch (const TheorySyntaxError& e) {
            last_error = e.what();
            prompt = base_prompt + "\n\nYour previous attempt:\n" + rec.response +
                     "\n\nIt failed to parse: " + last_error +
                     "\nReply with a corrected theory only.";
            continue;
        } catch (const ArityConflictError& e) {
            last_error = e.what();
            prompt = base_prompt + "\n\nYour previous attempt:\n" + rec.response +
                     "\n\nIt failed to parse: " + last_error +
                     "\nReply with a corrected theory only.";
            continue;
        }

        FormalisationResult result;
        result.theory = std::move(theory);
        result.raw_llm_output = rec.response;
        result.attempts = attempt;

        auto expl_sentences = text::split_sentences(explanation);
        auto premise_sentences =
            text::split_sentences(problem.premise.value_or(""));
        std::set<int> covered;
        for (const logic::Clause& c : result.theory.clauses) {
            if (c.label.rfind("premise", 0) == 0) {
                // premise_<i> points at a premise sentence where that index
                // exists; otherwise the whole premise stands in.
                std::string sentence = problem.premise.value_or("");
                if (c.label.rfind("premise_", 0) == 0) {
                    std::string digits = c.label.substr(8);
                    auto us = digits.find('_');
                    if (us != std::string::npos) digits = digits.substr(0, us);
                    if (!digits.empty() &&
                        digits.find_first_not_of("0123456789") == std::string::npos) {
                        size_t i = static_cast<size_t>(std::stoi(digits));
                        if (i < premise_sentences.size()) sentence = premise_sentences[i];
                    }
                }
                result.sentence_map[c.label] = sentence;
            } else if (auto idx = explanation_index(c.label)) {
                if (*idx >= 0 && static_cast<size_t>(*idx) < expl_sentences.size()) {
                    result.sentence_map[c.label] = expl_sentences[static_cast<size_t>(*idx)];
                    covered.insert(*idx);
                }
            }
        }
        for (size_t i = 0; i < expl_sentences.size(); ++i)
            if (!covered.count(static_cast<int>(i)))
                result.unformalised.push_back(expl_sentences[i]);
        return result;
    }
    throw FormalisationFailedError(last_error, max_attempts);
}

CritiqueReport hard_critique(gen::GenerativeModel& model, const kb::NLIProblem& problem,
                             const std::string& explanation, const HardOptions& options) {
    CritiqueReport report;
    report.kind = "hard";
    report.name = "prover";

    FormalisationResult f;
    try {
        f = formalise(model, problem, explanation, options.max_formalisation_attempts);
    } catch (const FormalisationFailedError& e) {
        prover::HardVerdict verdict;
        verdict.valid = false;
        prover::FailureDiagnostics diag;
        diag.depth_reached = 0;
        diag.depth_limited = true;  // nothing was searched, so nothing is conclusive
        verdict.diagnostics = diag;
        report.verdict = verdict;
        report.feedback =
            "The explanation could not be turned into a formal theory (" +
            std::string(e.what()) +
            "). Rephrase it as short declarative sentences with clear subjects.";
        report.artifacts["formalisation_error"] = e.last_error;
        report.artifacts["attempts"] = std::to_string(e.attempts);
        report.artifacts["verdict"] = prover::to_json(verdict).dump();
        return report;
    }

    prover::HardVerdict verdict = prover::prove(f.theory, options.prove);
    report.verdict = verdict;

    std::string feedback;
    if (verdict.valid) {
        std::ostringstream fb;
        fb << "The explanation is logically valid: the hypothesis was derived at depth "
           << (verdict.proof ? verdict.proof->depth : 0) << ".";
        feedback = fb.str();
    } else {
        std::vector<std::string> parts;
        if (verdict.diagnostics) {
            for (const logic::Atom& g : verdict.diagnostics->frontier)
                parts.push_back("subgoal " + logic::to_string(g) +
                                " could not be derived");
            for (const std::string& label : verdict.diagnostics->unused_clauses) {
                // Only labels that trace back to a source sentence may be named.
                auto it = f.sentence_map.find(label);
                if (it == f.sentence_map.end()) continue;
                parts.push_back("the sentence '" + it->second + "' (" + label +
                                ") was never used");
            }
            if (verdict.diagnostics->depth_limited)
                parts.push_back("the search hit its resource limit at depth " +
                                std::to_string(verdict.diagnostics->depth_reached));
        }
        feedback = "The explanation is not logically valid";
        if (!parts.empty()) {
            feedback += ": ";
            for (size_t i = 0; i < parts.size(); ++i) {
                if (i) feedback += "; ";
                feedback += parts[i];
            }
        }
        feedback += ".";
    }
    if (is_circular(f.theory))
        feedback += " Warning: the theory is circular — an axiom restates the goal " +
                    goal_to_string(f.theory.goal) + " as a fact.";
    report.feedback = feedback;

    report.artifacts["theory"] = logic::pretty_print(f.theory);
    report.artifacts["verdict"] = prover::to_json(verdict).dump();
    report.artifacts["raw_llm_output"] = f.raw_llm_output;
    report.artifacts["attempts"] = std::to_string(f.attempts);
    if (!f.unformalised.empty()) {
        std::string joined;
        for (const std::string& s : f.unformalised) {
            if (!joined.empty()) joined += "\n";
            joined += s;
        }
        report.artifacts["unformalised"] = joined;
    }
    return report;
}

ExternalProverAdapter::ExternalProverAdapter(std::string command)
    : command_(std::move(command)) {
    if (command_.empty())
        throw Error(ErrorCategory::config, "external prover command must be non-empty");
}

prover::HardVerdict ExternalProverAdapter::prove_theory(
    const std::string& theory_text) const {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    std::string stem = "peirce-extprover-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter.fetch_add(1));
    fs::path in_path = fs::temp_directory_path() / (stem + ".theory");
    fs::path out_path = fs::temp_directory_path() / (stem + ".verdict");
    {
        std::ofstream out(in_path);
        out << theory_text;
    }
    std::string cmd =
        command_ + " " + in_path.string() + " > " + out_path.string() + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    std::string body;
    {
        std::ifstream in(out_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        body = buf.str();
    }
    std::error_code ec;
    fs::remove(in_path, ec);
    fs::remove(out_path, ec);
    if (rc != 0)
        throw Error(ErrorCategory::remote, "external prover '" + command_ +
                                               "' exited with status " +
                                               std::to_string(rc));
    try {
        return prover::verdict_from_json(nlohmann::json::parse(body));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCategory::remote,
                    std::string("external prover emitted unparseable verdict: ") +
                        e.what());
    }
}

}  // namespace peirce::critique
