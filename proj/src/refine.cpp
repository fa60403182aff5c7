#include <algorithm>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "peirce/assets_gen.hpp"
#include "peirce/errors.hpp"
#include "peirce/refine.hpp"
#include "peirce/retrieval.hpp"

namespace peirce::refine {

namespace {

const std::set<std::string> kKnownCritiques = {"hard", "parsimony", "coherence",
                                               "uncertainty"};

void validate(const RefinementConfig& config, const kb::KnowledgeBase* kb) {
    if (config.max_iterations < 1)
        throw Error(ErrorCategory::config, "max_iterations must be >= 1");
    if (config.retrieval_top_k < 0)
        throw Error(ErrorCategory::config, "retrieval_top_k must be >= 0");
    if (config.retrieval_top_k > 0 && kb == nullptr)
        throw Error(ErrorCategory::config,
                    "retrieval_top_k > 0 needs a knowledge base");
    if (config.critiques.empty())
        throw Error(ErrorCategory::config, "at least one critique must be configured");
    for (const std::string& name : config.critiques)
        if (!kKnownCritiques.count(name))
            throw Error(ErrorCategory::config, "unknown critique: " + name);
}

// Top-k statements for the problem, as the bulleted list the prompts expect.
std::string retrieve_facts(const RefinementConfig& config, const kb::NLIProblem& problem,
                           const kb::KnowledgeBase* kb) {
    if (config.retrieval_top_k == 0) return "(none)";
    retrieval::Bm25Model model(kb->statements());
    auto ranking = model.rank_one({problem.id, problem.full_text()});
    std::string out;
    int taken = 0;
    for (const auto& [id, score] : ranking.scored) {
        if (taken == config.retrieval_top_k) break;
        if (score <= 0.0) break;  // don't pad with unrelated statements
        out += "- " + kb->get(id).surface + "\n";
        ++taken;
    }
    if (out.empty()) return "(none)";
    out.pop_back();
    return out;
}

critique::CritiqueReport run_critique(const std::string& name,
                                      gen::GenerativeModel& generator,
                                      const RefinementConfig& config,
                                      const kb::NLIProblem& problem,
                                      const std::string& explanation) {
    if (name == "hard") {
        try {
            return critique::hard_critique(generator, problem, explanation, config.hard);
        } catch (const Error& e) {
            // A generation failure inside formalisation must not kill the
            // loop; it becomes an invalid verdict whose feedback is the error.
            critique::CritiqueReport report;
            report.kind = "hard";
            report.name = "prover";
            prover::HardVerdict verdict;
            verdict.valid = false;
            prover::FailureDiagnostics diag;
            diag.depth_limited = true;
            verdict.diagnostics = diag;
            report.verdict = verdict;
            report.feedback = std::string("The hard critique could not run: ") +
                              e.what() + ".";
            report.artifacts["error"] = e.what();
            return report;
        }
    }
    if (name == "parsimony") return critique::parsimony_report(problem, explanation);
    if (name == "coherence") {
        static const critique::LexicalEntailmentScorer lexical;
        const critique::EntailmentScorer& scorer =
            config.entailment_scorer ? *config.entailment_scorer : lexical;
        return critique::coherence_report(explanation, scorer);
    }
    // validate() has pinned the name set; only "uncertainty" remains.
    if (config.hedging_scorer)
        return critique::uncertainty_report(explanation, *config.hedging_scorer);
    return critique::uncertainty_report(explanation);
}

bool hard_valid(const IterationRecord& rec) {
    for (const auto& r : rec.reports)
        if (r.kind == "hard" && r.verdict && r.verdict->valid) return true;
    return false;
}

nlohmann::ordered_json problem_to_json(const kb::NLIProblem& p) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    if (p.premise) j["premise"] = *p.premise;
    j["hypothesis"] = p.hypothesis;
    if (!p.candidates.empty()) j["candidates"] = p.candidates;
    if (!p.gold_premise_ids.empty()) j["gold_premise_ids"] = p.gold_premise_ids;
    return j;
}

}  // namespace

RefinementTrace refine(gen::GenerativeModel& generator, const RefinementConfig& config,
                       const kb::NLIProblem& problem,
                       const std::optional<std::string>& initial_explanation,
                       const kb::KnowledgeBase* kb) {
    validate(config, kb);

    RefinementTrace trace;
    trace.problem = problem;

    const std::string facts = retrieve_facts(config, problem, kb);
    const std::string premise = problem.premise.value_or("");

    std::string explanation;
    if (initial_explanation) {
        explanation = *initial_explanation;
    } else {
        auto tmpl = gen::PromptTemplate::parse(std::string(assets::prompt_explanation));
        std::string prompt = tmpl.render({{"premise", premise},
                                          {"hypothesis", problem.hypothesis},
                                          {"retrieved_facts", facts}});
        explanation = generator.generate(prompt, problem.id + "/iter0").response;
    }

    auto repair_tmpl = gen::PromptTemplate::parse(std::string(assets::prompt_repair));
    std::string pending_error;  // repair-generation failure carried forward

    for (int i = 0; i < config.max_iterations; ++i) {
        IterationRecord rec;
        rec.index = i;
        rec.explanation = explanation;
        for (const std::string& name : config.critiques)
            rec.reports.push_back(
                run_critique(name, generator, config, problem, explanation));

        bool valid = hard_valid(rec);
        bool last = (i == config.max_iterations - 1) ||
                    (config.stop_on_valid && valid);
        if (last) {
            trace.iterations.push_back(std::move(rec));
            break;
        }

        std::string feedback;
        for (const auto& r : rec.reports) {
            if (!feedback.empty()) feedback += "\n";
            feedback += r.feedback;
        }
        if (!pending_error.empty()) {
            feedback += "\n" + pending_error;
            pending_error.clear();
        }
        std::string prompt = repair_tmpl.render({{"premise", premise},
                                                 {"hypothesis", problem.hypothesis},
                                                 {"previous_explanation", explanation},
                                                 {"feedback", feedback},
                                                 {"retrieved_facts", facts}});
        rec.feedback_prompt = prompt;
        trace.iterations.push_back(std::move(rec));

        try {
            explanation =
                generator.generate(prompt, problem.id + "/iter" + std::to_string(i + 1))
                    .response;
        } catch (const Error& e) {
            // Keep iterating on the unchanged explanation; the failure text
            // rides into the next round of feedback.
            pending_error = std::string("The repair generation failed: ") + e.what();
        }
    }

    trace.final_valid = hard_valid(trace.iterations.back());
    trace.stopped_at = static_cast<int>(trace.iterations.size()) - 1;
    return trace;
}

BatchResult refine_batch(gen::GenerativeModel& generator, const RefinementConfig& config,
                         const std::vector<kb::ProblemRecord>& problems,
                         const kb::KnowledgeBase* kb, int workers) {
    validate(config, kb);
    if (workers < 1) throw Error(ErrorCategory::config, "workers must be >= 1");

    BatchResult result;
    result.traces.resize(problems.size());
    std::vector<std::string> errors(problems.size());

    const int n = static_cast<int>(problems.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(dynamic)
#endif
    for (int i = 0; i < n; ++i) {
        const auto& record = problems[static_cast<size_t>(i)];
        try {
            result.traces[static_cast<size_t>(i)] =
                refine(generator, config, record.problem, record.initial_explanation, kb);
        } catch (const std::exception& e) {
            result.traces[static_cast<size_t>(i)].problem = record.problem;
            errors[static_cast<size_t>(i)] = e.what();
        }
    }

    result.summary.problems = n;
    for (size_t i = 0; i < problems.size(); ++i)
        if (!errors[i].empty())
            result.summary.failures.push_back(problems[i].problem.id + ": " + errors[i]);

    if (problems.empty()) return result;  // empty batch, empty summary

    // cumulative_valid[i] = problems with a valid hard verdict at some
    // iteration <= i; traces shorter than max_iterations carry forward.
    result.summary.cumulative_valid.assign(
        static_cast<size_t>(config.max_iterations), 0);
    for (const RefinementTrace& trace : result.traces) {
        int first_valid = -1;
        for (size_t i = 0; i < trace.iterations.size(); ++i)
            if (hard_valid(trace.iterations[i])) {
                first_valid = static_cast<int>(i);
                break;
            }
        if (first_valid < 0) continue;
        for (int i = first_valid; i < config.max_iterations; ++i)
            ++result.summary.cumulative_valid[static_cast<size_t>(i)];
    }
    return result;
}

std::string trace_to_jsonl(const RefinementTrace& trace) {
    std::string out;
    nlohmann::ordered_json header;
    header["type"] = "header";
    header["problem"] = problem_to_json(trace.problem);
    header["final_valid"] = trace.final_valid;
    header["stopped_at"] = trace.stopped_at;
    header["iterations"] = trace.iterations.size();
    out += header.dump() + "\n";
    for (const IterationRecord& rec : trace.iterations) {
        nlohmann::ordered_json j;
        j["type"] = "iteration";
        j["index"] = rec.index;
        j["explanation"] = rec.explanation;
        auto reports = nlohmann::ordered_json::array();
        for (const auto& r : rec.reports) reports.push_back(critique::report_to_json(r));
        j["reports"] = reports;
        if (rec.feedback_prompt) j["feedback_prompt"] = *rec.feedback_prompt;
        out += j.dump() + "\n";
    }
    return out;
}

std::string trace_to_markdown(const RefinementTrace& trace) {
    std::ostringstream md;
    md << "# Refinement trace: " << trace.problem.id << "\n\n";
    if (trace.problem.premise) md << "**Premise**: " << *trace.problem.premise << "\n\n";
    md << "**Hypothesis**: " << trace.problem.hypothesis << "\n\n";
    for (const IterationRecord& rec : trace.iterations) {
        md << "## Iteration " << rec.index << "\n\n";
        md << rec.explanation << "\n\n";
        for (const auto& r : rec.reports) {
            md << "- " << r.name << ": ";
            if (r.verdict)
                md << (r.verdict->valid ? "valid" : "invalid");
            else if (r.score)
                md << *r.score;
            md << "\n";
        }
        md << "\n";
    }
    if (trace.final_valid)
        md << "**Formally verified at iteration " << trace.stopped_at << ".**\n";
    else
        md << "**Not verified within " << trace.iterations.size()
           << " iteration(s).**\n";
    return md.str();
}

}  // namespace peirce::refine
