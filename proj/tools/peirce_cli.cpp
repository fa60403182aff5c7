// peirce: conjecture--criticism pipeline driver.
//
//   peirce [global flags] <subcommand>
//     kb stats                          corpus summary
//     retrieve --queries F [--gold F]   rank statements, report MAP
//     critique hard --problems F        formalise + prove each explanation
//     critique soft --problems F        parsimony / coherence / uncertainty
//     refine --problems F               full refinement loop over a batch
//     ibe --candidates F                inference to the best explanation
//     eval map --rankings F --gold F    score an existing ranking file
//
// Exit codes: 0 ok, 2 config, 3 data, 4 remote. All output files land under
// the configured output directory; stdout carries the human-readable summary.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "peirce/config.hpp"
#include "peirce/critique.hpp"
#include "peirce/errors.hpp"
#include "peirce/gen.hpp"
#include "peirce/io.hpp"
#include "peirce/kb.hpp"
#include "peirce/prover.hpp"
#include "peirce/refine.hpp"
#include "peirce/retrieval.hpp"

namespace fs = std::filesystem;
using peirce::ConfigError;
using peirce::Error;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Context {
    peirce::config::PipelineConfig config;
    int seed = 0;
    int workers = 1;
};

std::string out_path(const Context& ctx, const std::string& name) {
    peirce::io::ensure_dir(ctx.config.out_dir);
    return (fs::path(ctx.config.out_dir) / name).string();
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

peirce::kb::KnowledgeBase require_kb(const Context& ctx) {
    if (ctx.config.kb_path.empty())
        throw ConfigError("this command needs kb.path in the config");
    std::vector<std::string> warnings;
    auto kb = peirce::kb::load_kb(ctx.config.kb_path, "jsonl-v1", &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return kb;
}

const peirce::critique::EntailmentScorer& entailment_scorer(const Context& ctx) {
    static const peirce::critique::LexicalEntailmentScorer lexical;
    static std::unique_ptr<peirce::critique::RemoteEntailmentScorer> remote;
    if (ctx.config.entailment_endpoint.empty()) return lexical;
    if (!remote)
        remote = std::make_unique<peirce::critique::RemoteEntailmentScorer>(
            ctx.config.entailment_endpoint);
    return *remote;
}

json parse_line(const std::string& path, size_t lineno, const std::string& line) {
    try {
        auto j = json::parse(line);
        if (!j.is_object()) throw peirce::MalformedRecordError(lineno, "not a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw Error(peirce::ErrorCategory::data,
                    path + ":" + std::to_string(lineno) + ": " + e.what());
    }
}

// ---- kb stats ---------------------------------------------------------------

int cmd_kb_stats(const Context& ctx) {
    auto kb = require_kb(ctx);
    size_t with_premises = 0;
    std::set<std::string> entities;
    std::set<std::string> annotation_keys;
    for (const auto& s : kb.statements()) {
        if (!s.premise_ids.empty()) ++with_premises;
        entities.insert(s.entities.begin(), s.entities.end());
        for (const auto& [k, v] : s.annotations) {
            (void)v;
            annotation_keys.insert(k);
        }
    }
    std::cout << "kb: " << kb.name() << "\n";
    std::cout << "statements: " << kb.size() << "\n";
    std::cout << "with premise links: " << with_premises << "\n";
    std::cout << "distinct entities: " << entities.size() << "\n";
    std::cout << "annotation keys:";
    if (annotation_keys.empty()) std::cout << " (none)";
    for (const auto& k : annotation_keys) std::cout << " " << k;
    std::cout << "\n";
    return 0;
}

// ---- retrieve ---------------------------------------------------------------

std::vector<peirce::retrieval::Query> load_queries(const std::string& path) {
    std::vector<peirce::retrieval::Query> out;
    for (const auto& [lineno, line] : peirce::io::read_lines(path)) {
        auto j = parse_line(path, lineno, line);
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("text") ||
            !j["text"].is_string())
            throw peirce::MalformedRecordError(lineno, "query needs string id and text");
        out.push_back({j["id"].get<std::string>(), j["text"].get<std::string>()});
    }
    return out;
}

std::vector<peirce::retrieval::TrainingPair> load_training(const std::string& path) {
    std::vector<peirce::retrieval::TrainingPair> pairs;
    for (const auto& rec : peirce::kb::load_problems(path)) {
        if (rec.problem.gold_premise_ids.empty()) continue;
        pairs.push_back({rec.problem.full_text(), rec.problem.gold_premise_ids});
    }
    return pairs;
}

int cmd_retrieve(const Context& ctx, const std::string& queries_path,
                 const std::string& gold_path) {
    auto kb = require_kb(ctx);
    auto queries = load_queries(queries_path);

    std::vector<std::shared_ptr<peirce::retrieval::RetrievalModel>> models;
    for (const auto& name : ctx.config.retrieval_models) {
        if (name == "bm25") {
            models.push_back(std::make_shared<peirce::retrieval::Bm25Model>(
                kb.statements(), ctx.config.bm25_k1, ctx.config.bm25_b));
        } else {  // unification; config validation already vetted the name
            auto m = std::make_shared<peirce::retrieval::UnificationModel>(kb.statements());
            m->fit(load_training(ctx.config.training_path));
            models.push_back(m);
        }
    }
    std::vector<std::shared_ptr<peirce::retrieval::RetrievalModel>> runs = models;
    if (!ctx.config.ensemble_weights.empty() && models.size() > 1)
        runs.push_back(std::make_shared<peirce::retrieval::EnsembleModel>(
            models, ctx.config.ensemble_weights));

    std::optional<std::map<std::string, std::set<std::string>>> gold;
    if (!gold_path.empty()) gold = peirce::retrieval::load_gold(gold_path);

    for (const auto& model : runs) {
        auto rankings = model->query(queries);
        peirce::io::write_file(out_path(ctx, "rankings_" + model->name() + ".tsv"),
                               peirce::retrieval::rankings_to_tsv(rankings));
        if (gold)
            std::cout << "MAP " << model->name() << ": "
                      << fmt2(peirce::retrieval::evaluate_map(rankings, *gold)) << "\n";
    }
    if (!gold)
        std::cout << "wrote " << runs.size() << " ranking file(s) for " << queries.size()
                  << " quer" << (queries.size() == 1 ? "y" : "ies") << "\n";
    return 0;
}

// ---- critique ---------------------------------------------------------------

std::string require_explanation(const peirce::kb::ProblemRecord& rec) {
    if (!rec.initial_explanation || rec.initial_explanation->empty())
        throw Error(peirce::ErrorCategory::data,
                    "problem '" + rec.problem.id + "' has no initial_explanation to critique");
    return *rec.initial_explanation;
}

int cmd_critique_hard(const Context& ctx, const std::string& problems_path) {
    auto problems = peirce::kb::load_problems(problems_path);
    auto generator = peirce::config::make_generator(ctx.config, ctx.seed);
    peirce::critique::HardOptions options;
    options.prove.max_depth = ctx.config.depth;

    std::string jsonl;
    for (const auto& rec : problems) {
        auto report = peirce::critique::hard_critique(*generator, rec.problem,
                                                      require_explanation(rec), options);
        ordered_json row;
        row["id"] = rec.problem.id;
        row["report"] = peirce::critique::report_to_json(report);
        jsonl += row.dump() + "\n";
        bool valid = report.verdict && report.verdict->valid;
        std::cout << rec.problem.id << ": " << (valid ? "valid" : "invalid") << "\n";
    }
    peirce::io::write_file(out_path(ctx, "critique_hard.jsonl"), jsonl);
    return 0;
}

int cmd_critique_soft(const Context& ctx, const std::string& problems_path) {
    auto problems = peirce::kb::load_problems(problems_path);
    const auto& scorer = entailment_scorer(ctx);
    std::unique_ptr<peirce::critique::RemoteHedgingScorer> hedging;
    if (!ctx.config.hedging_endpoint.empty())
        hedging = std::make_unique<peirce::critique::RemoteHedgingScorer>(
            ctx.config.hedging_endpoint);

    std::string jsonl;
    for (const auto& rec : problems) {
        std::string explanation = require_explanation(rec);
        std::vector<peirce::critique::CritiqueReport> reports;
        reports.push_back(peirce::critique::parsimony_report(rec.problem, explanation));
        reports.push_back(peirce::critique::coherence_report(explanation, scorer));
        reports.push_back(hedging
                              ? peirce::critique::uncertainty_report(explanation, *hedging)
                              : peirce::critique::uncertainty_report(explanation));
        ordered_json row;
        row["id"] = rec.problem.id;
        row["reports"] = ordered_json::array();
        std::cout << rec.problem.id << ":";
        for (const auto& r : reports) {
            row["reports"].push_back(peirce::critique::report_to_json(r));
            std::cout << " " << r.name << "=" << json(*r.score).dump();
        }
        std::cout << "\n";
        jsonl += row.dump() + "\n";
    }
    peirce::io::write_file(out_path(ctx, "critique_soft.jsonl"), jsonl);
    return 0;
}

// ---- refine -----------------------------------------------------------------

int cmd_refine(const Context& ctx, const std::string& problems_path) {
    auto problems = peirce::kb::load_problems(problems_path);
    auto generator = peirce::config::make_generator(ctx.config, ctx.seed);
    auto rconfig = peirce::config::make_refinement_config(ctx.config);

    std::optional<peirce::kb::KnowledgeBase> kb;
    if (!ctx.config.kb_path.empty()) kb = require_kb(ctx);

    auto result = peirce::refine::refine_batch(*generator, rconfig, problems,
                                               kb ? &*kb : nullptr, ctx.workers);

    std::string jsonl, markdown;
    for (const auto& trace : result.traces) {
        jsonl += peirce::refine::trace_to_jsonl(trace);
        markdown += peirce::refine::trace_to_markdown(trace) + "\n";
    }
    peirce::io::write_file(out_path(ctx, "traces.jsonl"), jsonl);
    peirce::io::write_file(out_path(ctx, "traces.md"), markdown);

    ordered_json summary;
    summary["problems"] = result.summary.problems;
    summary["cumulative_valid"] = result.summary.cumulative_valid;
    summary["failures"] = result.summary.failures;
    peirce::io::write_file(out_path(ctx, "summary.json"), summary.dump(2) + "\n");

    std::cout << "iteration\tvalid\n";
    for (size_t i = 0; i < result.summary.cumulative_valid.size(); ++i)
        std::cout << i << "\t" << result.summary.cumulative_valid[i] << "\n";
    int verified = result.summary.cumulative_valid.empty()
                       ? 0
                       : result.summary.cumulative_valid.back();
    std::cout << "verified: " << verified << "/" << result.summary.problems << "\n";
    for (const auto& f : result.summary.failures) std::cerr << "failed: " << f << "\n";
    return 0;
}

// ---- ibe --------------------------------------------------------------------

struct IbeCase {
    peirce::kb::NLIProblem problem;
    std::vector<std::string> candidates;
    std::optional<std::vector<peirce::critique::SoftScores>> scores;
    std::optional<size_t> gold_index;
};

std::vector<IbeCase> load_ibe_cases(const std::string& path) {
    std::vector<IbeCase> cases;
    for (const auto& [lineno, line] : peirce::io::read_lines(path)) {
        auto j = parse_line(path, lineno, line);
        IbeCase c;
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("hypothesis") ||
            !j["hypothesis"].is_string())
            throw peirce::MalformedRecordError(lineno, "ibe case needs string id and hypothesis");
        c.problem.id = j["id"].get<std::string>();
        c.problem.hypothesis = j["hypothesis"].get<std::string>();
        if (j.contains("premise")) c.problem.premise = j["premise"].get<std::string>();
        if (!j.contains("candidates") || !j["candidates"].is_array())
            throw peirce::MalformedRecordError(lineno, "ibe case needs a candidates array");
        for (const auto& e : j["candidates"]) c.candidates.push_back(e.get<std::string>());
        if (j.contains("scores")) {
            std::vector<peirce::critique::SoftScores> scores;
            for (const auto& s : j["scores"]) {
                peirce::critique::SoftScores sc;
                sc.parsimony = s.at("parsimony").get<int>();
                sc.coherence = s.at("coherence").get<double>();
                sc.uncertainty = s.at("uncertainty").get<double>();
                scores.push_back(sc);
            }
            if (scores.size() != c.candidates.size())
                throw peirce::MalformedRecordError(lineno,
                                                   "scores and candidates differ in length");
            c.scores = std::move(scores);
        }
        if (j.contains("gold_index")) c.gold_index = j["gold_index"].get<size_t>();
        cases.push_back(std::move(c));
    }
    return cases;
}

int cmd_ibe(const Context& ctx, const std::string& candidates_path) {
    auto cases = load_ibe_cases(candidates_path);
    const auto& scorer = entailment_scorer(ctx);
    std::unique_ptr<peirce::critique::RemoteHedgingScorer> hedging;
    if (!ctx.config.hedging_endpoint.empty())
        hedging = std::make_unique<peirce::critique::RemoteHedgingScorer>(
            ctx.config.hedging_endpoint);

    std::string jsonl;
    size_t gold_total = 0, gold_hits = 0;
    for (const auto& c : cases) {
        std::vector<peirce::critique::SoftScores> scores;
        if (c.scores) {
            scores = *c.scores;
        } else {
            for (const auto& expl : c.candidates) {
                peirce::critique::SoftScores s;
                s.parsimony = peirce::critique::parsimony(c.problem, expl);
                s.coherence = peirce::critique::coherence(expl, scorer).value;
                s.uncertainty = hedging ? hedging->score(expl)
                                        : peirce::critique::uncertainty(expl);
                scores.push_back(s);
            }
        }
        auto pick = peirce::critique::ibe_select(scores);

        ordered_json row;
        row["id"] = c.problem.id;
        row["selected"] = pick.selected;
        row["votes"] = pick.votes;
        row["scores"] = ordered_json::array();
        for (const auto& s : scores) row["scores"].push_back(peirce::critique::to_json(s));
        if (c.gold_index) {
            row["gold_index"] = *c.gold_index;
            ++gold_total;
            if (pick.selected == *c.gold_index) ++gold_hits;
        }
        jsonl += row.dump() + "\n";

        std::cout << c.problem.id << ": selected=" << pick.selected << " votes=[";
        for (size_t i = 0; i < pick.votes.size(); ++i)
            std::cout << (i ? "," : "") << pick.votes[i];
        std::cout << "]\n";
    }
    peirce::io::write_file(out_path(ctx, "ibe.jsonl"), jsonl);
    if (gold_total > 0)
        std::cout << "accuracy: " << gold_hits << "/" << gold_total << " = "
                  << fmt2(double(gold_hits) / double(gold_total)) << "\n";
    return 0;
}

// ---- eval map ---------------------------------------------------------------

int cmd_eval_map(const std::string& rankings_path, const std::string& gold_path) {
    auto rankings = peirce::retrieval::rankings_from_tsv(peirce::io::read_file(rankings_path));
    auto gold = peirce::retrieval::load_gold(gold_path);
    std::printf("MAP: %.6f\n", peirce::retrieval::evaluate_map(rankings, gold));
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"conjecture--criticism pipeline for natural-language explanations"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_override;
    int seed = 0, workers = 1;
    int max_iterations = -1, depth = -1;
    app.add_option("--config", config_path, "pipeline config file (TOML)");
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--seed", seed, "generation seed")->capture_default_str();
    app.add_option("--workers", workers, "refinement worker threads")->capture_default_str();
    app.add_option("--max-iterations", max_iterations, "refinement iteration cap");
    app.add_option("--depth", depth, "prover depth limit");

    auto* kb_cmd = app.add_subcommand("kb", "knowledge-base utilities");
    kb_cmd->require_subcommand(1);
    kb_cmd->add_subcommand("stats", "corpus summary");

    std::string queries_path, retrieve_gold;
    auto* retrieve = app.add_subcommand("retrieve", "rank statements for queries");
    retrieve->add_option("--queries", queries_path, "JSONL queries {id, text}")->required();
    retrieve->add_option("--gold", retrieve_gold, "JSONL gold {query_id, gold_ids}");

    std::string hard_problems, soft_problems;
    auto* critique_cmd = app.add_subcommand("critique", "critique explanations");
    critique_cmd->require_subcommand(1);
    auto* crit_hard = critique_cmd->add_subcommand("hard", "formalise and prove");
    crit_hard->add_option("--problems", hard_problems, "JSONL problems file")->required();
    auto* crit_soft = critique_cmd->add_subcommand("soft", "lexical quality scores");
    crit_soft->add_option("--problems", soft_problems, "JSONL problems file")->required();

    std::string refine_problems;
    auto* refine_cmd = app.add_subcommand("refine", "iterative refinement loop");
    refine_cmd->add_option("--problems", refine_problems, "JSONL problems file")->required();

    std::string ibe_candidates;
    auto* ibe_cmd = app.add_subcommand("ibe", "select the best explanation");
    ibe_cmd->add_option("--candidates", ibe_candidates, "JSONL candidate sets")->required();

    std::string eval_rankings, eval_gold;
    auto* eval_cmd = app.add_subcommand("eval", "evaluation utilities");
    eval_cmd->require_subcommand(1);
    auto* eval_map = eval_cmd->add_subcommand("map", "mean average precision");
    eval_map->add_option("--rankings", eval_rankings, "TSV rankings file")->required();
    eval_map->add_option("--gold", eval_gold, "JSONL gold file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad usage is a configuration error
    }

    Context ctx;
    if (!config_path.empty()) ctx.config = peirce::config::load_config(config_path);
    if (!out_override.empty()) ctx.config.out_dir = out_override;
    if (max_iterations != -1) {
        if (max_iterations < 1) throw ConfigError("--max-iterations must be >= 1");
        ctx.config.max_iterations = max_iterations;
    }
    if (depth != -1) {
        if (depth < 1) throw ConfigError("--depth must be >= 1");
        ctx.config.depth = depth;
    }
    if (workers < 1) throw ConfigError("--workers must be >= 1");
    ctx.seed = seed;
    ctx.workers = workers;

    if (kb_cmd->parsed()) return cmd_kb_stats(ctx);
    if (retrieve->parsed()) return cmd_retrieve(ctx, queries_path, retrieve_gold);
    if (critique_cmd->parsed()) {
        if (crit_hard->parsed()) return cmd_critique_hard(ctx, hard_problems);
        return cmd_critique_soft(ctx, soft_problems);
    }
    if (refine_cmd->parsed()) return cmd_refine(ctx, refine_problems);
    if (ibe_cmd->parsed()) return cmd_ibe(ctx, ibe_candidates);
    if (eval_cmd->parsed()) return cmd_eval_map(eval_rankings, eval_gold);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
