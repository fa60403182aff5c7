#include <algorithm>
#include <chrono>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "peirce/assets_gen.hpp"
#include "peirce/critique.hpp"
#include "peirce/errors.hpp"
#include "peirce/text.hpp"

namespace peirce::critique {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

// POST a JSON payload and return the "score" field, retrying transient
// failures; anything persistent becomes ScorerUnavailable.
double post_for_score(const std::string& endpoint, const nlohmann::json& payload,
                      int retry_limit, int backoff_initial_ms) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCategory::config, "scorer endpoint needs a scheme: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    std::string host = path_start == std::string::npos ? endpoint
                                                       : endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/"
                                                       : endpoint.substr(path_start);
    std::string detail;
    for (int attempt = 1; attempt <= retry_limit; ++attempt) {
        if (attempt > 1)
            std::this_thread::sleep_for(std::chrono::milliseconds(
                static_cast<long>(backoff_initial_ms) << (attempt - 2)));
        httplib::Client client(host);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        auto res = client.Post(path, payload.dump(), "application/json");
        if (!res) {
            detail = "connection to " + endpoint + " failed";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            detail = "status " + std::to_string(res->status) + " from " + endpoint;
            continue;
        }
        if (res->status != 200)
            throw ScorerUnavailableError("status " + std::to_string(res->status) +
                                         " from " + endpoint);
        try {
            auto j = nlohmann::json::parse(res->body);
            if (!j.contains("score") || !j["score"].is_number())
                throw ScorerUnavailableError("reply from " + endpoint +
                                             " held no numeric score");
            return j["score"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ScorerUnavailableError("unparseable reply from " + endpoint + ": " +
                                         e.what());
        }
    }
    throw ScorerUnavailableError(detail + " after " + std::to_string(retry_limit) +
                                 " attempts");
}

}  // namespace

nlohmann::ordered_json report_to_json(const CritiqueReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = r.kind;
    j["name"] = r.name;
    if (r.verdict) j["verdict"] = prover::to_json(*r.verdict);
    if (r.score) j["score"] = *r.score;
    j["feedback"] = r.feedback;
    j["artifacts"] = r.artifacts;
    return j;
}

double LexicalEntailmentScorer::score(const std::string& premise,
                                      const std::string& hypothesis) const {
    return text::jaccard(text::concept_set(premise), text::concept_set(hypothesis));
}

RemoteEntailmentScorer::RemoteEntailmentScorer(std::string endpoint, int retry_limit,
                                               int backoff_initial_ms)
    : endpoint_(std::move(endpoint)),
      retry_limit_(retry_limit),
      backoff_initial_ms_(backoff_initial_ms) {}

double RemoteEntailmentScorer::score(const std::string& premise,
                                     const std::string& hypothesis) const {
    nlohmann::json payload = {
        {"task", "entailment"}, {"premise", premise}, {"hypothesis", hypothesis}};
    return post_for_score(endpoint_, payload, retry_limit_, backoff_initial_ms_);
}

RemoteHedgingScorer::RemoteHedgingScorer(std::string endpoint, int retry_limit,
                                         int backoff_initial_ms)
    : endpoint_(std::move(endpoint)),
      retry_limit_(retry_limit),
      backoff_initial_ms_(backoff_initial_ms) {}

double RemoteHedgingScorer::score(const std::string& text) const {
    nlohmann::json payload = {{"task", "hedging"}, {"text", text}};
    return post_for_score(endpoint_, payload, retry_limit_, backoff_initial_ms_);
}

nlohmann::ordered_json to_json(const SoftScores& s) {
    nlohmann::ordered_json j;
    j["parsimony"] = s.parsimony;
    j["coherence"] = s.coherence;
    j["uncertainty"] = s.uncertainty;
    return j;
}

int parsimony(const std::string& problem_text, const std::string& explanation) {
    auto problem_concepts = text::concept_set(problem_text);
    int drift = 0;
    for (const std::string& c : text::concept_set(explanation))
        if (!problem_concepts.count(c)) ++drift;
    return drift;
}

int parsimony(const kb::NLIProblem& problem, const std::string& explanation) {
    return parsimony(problem.full_text(), explanation);
}

std::vector<IfThenClause> extract_if_then(const std::string& explanation) {
    static const std::regex kThenForm(R"(^if\s+(.+?)\s*,\s*then\s+(.+)$)",
                                      std::regex::icase);
    static const std::regex kCommaForm(R"(^if\s+(.+?)\s*,\s*(.+)$)", std::regex::icase);
    static const std::regex kHasThen(R"(\bthen\b)", std::regex::icase);

    std::vector<IfThenClause> out;
    auto sentences = text::split_sentences(explanation);
    for (size_t i = 0; i < sentences.size(); ++i) {
        std::string s = sentences[i];
        while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?' ||
                              s.back() == ' '))
            s.pop_back();
        std::smatch m;
        if (std::regex_match(s, m, kThenForm)) {
            out.push_back({m[1].str(), m[2].str(), static_cast<int>(i)});
        } else if (!std::regex_search(s, kHasThen) && std::regex_match(s, m, kCommaForm)) {
            out.push_back({m[1].str(), m[2].str(), static_cast<int>(i)});
        }
    }
    return out;
}

CoherenceResult coherence(const std::string& explanation,
                          const EntailmentScorer& scorer) {
    auto clauses = extract_if_then(explanation);
    if (clauses.empty()) return {scorer.lo(), true};
    double sum = 0.0;
    for (const IfThenClause& c : clauses) sum += scorer.score(c.antecedent, c.consequent);
    return {sum / static_cast<double>(clauses.size()), false};
}

const std::vector<std::string>& hedge_lexicon() {
    static const std::vector<std::string> lexicon = [] {
        std::vector<std::string> entries;
        std::istringstream in{std::string(assets::lexicon_hedges)};
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            entries.push_back(line);
        }
        // Longest phrases first so greedy matching prefers them.
        std::stable_sort(entries.begin(), entries.end(),
                         [](const std::string& a, const std::string& b) {
                             return std::count(a.begin(), a.end(), ' ') >
                                    std::count(b.begin(), b.end(), ' ');
                         });
        return entries;
    }();
    return lexicon;
}

double uncertainty(const std::string& explanation) {
    auto sentences = text::split_sentences(explanation);
    if (sentences.empty()) return 0.0;

    // Pre-tokenise the lexicon once.
    static const std::vector<std::vector<std::string>> entries = [] {
        std::vector<std::vector<std::string>> out;
        for (const std::string& e : hedge_lexicon()) out.push_back(text::tokenize(e, 1));
        return out;
    }();

    long matches = 0;
    for (const std::string& sentence : sentences) {
        std::vector<std::string> words = text::tokenize(sentence, 1);
        size_t i = 0;
        while (i < words.size()) {
            bool matched = false;
            for (const auto& entry : entries) {
                if (entry.empty() || i + entry.size() > words.size()) continue;
                if (std::equal(entry.begin(), entry.end(), words.begin() + i)) {
                    ++matches;
                    i += entry.size();
                    matched = true;
                    break;
                }
            }
            if (!matched) ++i;
        }
    }
    return static_cast<double>(matches) / static_cast<double>(sentences.size());
}

CritiqueReport parsimony_report(const kb::NLIProblem& problem,
                                const std::string& explanation) {
    auto problem_concepts = text::concept_set(problem.full_text());
    std::vector<std::string> fresh;
    for (const std::string& c : text::concept_set(explanation))
        if (!problem_concepts.count(c)) fresh.push_back(c);

    CritiqueReport r;
    r.kind = "soft";
    r.name = "parsimony";
    r.score = static_cast<double>(fresh.size());
    if (fresh.empty()) {
        r.feedback = "The explanation introduces no concepts beyond the problem.";
    } else {
        r.feedback = "The explanation introduces " + std::to_string(fresh.size()) +
                     " concept(s) absent from the problem: " + join(fresh, ", ") + ".";
    }
    r.artifacts["new_concepts"] = join(fresh, ", ");
    return r;
}

CritiqueReport coherence_report(const std::string& explanation,
                                const EntailmentScorer& scorer) {
    auto clauses = extract_if_then(explanation);
    CritiqueReport r;
    r.kind = "soft";
    r.name = "coherence";
    auto result = coherence(explanation, scorer);
    r.score = result.value;
    if (result.no_clauses) {
        r.feedback =
            "The explanation contains no if-then clauses, so entailment strength "
            "could not be measured.";
        r.artifacts["flags"] = "no-clauses";
    } else {
        std::ostringstream fb;
        fb << "Mean if-then entailment strength " << result.value << " over "
           << clauses.size() << " clause(s).";
        r.feedback = fb.str();
        nlohmann::json cj = nlohmann::json::array();
        for (const auto& c : clauses)
            cj.push_back({{"antecedent", c.antecedent},
                          {"consequent", c.consequent},
                          {"sentence", c.source_sentence_index}});
        r.artifacts["clauses"] = cj.dump();
    }
    r.artifacts["scorer"] = scorer.name();
    return r;
}

namespace {

CritiqueReport make_uncertainty_report(double value, const std::string& source) {
    CritiqueReport r;
    r.kind = "soft";
    r.name = "uncertainty";
    r.score = value;
    std::ostringstream fb;
    fb << "Hedging density " << value << " per sentence.";
    r.feedback = fb.str();
    r.artifacts["scorer"] = source;
    return r;
}

}  // namespace

CritiqueReport uncertainty_report(const std::string& explanation) {
    return make_uncertainty_report(uncertainty(explanation), "lexicon");
}

CritiqueReport uncertainty_report(const std::string& explanation,
                                  const RemoteHedgingScorer& scorer) {
    return make_uncertainty_report(scorer.score(explanation), "remote-hedging");
}

IbeResult ibe_select(const std::vector<SoftScores>& candidates) {
    if (candidates.size() < 2) throw TooFewCandidatesError(candidates.size());
    const size_t n = candidates.size();

    IbeResult res;
    res.votes.assign(n, 0);
    // Strict comparisons keep the lowest index on within-criterion ties.
    for (size_t i = 1; i < n; ++i) {
        if (candidates[i].coherence > candidates[res.coherence_vote].coherence)
            res.coherence_vote = i;
        if (candidates[i].parsimony < candidates[res.parsimony_vote].parsimony)
            res.parsimony_vote = i;
        if (candidates[i].uncertainty < candidates[res.uncertainty_vote].uncertainty)
            res.uncertainty_vote = i;
    }
    ++res.votes[res.coherence_vote];
    ++res.votes[res.parsimony_vote];
    ++res.votes[res.uncertainty_vote];

    size_t best = 0;
    for (size_t i = 1; i < n; ++i) {
        if (res.votes[i] > res.votes[best]) {
            best = i;
        } else if (res.votes[i] == res.votes[best]) {
            if (candidates[i].coherence > candidates[best].coherence ||
                (candidates[i].coherence == candidates[best].coherence &&
                 candidates[i].parsimony < candidates[best].parsimony))
                best = i;
        }
    }
    res.selected = best;
    return res;
}

}  // namespace peirce::critique
