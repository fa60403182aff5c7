#include "peirce/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "peirce/errors.hpp"
#include "peirce/io.hpp"
#include "peirce/text.hpp"

namespace peirce::retrieval {

Ranking RetrievalModel::rank_one(const Query& q) const {
    const auto& ids = corpus_ids();
    std::vector<double> s = scores(q);
    std::vector<size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (s[a] != s[b]) return s[a] > s[b];
        return a < b;  // ties: corpus order
    });
    Ranking r;
    r.query_id = q.id;
    r.model_name = name();
    r.scored.reserve(ids.size());
    for (size_t i : order) r.scored.emplace_back(ids[i], s[i]);
    return r;
}

std::vector<Ranking> RetrievalModel::query(const std::vector<Query>& queries) const {
    std::vector<Ranking> out(queries.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < queries.size(); ++i) out[i] = rank_one(queries[i]);
    return out;
}

std::vector<Ranking> RetrievalModel::query_serial(const std::vector<Query>& queries) const {
    std::vector<Ranking> out;
    out.reserve(queries.size());
    for (const Query& q : queries) out.push_back(rank_one(q));
    return out;
}

Bm25Index::Bm25Index(const std::vector<std::string>& docs, double k1, double b)
    : k1_(k1), b_(b) {
    if (docs.empty()) throw EmptyIndexError();
    doc_terms_.reserve(docs.size());
    doc_len_.reserve(docs.size());
    long total = 0;
    for (const std::string& d : docs) {
        std::map<std::string, int> tf;
        int len = 0;
        for (const std::string& t : text::tokenize(d)) {
            ++tf[t];
            ++len;
        }
        for (const auto& [t, n] : tf) {
            (void)n;
            ++df_[t];
        }
        doc_terms_.push_back(std::move(tf));
        doc_len_.push_back(len);
        total += len;
    }
    avgdl_ = static_cast<double>(total) / static_cast<double>(docs.size());
}

std::vector<double> Bm25Index::score(const std::string& query_text) const {
    std::vector<double> out(doc_terms_.size(), 0.0);
    std::set<std::string> qterms;
    for (const std::string& t : text::tokenize(query_text)) qterms.insert(t);
    const double n = static_cast<double>(doc_terms_.size());
    for (const std::string& t : qterms) {
        auto dfit = df_.find(t);
        if (dfit == df_.end()) continue;
        const double df = dfit->second;
        const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
        for (size_t d = 0; d < doc_terms_.size(); ++d) {
            auto it = doc_terms_[d].find(t);
            if (it == doc_terms_[d].end()) continue;
            const double tf = it->second;
            const double norm =
                k1_ * (1.0 - b_ + b_ * static_cast<double>(doc_len_[d]) / avgdl_);
            out[d] += idf * tf * (k1_ + 1.0) / (tf + norm);
        }
    }
    return out;
}

Bm25Model::Bm25Model(const std::vector<kb::Statement>& corpus, double k1, double b) {
    if (corpus.empty()) throw EmptyIndexError();
    std::vector<std::string> docs;
    docs.reserve(corpus.size());
    for (const kb::Statement& s : corpus) {
        ids_.push_back(s.id);
        docs.push_back(s.surface);
    }
    index_ = Bm25Index(docs, k1, b);
}

std::vector<double> Bm25Model::scores(const Query& q) const { return index_.score(q.text); }

UnificationModel::UnificationModel(const std::vector<kb::Statement>& corpus) {
    if (corpus.empty()) throw EmptyIndexError();
    for (const kb::Statement& s : corpus) {
        id_pos_[s.id] = ids_.size();
        ids_.push_back(s.id);
    }
}

void UnificationModel::fit(const std::vector<TrainingPair>& training) {
    if (training.empty()) throw EmptyTrainingSetError();
    std::vector<std::string> texts;
    texts.reserve(training.size());
    gold_.clear();
    for (const TrainingPair& p : training) {
        texts.push_back(p.problem_text);
        std::vector<size_t> positions;
        for (const std::string& id : p.gold_ids) {
            auto it = id_pos_.find(id);
            // Gold facts outside the ranked corpus cannot influence a ranking.
            if (it != id_pos_.end()) positions.push_back(it->second);
        }
        gold_.push_back(std::move(positions));
    }
    sim_index_ = Bm25Index(texts);
    fitted_ = true;
}

std::vector<double> UnificationModel::scores(const Query& q) const {
    if (!fitted_) throw UnfittedModelError();
    std::vector<double> out(ids_.size(), 0.0);
    std::vector<double> sims = sim_index_.score(q.text);
    for (size_t k = 0; k < sims.size(); ++k) {
        if (sims[k] == 0.0) continue;
        for (size_t pos : gold_[k]) out[pos] += sims[k];
    }
    return out;
}

EnsembleModel::EnsembleModel(std::vector<std::shared_ptr<RetrievalModel>> models,
                             std::vector<double> weights)
    : models_(std::move(models)), weights_(std::move(weights)) {
    if (models_.empty() || models_.size() != weights_.size())
        throw LengthMismatchError(models_.size(), weights_.size());
    double total = 0.0;
    for (double w : weights_) {
        if (w < 0.0)
            throw Error(ErrorCategory::config, "ensemble weights must be non-negative");
        total += w;
    }
    if (total == 0.0) throw AllZeroWeightsError();
    for (const auto& m : models_)
        if (m->corpus_ids() != models_[0]->corpus_ids())
            throw Error(ErrorCategory::config,
                        "ensemble components must share one corpus");
}

const std::vector<std::string>& EnsembleModel::corpus_ids() const {
    return models_[0]->corpus_ids();
}

std::vector<double> EnsembleModel::scores(const Query& q) const {
    std::vector<double> out(corpus_ids().size(), 0.0);
    for (size_t m = 0; m < models_.size(); ++m) {
        std::vector<double> s = models_[m]->scores(q);
        auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
        const double lo = *lo_it, hi = *hi_it;
        for (size_t i = 0; i < s.size(); ++i) {
            const double norm = hi > lo ? (s[i] - lo) / (hi - lo) : 0.0;
            out[i] += weights_[m] * norm;
        }
    }
    return out;
}

double evaluate_map(const std::vector<Ranking>& rankings,
                    const std::map<std::string, std::set<std::string>>& gold) {
    if (rankings.empty()) throw Error(ErrorCategory::data, "no rankings to evaluate");
    double sum = 0.0;
    for (const Ranking& r : rankings) {
        auto it = gold.find(r.query_id);
        if (it == gold.end()) throw MissingGoldError(r.query_id);
        if (it->second.empty()) throw EmptyGoldError(r.query_id);
        const std::set<std::string>& g = it->second;
        double hits = 0.0, ap = 0.0;
        for (size_t k = 0; k < r.scored.size(); ++k) {
            if (g.count(r.scored[k].first)) {
                hits += 1.0;
                ap += hits / static_cast<double>(k + 1);
            }
        }
        sum += ap / static_cast<double>(g.size());
    }
    return sum / static_cast<double>(rankings.size());
}

std::string rankings_to_tsv(const std::vector<Ranking>& rankings) {
    std::string out;
    char buf[64];
    for (const Ranking& r : rankings) {
        for (size_t k = 0; k < r.scored.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.6f", r.scored[k].second);
            out += r.query_id;
            out += '\t';
            out += std::to_string(k + 1);
            out += '\t';
            out += r.scored[k].first;
            out += '\t';
            out += buf;
            out += '\n';
        }
    }
    return out;
}

std::vector<Ranking> rankings_from_tsv(const std::string& text) {
    std::vector<Ranking> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string qid, rank, sid, score;
        if (!std::getline(ls, qid, '\t') || !std::getline(ls, rank, '\t') ||
            !std::getline(ls, sid, '\t') || !std::getline(ls, score, '\t'))
            throw MalformedRecordError(line_no, "expected 4 tab-separated fields");
        if (out.empty() || out.back().query_id != qid) {
            Ranking r;
            r.query_id = qid;
            out.push_back(std::move(r));
        }
        try {
            out.back().scored.emplace_back(sid, std::stod(score));
        } catch (const std::exception&) {
            throw MalformedRecordError(line_no, "bad score '" + score + "'");
        }
    }
    return out;
}

std::map<std::string, std::set<std::string>> load_gold(const std::string& path) {
    std::map<std::string, std::set<std::string>> out;
    for (const auto& [line_no, line] : io::read_lines(path)) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecordError(line_no, e.what());
        }
        if (!j.is_object() || !j.contains("query_id") || !j["query_id"].is_string() ||
            !j.contains("gold_ids") || !j["gold_ids"].is_array())
            throw MalformedRecordError(line_no, "expected {query_id, gold_ids}");
        std::set<std::string> ids;
        for (const auto& g : j["gold_ids"]) {
            if (!g.is_string())
                throw MalformedRecordError(line_no, "gold_ids must be strings");
            ids.insert(g.get<std::string>());
        }
        out[j["query_id"].get<std::string>()] = std::move(ids);
    }
    return out;
}

}  // namespace peirce::retrieval
