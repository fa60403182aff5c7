#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "peirce/kb.hpp"

namespace peirce::retrieval {

struct Query {
    std::string id;
    std::string text;
};

// Every corpus statement scored for one query, sorted by score descending;
// ties broken by corpus order.
struct Ranking {
    std::string query_id;
    std::vector<std::pair<std::string, double>> scored;
    std::string model_name;
};

// Immutable once built; queries may run concurrently.
class RetrievalModel {
public:
    virtual ~RetrievalModel() = default;
    virtual const std::string& name() const = 0;
    virtual const std::vector<std::string>& corpus_ids() const = 0;
    // Raw scores aligned with corpus_ids().
    virtual std::vector<double> scores(const Query& q) const = 0;

    Ranking rank_one(const Query& q) const;
    // Batch entry point, parallel over queries when OpenMP is available.
    std::vector<Ranking> query(const std::vector<Query>& queries) const;
    // Serial reference; query() must agree with it exactly.
    std::vector<Ranking> query_serial(const std::vector<Query>& queries) const;
};

// Okapi BM25 over token multisets. Tokenisation: lowercase, split on
// non-alphanumeric, drop tokens shorter than 2; no stemming.
class Bm25Index {
public:
    Bm25Index() = default;
    Bm25Index(const std::vector<std::string>& docs, double k1 = 1.2, double b = 0.75);
    std::vector<double> score(const std::string& query_text) const;
    size_t size() const { return doc_terms_.size(); }

private:
    double k1_ = 1.2;
    double b_ = 0.75;
    double avgdl_ = 0.0;
    std::vector<std::map<std::string, int>> doc_terms_;
    std::vector<int> doc_len_;
    std::map<std::string, int> df_;
};

class Bm25Model : public RetrievalModel {
public:
    explicit Bm25Model(const std::vector<kb::Statement>& corpus, double k1 = 1.2,
                       double b = 0.75);
    const std::string& name() const override { return name_; }
    const std::vector<std::string>& corpus_ids() const override { return ids_; }
    std::vector<double> scores(const Query& q) const override;

private:
    std::string name_ = "bm25";
    std::vector<std::string> ids_;
    Bm25Index index_;
};

struct TrainingPair {
    std::string problem_text;
    std::vector<std::string> gold_ids;
};

// score(f, q) = sum over training problems q' of sim(q, q') * [f in gold(q')],
// with sim the BM25 similarity over training problem texts.
class UnificationModel : public RetrievalModel {
public:
    explicit UnificationModel(const std::vector<kb::Statement>& corpus);
    void fit(const std::vector<TrainingPair>& training);
    const std::string& name() const override { return name_; }
    const std::vector<std::string>& corpus_ids() const override { return ids_; }
    std::vector<double> scores(const Query& q) const override;

private:
    std::string name_ = "unification";
    std::vector<std::string> ids_;
    std::map<std::string, size_t> id_pos_;
    bool fitted_ = false;
    Bm25Index sim_index_;
    // gold_[k] lists corpus positions cited by training problem k.
    std::vector<std::vector<size_t>> gold_;
};

// Per query, each component's scores are min-max normalised to [0,1]
// (constant lists normalise to all zeros), then combined as sum w_i * norm_i.
class EnsembleModel : public RetrievalModel {
public:
    EnsembleModel(std::vector<std::shared_ptr<RetrievalModel>> models,
                  std::vector<double> weights);
    const std::string& name() const override { return name_; }
    const std::vector<std::string>& corpus_ids() const override;
    std::vector<double> scores(const Query& q) const override;

private:
    std::string name_ = "ensemble";
    std::vector<std::shared_ptr<RetrievalModel>> models_;
    std::vector<double> weights_;
};

double evaluate_map(const std::vector<Ranking>& rankings,
                    const std::map<std::string, std::set<std::string>>& gold);

// TSV lines: query_id, rank (1-based), statement_id, score (6 decimals).
std::string rankings_to_tsv(const std::vector<Ranking>& rankings);
std::vector<Ranking> rankings_from_tsv(const std::string& text);
// Gold files: JSONL {"query_id": ..., "gold_ids": [...]}.
std::map<std::string, std::set<std::string>> load_gold(const std::string& path);

}  // namespace peirce::retrieval
