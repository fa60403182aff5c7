// Times the parallel batch query against the serial reference on a synthetic
// corpus and verifies they agree. Usage: bench_retrieval [docs] [queries].
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include <peirce/retrieval.hpp>

using peirce::retrieval::Bm25Model;
using peirce::retrieval::Query;
using peirce::retrieval::Ranking;

namespace {

std::vector<std::string> kVocab;

void build_vocab(std::mt19937& rng) {
    std::uniform_int_distribution<int> len(3, 9);
    std::uniform_int_distribution<int> ch('a', 'z');
    for (int i = 0; i < 800; ++i) {
        std::string w;
        int n = len(rng);
        for (int k = 0; k < n; ++k) w += static_cast<char>(ch(rng));
        kVocab.push_back(w);
    }
}

std::string sentence(std::mt19937& rng, int words) {
    // Zipf-flavoured pick: low indices dominate, mimicking natural term reuse.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::string s;
    for (int i = 0; i < words; ++i) {
        auto idx = static_cast<size_t>(std::pow(u(rng), 2.0) * (kVocab.size() - 1));
        if (!s.empty()) s += ' ';
        s += kVocab[idx];
    }
    return s;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     t0)
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    const int n_docs = argc > 1 ? std::atoi(argv[1]) : 2000;
    const int n_queries = argc > 2 ? std::atoi(argv[2]) : 400;
    std::mt19937 rng(20240901);
    build_vocab(rng);

    std::vector<peirce::kb::Statement> corpus;
    std::uniform_int_distribution<int> dlen(8, 40);
    for (int i = 0; i < n_docs; ++i) {
        peirce::kb::Statement s;
        s.id = "d" + std::to_string(i);
        s.surface = sentence(rng, dlen(rng));
        corpus.push_back(std::move(s));
    }
    Bm25Model model(corpus);

    std::vector<Query> queries;
    std::uniform_int_distribution<int> qlen(2, 6);
    for (int i = 0; i < n_queries; ++i)
        queries.push_back({"q" + std::to_string(i), sentence(rng, qlen(rng))});

    auto t0 = std::chrono::steady_clock::now();
    auto serial = model.query_serial(queries);
    double serial_ms = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    auto parallel = model.query(queries);
    double parallel_ms = ms_since(t0);

    bool same = serial.size() == parallel.size();
    for (size_t i = 0; same && i < serial.size(); ++i)
        same = serial[i].query_id == parallel[i].query_id &&
               serial[i].scored == parallel[i].scored;

    std::printf("docs=%d queries=%d\n", n_docs, n_queries);
    std::printf("serial    %10.2f ms\n", serial_ms);
    std::printf("parallel  %10.2f ms  (speedup %.2fx)\n", parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
    std::printf("results identical: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
}
