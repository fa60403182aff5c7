// End-to-end tests driving the installed binary the way a user would:
// real processes, real config files, exit codes asserted.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "peirce/retrieval.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = PEIRCE_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<json> parse_jsonl(const std::string& text) {
    std::vector<json> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(json::parse(line));
    return rows;
}

fs::path scratch() {
    static int counter = 0;
    static fs::path root = [] {
        auto r = fs::temp_directory_path() / "peirce-cli-tests";
        fs::remove_all(r);
        fs::create_directories(r);
        return r;
    }();
    auto dir = root / ("run" + std::to_string(++counter));
    fs::create_directories(dir);
    return dir;
}

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun cli(const std::string& args) {
    auto dir = scratch();
    std::string cmd = std::string(PEIRCE_CLI_PATH) + " " + args + " >" +
                      (dir / "stdout.txt").string() + " 2>" + (dir / "stderr.txt").string();
    int raw = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(dir / "stdout.txt");
    r.err = slurp(dir / "stderr.txt");
    return r;
}

std::string fx(const std::string& rel) { return kFixtures + "/" + rel; }

}  // namespace

TEST_CASE("usage errors exit with the configuration code") {
    CHECK(cli("").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("retrieve").code == 2);  // missing required --queries
    CHECK(cli("--config does-not-exist.toml kb stats").code == 2);
    CHECK(cli("--config " + fx("esnli/config_crib.toml") + " --max-iterations 0 refine "
              "--problems " + fx("esnli/problems_crib.jsonl")).code == 2);
    CHECK(cli("--config " + fx("esnli/config_crib.toml") + " --workers 0 refine "
              "--problems " + fx("esnli/problems_crib.jsonl")).code == 2);
}

TEST_CASE("kb stats summarises the corpus") {
    auto r = cli("--config " + fx("esnli/config_crib.toml") + " kb stats");
    CHECK(r.code == 0);
    CHECK(r.out.find("statements: 4") != std::string::npos);
    CHECK(r.out.find("with premise links: 1") != std::string::npos);
    CHECK(r.out.find("annotation keys: split") != std::string::npos);

    // a config without [kb] cannot serve kb stats
    CHECK(cli("--config " + fx("esnli/config_critique.toml") + " kb stats").code == 2);
}

TEST_CASE("retrieve writes rankings and reports MAP per model plus ensemble") {
    auto out = scratch();
    auto r = cli("--config " + fx("retrieval/config.toml") + " --out " + out.string() +
                 " retrieve --queries " + fx("retrieval/queries.jsonl") + " --gold " +
                 fx("retrieval/gold.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out == "MAP bm25: 0.79\nMAP unification: 0.75\nMAP ensemble: 1.00\n");
    for (const char* name : {"bm25", "unification", "ensemble"})
        CHECK(fs::exists(out / ("rankings_" + std::string(name) + ".tsv")));

    auto rankings =
        peirce::retrieval::rankings_from_tsv(slurp(out / "rankings_ensemble.tsv"));
    REQUIRE(rankings.size() == 3);
    CHECK(rankings[0].scored.size() == 6);

    // eval map re-scores the written file
    auto ev = cli("eval map --rankings " + (out / "rankings_ensemble.tsv").string() +
                  " --gold " + fx("retrieval/gold.jsonl"));
    CHECK(ev.code == 0);
    CHECK(ev.out == "MAP: 1.000000\n");
}

TEST_CASE("retrieve without gold emits rankings only") {
    auto out = scratch();
    auto r = cli("--config " + fx("retrieval/config.toml") + " --out " + out.string() +
                 " retrieve --queries " + fx("retrieval/queries.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out.find("MAP") == std::string::npos);
    CHECK(fs::exists(out / "rankings_ensemble.tsv"));
}

TEST_CASE("refine reproduces the two-iteration crib trace end to end") {
    auto out = scratch();
    auto r = cli("--config " + fx("esnli/config_crib.toml") + " --out " + out.string() +
                 " --seed 0 refine --problems " + fx("esnli/problems_crib.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out.find("verified: 1/1") != std::string::npos);

    auto rows = parse_jsonl(slurp(out / "traces.jsonl"));
    REQUIRE(rows.size() == 3);  // header + 2 iterations
    CHECK(rows[0]["type"] == "header");
    CHECK(rows[0]["problem"]["id"] == "esnli-crib");
    CHECK(rows[0]["final_valid"] == true);
    CHECK(rows[0]["stopped_at"] == 1);
    CHECK(rows[0]["iterations"] == 2);
    CHECK(rows[1]["explanation"] ==
          "if the infant is crying, it can be assumed that they are unhappy.");
    CHECK(rows[2]["explanation"] ==
          "if the infant is crying, it can be assumed that they are unhappy. "
          "An infant is a type of baby.");

    auto summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["problems"] == 1);
    REQUIRE(summary["cumulative_valid"].size() == 10);
    CHECK(summary["cumulative_valid"][0] == 0);
    CHECK(summary["cumulative_valid"][1] == 1);
    CHECK(summary["cumulative_valid"][9] == 1);
    CHECK(summary["failures"].empty());

    CHECK(slurp(out / "traces.md").find("**Formally verified at iteration 1.**") !=
          std::string::npos);
}

TEST_CASE("two refine runs with the same seed are byte-identical") {
    auto out1 = scratch();
    auto out2 = scratch();
    std::string base = "--config " + fx("esnli/config_crib.toml") + " --seed 0 refine "
                       "--problems " + fx("esnli/problems_crib.jsonl") + " --out ";
    CHECK(cli(base + out1.string()).code == 0);
    CHECK(cli(base + out2.string()).code == 0);
    for (const char* f : {"traces.jsonl", "summary.json", "traces.md"})
        CHECK(slurp(out1 / f) == slurp(out2 / f));
}

TEST_CASE("the two-step cases repair at iteration 2") {
    auto out = scratch();
    auto r = cli("--config " + fx("repair/config.toml") + " --out " + out.string() +
                 " refine --problems " + fx("repair/problems.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out.find("verified: 2/2") != std::string::npos);

    auto summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["cumulative_valid"][0] == 0);
    CHECK(summary["cumulative_valid"][1] == 0);
    CHECK(summary["cumulative_valid"][2] == 2);

    auto rows = parse_jsonl(slurp(out / "traces.jsonl"));
    REQUIRE(rows.size() == 8);  // 2 x (header + 3 iterations)
    CHECK(rows[0]["problem"]["id"] == "worldtree-read");
    CHECK(rows[0]["stopped_at"] == 2);
    CHECK(rows[3]["explanation"].get<std::string>().find(
              "Learned characteristics are synonymous with learned traits.") !=
          std::string::npos);
    CHECK(rows[4]["problem"]["id"] == "clinical-brca2");
    CHECK(rows[4]["final_valid"] == true);
    CHECK(rows[4]["stopped_at"] == 2);
    CHECK(rows[7]["explanation"].get<std::string>().find(
              "directly contributes to double strand break DNA repair.") !=
          std::string::npos);
}

TEST_CASE("an empty problem file produces empty outputs and exit 0") {
    auto out = scratch();
    auto r = cli("--config " + fx("esnli/config_crib.toml") + " --out " + out.string() +
                 " refine --problems " + fx("esnli/problems_empty.jsonl"));
    CHECK(r.code == 0);
    CHECK(slurp(out / "traces.jsonl").empty());
    auto summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary["problems"] == 0);
    CHECK(summary["cumulative_valid"].empty());
}

TEST_CASE("critique hard judges a shipped explanation") {
    auto out = scratch();
    auto r = cli("--config " + fx("esnli/config_critique.toml") + " --out " + out.string() +
                 " critique hard --problems " + fx("esnli/problems_critique.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out == "esnli-crib: valid\n");
    auto rows = parse_jsonl(slurp(out / "critique_hard.jsonl"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["id"] == "esnli-crib");
    CHECK(rows[0]["report"]["kind"] == "hard");
    CHECK(rows[0]["report"]["verdict"]["valid"] == true);
}

TEST_CASE("critique hard honours the --depth override") {
    auto out = scratch();
    auto r = cli("--config " + fx("esnli/config_critique.toml") + " --out " + out.string() +
                 " --depth 1 critique hard --problems " + fx("esnli/problems_critique.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out == "esnli-crib: invalid\n");  // depth 1 cannot reach the proof
}

TEST_CASE("critique hard without an explanation is a data error") {
    auto r = cli("--config " + fx("esnli/config_critique.toml") +
                 " critique hard --problems " + fx("esnli/problems_crib.jsonl"));
    CHECK(r.code == 3);
    CHECK(r.err.find("initial_explanation") != std::string::npos);
}

TEST_CASE("critique soft scores the crib explanation") {
    auto out = scratch();
    auto r = cli("--config " + fx("esnli/config_critique.toml") + " --out " + out.string() +
                 " critique soft --problems " + fx("esnli/problems_critique.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out == "esnli-crib: parsimony=2.0 coherence=0.0 uncertainty=0.5\n");
    auto rows = parse_jsonl(slurp(out / "critique_soft.jsonl"));
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0]["reports"].size() == 3);
    CHECK(rows[0]["reports"][0]["name"] == "parsimony");
    CHECK(rows[0]["reports"][0]["score"] == 2.0);
}

TEST_CASE("ibe picks the first candidate three votes to nil on both scored rows") {
    auto out = scratch();
    auto r = cli("--out " + out.string() + " ibe --candidates " + fx("ibe/scored_pairs.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out == "scored-gpt4o: selected=0 votes=[3,0]\n"
                   "scored-gpt35: selected=0 votes=[3,0]\n"
                   "accuracy: 2/2 = 1.00\n");
    auto rows = parse_jsonl(slurp(out / "ibe.jsonl"));
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row["selected"] == 0);
        CHECK(row["votes"] == json({3, 0}));
    }
    CHECK(rows[0]["scores"][0]["parsimony"] == 6);
    CHECK(rows[0]["scores"][0]["coherence"] == 0.25);
    CHECK(rows[1]["scores"][1]["coherence"] == -0.05);
}

TEST_CASE("ibe scores the COPA-style fixture live and reports accuracy") {
    auto out = scratch();
    auto r = cli("--out " + out.string() + " ibe --candidates " + fx("ibe/copa.jsonl"));
    CHECK(r.code == 0);
    CHECK(r.out.find("accuracy: 16/20 = 0.80") != std::string::npos);
    CHECK(parse_jsonl(slurp(out / "ibe.jsonl")).size() == 20);
}

TEST_CASE("malformed inputs exit with the data code") {
    auto dir = scratch();
    std::ofstream(dir / "bad.jsonl") << "{not json\n";
    CHECK(cli("--out " + (dir / "o").string() + " ibe --candidates " +
              (dir / "bad.jsonl").string()).code == 3);
    CHECK(cli("--config " + fx("retrieval/config.toml") + " --out " + (dir / "o").string() +
              " retrieve --queries does-not-exist.jsonl").code == 3);
}
