#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>

#include "peirce/errors.hpp"
#include "peirce/gen.hpp"

using namespace peirce;
using gen::PromptTemplate;
using gen::ReplayModel;

TEST_CASE("placeholders render from bindings") {
    auto t = PromptTemplate::parse("Hypothesis: {hypothesis}");
    CHECK(t.variables() == std::set<std::string>{"hypothesis"});
    CHECK(t.render({{"hypothesis", "I pricked the baloon."}}) ==
          "Hypothesis: I pricked the baloon.");
}

TEST_CASE("a template without placeholders is the identity") {
    auto t = PromptTemplate::parse("no placeholders here.");
    CHECK(t.variables().empty());
    CHECK(t.render({}) == "no placeholders here.");
}

TEST_CASE("missing bindings are rejected by name") {
    auto t = PromptTemplate::parse("{a}{b}");
    CHECK(t.variables() == std::set<std::string>{"a", "b"});
    try {
        t.render({{"a", "1"}});
        FAIL("expected MissingVariableError");
    } catch (const MissingVariableError& e) {
        CHECK(std::string(e.what()).find("b") != std::string::npos);
    }
}

TEST_CASE("escapes and stray braces stay literal") {
    auto t = PromptTemplate::parse("{{json}} {x} {9bad} {unclosed } lone");
    CHECK(t.variables() == std::set<std::string>{"x"});
    CHECK(t.render({{"x", "V"}}) == "{json} V {9bad} {unclosed } lone");

    auto empty = PromptTemplate::parse("{} {-} {");
    CHECK(empty.variables().empty());
    CHECK(empty.render({}) == "{} {-} {");
}

TEST_CASE("unknown bindings warn by default and throw in strict mode") {
    auto t = PromptTemplate::parse("{a}");
    CHECK(t.render({{"a", "1"}, {"ghost", "2"}}) == "1");
    CHECK_THROWS_AS(t.render({{"a", "1"}, {"ghost", "2"}}, true), UnknownVariableError);
}

TEST_CASE("render is idempotent once no placeholders remain") {
    auto t = PromptTemplate::parse("A {x} B C");
    std::string once = t.render({{"x", "value"}});
    auto again = PromptTemplate::parse(once);
    REQUIRE(again.variables().empty());
    CHECK(again.render({}) == once);

    // An escape can mint a fresh placeholder, so idempotence is conditional.
    auto esc = PromptTemplate::parse("{{lit}}");
    auto reparsed = PromptTemplate::parse(esc.render({}));
    CHECK(reparsed.variables() == std::set<std::string>{"lit"});
}

TEST_CASE("parsed variables match the placeholder grammar on random templates") {
    std::mt19937 rng(20240904);
    const std::vector<std::string> pool = {"alpha", "beta_2", "_x", "Gamma"};
    std::uniform_int_distribution<int> piece_kind(0, 7), npieces(1, 12), wlen(1, 6);
    std::uniform_int_distribution<int> letter('a', 'z'), pick(0, 3);
    for (int trial = 0; trial < 120; ++trial) {
        std::string source, expected;
        std::set<std::string> vars;
        int n = npieces(rng);
        for (int p = 0; p < n; ++p) {
            if (p > 0) {
                // '-' cannot extend an identifier or form a brace pair, so
                // pieces cannot merge across the boundary.
                source += '-';
                expected += '-';
            }
            switch (piece_kind(rng)) {
                case 0: {
                    std::string w;
                    int len = wlen(rng);
                    for (int i = 0; i < len; ++i) w += static_cast<char>(letter(rng));
                    source += w;
                    expected += w;
                    break;
                }
                case 1: {
                    const std::string& name = pool[static_cast<size_t>(pick(rng))];
                    source += "{" + name + "}";
                    expected += "V_" + name;
                    vars.insert(name);
                    break;
                }
                case 2: source += "{{"; expected += "{"; break;
                case 3: source += "}}"; expected += "}"; break;
                case 4: source += "{"; expected += "{"; break;
                case 5: source += "}"; expected += "}"; break;
                case 6: source += "{9bad}"; expected += "{9bad}"; break;
                default: source += "{unclosed"; expected += "{unclosed"; break;
            }
        }
        auto t = PromptTemplate::parse(source);
        CHECK(t.variables() == vars);
        std::map<std::string, std::string> bindings;
        for (const std::string& v : vars) bindings[v] = "V_" + v;
        CHECK(t.render(bindings) == expected);
    }
}

TEST_CASE("replay model walks each key's script in order") {
    ReplayModel m({{"k", {"r1", "r2"}},
                   {"iter0", {"little boy is a young child."}},
                   {"p9/iter0", {"override"}},
                   {"empty", {}}});
    auto first = m.generate("prompt text", "k");
    CHECK(first.response == "r1");
    CHECK(first.attempt == 1);
    CHECK(first.prompt == "prompt text");
    CHECK(first.model_name == "replay");
    CHECK(m.generate("p", "k").response == "r2");
    CHECK_THROWS_AS(m.generate("p", "k"), ScriptExhaustedError);

    // Namespaced keys fall back to their bare tail unless scripted directly.
    CHECK(m.generate("p", "p1/iter0").response == "little boy is a young child.");
    CHECK(m.generate("p", "p9/iter0").response == "override");

    CHECK_THROWS_AS(m.generate("p", "empty"), EmptyResponseError);
    CHECK_THROWS_AS(m.generate("p", "missing"), EmptyResponseError);
}

TEST_CASE("an empty scripted string counts as an empty response") {
    ReplayModel m(std::map<std::string, std::vector<std::string>>{{"k", {""}}});
    CHECK_THROWS_AS(m.generate("p", "k"), EmptyResponseError);
}

TEST_CASE("replay scripts load from JSON files") {
    auto path = (std::filesystem::temp_directory_path() / "replay_test.json").string();
    {
        std::ofstream out(path);
        out << R"({"iter0": ["first"], "iter1": ["second"]})";
    }
    auto m = ReplayModel::from_json_file(path);
    CHECK(m.generate("p", "iter0").response == "first");
    CHECK(m.generate("p", "q7/iter1").response == "second");
    {
        std::ofstream out(path);
        out << R"(["not", "an", "object"])";
    }
    CHECK_THROWS_AS(ReplayModel::from_json_file(path), Error);
    {
        std::ofstream out(path);
        out << R"({"k": "not an array"})";
    }
    CHECK_THROWS_AS(ReplayModel::from_json_file(path), Error);
    std::filesystem::remove(path);
}

TEST_CASE("generation records serialise to stable JSONL") {
    gen::GenerationRecord r;
    r.prompt = "p";
    r.response = "r";
    r.model_name = "replay";
    r.latency_ms = 7;
    r.attempt = 2;
    CHECK(gen::records_to_jsonl({r}) ==
          "{\"prompt\":\"p\",\"response\":\"r\",\"model_name\":\"replay\","
          "\"latency_ms\":7,\"attempt\":2}\n");
}

namespace {

// Local chat-completions stand-in; behaviour switches on the request count
// and configured mode.
struct FakeEndpoint {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};
    std::string mode = "ok";
    std::string seen_auth, seen_model;
    double seen_temperature = -1;
    int seen_max_tokens = -1;

    FakeEndpoint() {
        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        ++hits;
                        seen_auth = req.get_header_value("Authorization");
                        auto j = nlohmann::json::parse(req.body);
                        seen_model = j.value("model", "");
                        seen_temperature = j.value("temperature", -1.0);
                        seen_max_tokens = j.value("max_tokens", -1);
                        if (mode == "http500") {
                            res.status = 500;
                            res.set_content("boom", "text/plain");
                            return;
                        }
                        if (mode == "http404") {
                            res.status = 404;
                            res.set_content("nope", "text/plain");
                            return;
                        }
                        std::string content = mode == "empty" ? "" : "scripted reply";
                        nlohmann::json out = {
                            {"choices",
                             {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
                        res.set_content(out.dump(), "application/json");
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeEndpoint() {
        server.stop();
        thread.join();
    }
    std::string base_url() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/v1";
    }
};

gen::RemoteConfig fast_config(const FakeEndpoint& ep) {
    gen::RemoteConfig cfg;
    cfg.base_url = ep.base_url();
    cfg.model = "test-model";
    cfg.retry_limit = 2;
    cfg.backoff_initial_ms = 1;
    return cfg;
}

}  // namespace

TEST_CASE("remote client round-trips a chat completion") {
    setenv("PEIRCE_API_KEY", "sk-test-123", 1);
    FakeEndpoint ep;
    gen::RemoteModel m(fast_config(ep));
    auto r = m.generate("say hi", "k");
    CHECK(r.response == "scripted reply");
    CHECK(r.attempt == 1);
    CHECK(r.model_name == "remote");
    CHECK(ep.seen_auth == "Bearer sk-test-123");
    CHECK(ep.seen_model == "test-model");
    CHECK(ep.seen_temperature == 0.0);
    CHECK(ep.seen_max_tokens == 1024);
}

TEST_CASE("remote client retries 5xx then reports the exhausted attempt count") {
    setenv("PEIRCE_API_KEY", "sk-test-123", 1);
    FakeEndpoint ep;
    ep.mode = "http500";
    gen::RemoteModel m(fast_config(ep));
    try {
        m.generate("say hi", "k");
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts == 2);
        CHECK(e.status == 500);
    }
    CHECK(ep.hits == 2);
}

TEST_CASE("remote client fails fast on non-transient status") {
    setenv("PEIRCE_API_KEY", "sk-test-123", 1);
    FakeEndpoint ep;
    ep.mode = "http404";
    gen::RemoteModel m(fast_config(ep));
    try {
        m.generate("say hi", "k");
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts == 1);
        CHECK(e.status == 404);
    }
    CHECK(ep.hits == 1);
}

TEST_CASE("remote client rejects empty completions") {
    setenv("PEIRCE_API_KEY", "sk-test-123", 1);
    FakeEndpoint ep;
    ep.mode = "empty";
    gen::RemoteModel m(fast_config(ep));
    CHECK_THROWS_AS(m.generate("say hi", "k"), EmptyResponseError);
}

TEST_CASE("the remote credential comes from the environment only") {
    FakeEndpoint ep;
    unsetenv("PEIRCE_API_KEY");
    CHECK_THROWS_AS(gen::RemoteModel(fast_config(ep)), Error);
    setenv("PEIRCE_API_KEY", "sk-test-123", 1);
}
