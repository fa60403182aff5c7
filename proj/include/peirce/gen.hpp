#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace peirce::gen {

// Text with {name} placeholders; {{ and }} pass through as literal braces.
// Braces that open no valid placeholder stay literal.
class PromptTemplate {
public:
    static PromptTemplate parse(std::string source);
    const std::string& source() const { return source_; }
    const std::set<std::string>& variables() const { return variables_; }
    // Unknown binding names warn to stderr by default; strict_unknown makes
    // them an error.
    std::string render(const std::map<std::string, std::string>& bindings,
                       bool strict_unknown = false) const;

private:
    std::string source_;
    std::set<std::string> variables_;
};

struct DecodingParams {
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<int> seed;
};

struct GenerationRecord {
    std::string prompt;
    std::string response;
    std::string model_name;
    long latency_ms = 0;
    int attempt = 1;
};

nlohmann::ordered_json to_json(const GenerationRecord& r);
std::string records_to_jsonl(const std::vector<GenerationRecord>& records);

class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;
    virtual const std::string& name() const = 0;
    // key labels the call site ("<problem>/iter0", "formalise", ...) so replay
    // scripts can address it; remote models ignore it.
    virtual GenerationRecord generate(const std::string& prompt,
                                      const std::string& key) = 0;
};

// {"key": ["response", ...], ...} -> script map, with shape validation.
std::map<std::string, std::vector<std::string>> load_replay_script(const std::string& path);

// Deterministic scripted model: each key maps to the list of responses that
// successive calls with that key consume in order. A namespaced key
// ("pid/iter0") falls back to its bare tail ("iter0") when unscripted.
class ReplayModel : public GenerativeModel {
public:
    explicit ReplayModel(std::map<std::string, std::vector<std::string>> script);
    static ReplayModel from_json_file(const std::string& path);
    const std::string& name() const override { return name_; }
    GenerationRecord generate(const std::string& prompt,
                              const std::string& key) override;

private:
    std::string name_ = "replay";
    std::map<std::string, std::vector<std::string>> script_;
    std::map<std::string, size_t> cursor_;
    std::mutex mu_;
};

struct RemoteConfig {
    std::string base_url;      // scheme://host[:port][/path-prefix]
    std::string model;         // payload model name
    int retry_limit = 3;       // total attempts
    int backoff_initial_ms = 200;
    int max_in_flight = 4;
    DecodingParams decoding;
};

// OpenAI-compatible chat-completions client. The credential comes from the
// PEIRCE_API_KEY environment variable, never from configuration files.
class RemoteModel : public GenerativeModel {
public:
    explicit RemoteModel(RemoteConfig config);
    const std::string& name() const override { return name_; }
    GenerationRecord generate(const std::string& prompt,
                              const std::string& key) override;

private:
    std::string name_ = "remote";
    RemoteConfig config_;
    std::string api_key_;
    std::string host_;  // scheme://host:port
    std::string path_;  // path prefix + /chat/completions

    class Gate;
    std::shared_ptr<Gate> gate_;
};

}  // namespace peirce::gen
