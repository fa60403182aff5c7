#include "peirce/gen.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "peirce/errors.hpp"
#include "peirce/io.hpp"

namespace peirce::gen {

namespace {

bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

// Returns the placeholder name if source[i] opens one, else nullopt.
std::optional<std::string> match_placeholder(const std::string& s, size_t i) {
    size_t j = i + 1;
    if (j >= s.size() || !ident_start(s[j])) return std::nullopt;
    size_t start = j;
    while (j < s.size() && ident_char(s[j])) ++j;
    if (j >= s.size() || s[j] != '}') return std::nullopt;
    return s.substr(start, j - start);
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string source) {
    PromptTemplate t;
    for (size_t i = 0; i < source.size(); ++i) {
        char c = source[i];
        if (c == '{') {
            if (i + 1 < source.size() && source[i + 1] == '{') {
                ++i;
            } else if (auto name = match_placeholder(source, i)) {
                t.variables_.insert(*name);
                i += name->size() + 1;
            }
        } else if (c == '}' && i + 1 < source.size() && source[i + 1] == '}') {
            ++i;
        }
    }
    t.source_ = std::move(source);
    return t;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& bindings,
                                   bool strict_unknown) const {
    for (const std::string& v : variables_)
        if (!bindings.count(v)) throw MissingVariableError(v);
    for (const auto& [name, value] : bindings) {
        (void)value;
        if (!variables_.count(name)) {
            if (strict_unknown) throw UnknownVariableError(name);
            std::cerr << "warning: binding '" << name << "' matches no placeholder\n";
        }
    }
    std::string out;
    out.reserve(source_.size());
    for (size_t i = 0; i < source_.size(); ++i) {
        char c = source_[i];
        if (c == '{') {
            if (i + 1 < source_.size() && source_[i + 1] == '{') {
                out += '{';
                ++i;
            } else if (auto name = match_placeholder(source_, i)) {
                out += bindings.at(*name);
                i += name->size() + 1;
            } else {
                out += '{';
            }
        } else if (c == '}' && i + 1 < source_.size() && source_[i + 1] == '}') {
            out += '}';
            ++i;
        } else {
            out += c;
        }
    }
    return out;
}

nlohmann::ordered_json to_json(const GenerationRecord& r) {
    nlohmann::ordered_json j;
    j["prompt"] = r.prompt;
    j["response"] = r.response;
    j["model_name"] = r.model_name;
    j["latency_ms"] = r.latency_ms;
    j["attempt"] = r.attempt;
    return j;
}

std::string records_to_jsonl(const std::vector<GenerationRecord>& records) {
    std::string out;
    for (const GenerationRecord& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

ReplayModel::ReplayModel(std::map<std::string, std::vector<std::string>> script)
    : script_(std::move(script)) {}

std::map<std::string, std::vector<std::string>> load_replay_script(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCategory::data, "bad replay script " + path + ": " + e.what());
    }
    if (!j.is_object())
        throw Error(ErrorCategory::data, "replay script must be a JSON object: " + path);
    std::map<std::string, std::vector<std::string>> script;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_array())
            throw Error(ErrorCategory::data,
                        "replay script entry '" + key + "' must be an array");
        std::vector<std::string> responses;
        for (const auto& r : value) {
            if (!r.is_string())
                throw Error(ErrorCategory::data,
                            "replay script entry '" + key + "' must hold strings");
            responses.push_back(r.get<std::string>());
        }
        script[key] = std::move(responses);
    }
    return script;
}

ReplayModel ReplayModel::from_json_file(const std::string& path) {
    return ReplayModel(load_replay_script(path));
}

GenerationRecord ReplayModel::generate(const std::string& prompt,
                                       const std::string& key) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = script_.find(key);
    if (it == script_.end()) {
        // "pid/iter0" falls back to "iter0" so one script can serve many problems.
        auto slash = key.rfind('/');
        if (slash != std::string::npos) it = script_.find(key.substr(slash + 1));
    }
    if (it == script_.end())
        throw EmptyResponseError("no replay script entry for key '" + key + "'");
    if (it->second.empty())
        throw EmptyResponseError("replay script entry '" + it->first + "' is empty");
    size_t& pos = cursor_[it->first];
    if (pos >= it->second.size()) throw ScriptExhaustedError(it->first);
    const std::string& response = it->second[pos];
    ++pos;
    if (response.empty())
        throw EmptyResponseError("replay script entry '" + it->first +
                                 "' yielded an empty response");
    GenerationRecord r;
    r.prompt = prompt;
    r.response = response;
    r.model_name = name_;
    r.latency_ms = 0;
    r.attempt = 1;
    return r;
}

// Bounds concurrent in-flight requests.
class RemoteModel::Gate {
public:
    explicit Gate(int limit) : limit_(limit) {}
    void acquire() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return active_ < limit_; });
        ++active_;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            --active_;
        }
        cv_.notify_one();
    }

private:
    int limit_;
    int active_ = 0;
    std::mutex mu_;
    std::condition_variable cv_;
};

RemoteModel::RemoteModel(RemoteConfig config) : config_(std::move(config)) {
    const char* key = std::getenv("PEIRCE_API_KEY");
    if (key == nullptr || *key == '\0')
        throw Error(ErrorCategory::config,
                    "PEIRCE_API_KEY is not set; the remote model needs it");
    api_key_ = key;
    if (config_.retry_limit < 1)
        throw Error(ErrorCategory::config, "retry_limit must be at least 1");
    if (config_.max_in_flight < 1)
        throw Error(ErrorCategory::config, "max_in_flight must be at least 1");

    // Split scheme://host:port from an optional path prefix.
    const std::string& url = config_.base_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorCategory::config, "base_url needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = url;
        path_ = "/chat/completions";
    } else {
        host_ = url.substr(0, path_start);
        std::string prefix = url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        path_ = prefix + "/chat/completions";
    }
    gate_ = std::make_shared<Gate>(config_.max_in_flight);
}

GenerationRecord RemoteModel::generate(const std::string& prompt,
                                       const std::string& key) {
    (void)key;
    nlohmann::json payload;
    payload["model"] = config_.model;
    payload["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "user"}, {"content", prompt}},
    });
    payload["temperature"] = config_.decoding.temperature;
    payload["max_tokens"] = config_.decoding.max_tokens;
    if (config_.decoding.seed) payload["seed"] = *config_.decoding.seed;
    const std::string body = payload.dump();

    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    auto started = std::chrono::steady_clock::now();

    int status = 0;
    std::string response_body;
    for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
        if (attempt > 1) {
            long wait = static_cast<long>(config_.backoff_initial_ms) << (attempt - 2);
            std::this_thread::sleep_for(std::chrono::milliseconds(wait));
        }
        gate_->acquire();
        httplib::Client client(host_);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        auto res = client.Post(path_, headers, body, "application/json");
        gate_->release();

        if (!res) {
            status = 0;
            response_body = "connection failed";
            continue;  // transient
        }
        status = res->status;
        response_body = res->body;
        if (status == 429 || status >= 500) continue;  // transient
        if (status != 200)
            throw TransportError(status, response_body.substr(0, 200), attempt);

        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(response_body);
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(status, std::string("unparseable body: ") + e.what(),
                                 attempt);
        }
        std::string text;
        if (reply.contains("choices") && reply["choices"].is_array() &&
            !reply["choices"].empty()) {
            const auto& msg = reply["choices"][0];
            if (msg.contains("message") && msg["message"].contains("content") &&
                msg["message"]["content"].is_string())
                text = msg["message"]["content"].get<std::string>();
        }
        if (text.empty()) throw EmptyResponseError("remote reply held no content");

        GenerationRecord r;
        r.prompt = prompt;
        r.response = std::move(text);
        r.model_name = name_;
        r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
        r.attempt = attempt;
        return r;
    }
    throw TransportError(status, response_body.substr(0, 200), config_.retry_limit);
}

}  // namespace peirce::gen
