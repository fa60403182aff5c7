#include "peirce/config.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "peirce/errors.hpp"

namespace peirce::config {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, size_t line, const std::string& what) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

// Cut a trailing # comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_string) {
            if (c == '\\' && i + 1 < line.size()) { ++i; continue; }
            if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

nlohmann::json parse_string(const std::string& tok, const std::string& origin, size_t line) {
    if (tok.size() < 2 || tok.back() != '"') fail(origin, line, "unterminated string");
    std::string out;
    for (size_t i = 1; i + 1 < tok.size(); ++i) {
        char c = tok[i];
        if (c == '"') fail(origin, line, "stray '\"' inside string");
        if (c != '\\') { out.push_back(c); continue; }
        if (i + 2 >= tok.size()) fail(origin, line, "dangling escape");
        char e = tok[++i];
        switch (e) {
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            default: fail(origin, line, std::string("unknown escape \\") + e);
        }
    }
    return nlohmann::json(out);
}

nlohmann::json parse_scalar(const std::string& raw, const std::string& origin, size_t line) {
    std::string tok = trim(raw);
    if (tok.empty()) fail(origin, line, "missing value");
    if (tok.front() == '"') return parse_string(tok, origin, line);
    if (tok == "true") return nlohmann::json(true);
    if (tok == "false") return nlohmann::json(false);
    // Number: integer or float, fully consumed.
    try {
        size_t used = 0;
        bool floaty = tok.find_first_of(".eE") != std::string::npos;
        if (floaty) {
            double v = std::stod(tok, &used);
            if (used == tok.size()) return nlohmann::json(v);
        } else {
            long long v = std::stoll(tok, &used, 10);
            if (used == tok.size()) return nlohmann::json(v);
        }
    } catch (const std::exception&) {
        // fall through to the error below
    }
    fail(origin, line, "invalid value: " + tok);
}

// Split "a, b, c" at top-level commas, honouring quotes.
std::vector<std::string> split_elements(const std::string& body, const std::string& origin,
                                        size_t line) {
    std::vector<std::string> parts;
    std::string cur;
    bool in_string = false;
    for (size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (in_string) {
            cur.push_back(c);
            if (c == '\\' && i + 1 < body.size()) { cur.push_back(body[++i]); continue; }
            if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
            cur.push_back(c);
        } else if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (c == '[' || c == ']') {
            fail(origin, line, "nested arrays are not supported");
        } else {
            cur.push_back(c);
        }
    }
    if (in_string) fail(origin, line, "unterminated string");
    parts.push_back(cur);
    return parts;
}

nlohmann::json parse_value(const std::string& raw, const std::string& origin, size_t line) {
    std::string tok = trim(raw);
    if (tok.empty()) fail(origin, line, "missing value");
    if (tok.front() != '[') return parse_scalar(tok, origin, line);
    if (tok.back() != ']') fail(origin, line, "unterminated array");
    std::string body = trim(tok.substr(1, tok.size() - 2));
    auto arr = nlohmann::json::array();
    if (body.empty()) return arr;
    bool want_string = false;
    bool first = true;
    for (const auto& part : split_elements(body, origin, line)) {
        auto v = parse_scalar(part, origin, line);
        if (v.is_boolean()) fail(origin, line, "arrays hold strings or numbers only");
        bool is_string = v.is_string();
        if (first) { want_string = is_string; first = false; }
        else if (is_string != want_string) fail(origin, line, "mixed array element types");
        arr.push_back(std::move(v));
    }
    return arr;
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text, const std::string& origin) {
    auto doc = nlohmann::json::object();
    std::string section;
    std::istringstream in(text);
    std::string raw;
    size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) fail(origin, lineno, "invalid section name");
            if (doc.contains(section)) fail(origin, lineno, "duplicate section [" + section + "]");
            doc[section] = nlohmann::json::object();
            continue;
        }
        size_t eq = std::string::npos;
        bool in_string = false;
        for (size_t i = 0; i < line.size() && eq == std::string::npos; ++i) {
            char c = line[i];
            if (c == '"') in_string = !in_string;
            else if (c == '=' && !in_string) eq = i;
        }
        if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (!valid_name(key)) fail(origin, lineno, "invalid key name");
        if (section.empty()) fail(origin, lineno, "key '" + key + "' outside any [section]");
        if (doc[section].contains(key))
            fail(origin, lineno, "duplicate key '" + key + "' in [" + section + "]");
        doc[section][key] = parse_value(line.substr(eq + 1), origin, lineno);
    }
    return doc;
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"kb", {"path"}},
        {"retrieval", {"models", "k1", "b", "weights", "training"}},
        {"generator", {"kind", "script", "endpoint", "model", "retry_limit"}},
        {"prover", {"depth"}},
        {"critique", {"names", "entailment_endpoint", "hedging_endpoint"}},
        {"refine", {"max_iterations", "stop_on_valid", "retrieval_top_k"}},
        {"output", {"dir"}},
    };
    return k;
}

class Extractor {
public:
    Extractor(const nlohmann::json& doc, std::string origin)
        : doc_(doc), origin_(std::move(origin)) {}

    std::string str(const std::string& sec, const std::string& key, std::string dflt) const {
        const auto* v = find(sec, key);
        if (!v) return dflt;
        if (!v->is_string()) type_error(sec, key, "a string");
        return v->get<std::string>();
    }

    double num(const std::string& sec, const std::string& key, double dflt) const {
        const auto* v = find(sec, key);
        if (!v) return dflt;
        if (!v->is_number()) type_error(sec, key, "a number");
        return v->get<double>();
    }

    int integer(const std::string& sec, const std::string& key, int dflt) const {
        const auto* v = find(sec, key);
        if (!v) return dflt;
        if (!v->is_number_integer()) type_error(sec, key, "an integer");
        return v->get<int>();
    }

    bool boolean(const std::string& sec, const std::string& key, bool dflt) const {
        const auto* v = find(sec, key);
        if (!v) return dflt;
        if (!v->is_boolean()) type_error(sec, key, "a boolean");
        return v->get<bool>();
    }

    std::vector<std::string> strings(const std::string& sec, const std::string& key,
                                     std::vector<std::string> dflt) const {
        const auto* v = find(sec, key);
        if (!v) return dflt;
        if (!v->is_array()) type_error(sec, key, "an array of strings");
        std::vector<std::string> out;
        for (const auto& e : *v) {
            if (!e.is_string()) type_error(sec, key, "an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    std::vector<double> numbers(const std::string& sec, const std::string& key) const {
        const auto* v = find(sec, key);
        if (!v) return {};
        if (!v->is_array()) type_error(sec, key, "an array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) type_error(sec, key, "an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    const nlohmann::json* find(const std::string& sec, const std::string& key) const {
        auto s = doc_.find(sec);
        if (s == doc_.end()) return nullptr;
        auto k = s->find(key);
        if (k == s->end()) return nullptr;
        return &*k;
    }

    [[noreturn]] void type_error(const std::string& sec, const std::string& key,
                                 const std::string& want) const {
        throw ConfigError(origin_ + ": [" + sec + "] " + key + " must be " + want);
    }

    const nlohmann::json& doc_;
    std::string origin_;
};

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (!p.is_absolute() && !base_dir.empty()) p = fs::path(base_dir) / p;
    return p.lexically_normal().string();
}

void require_file(const std::string& origin, const std::string& what, const std::string& path) {
    if (!fs::exists(path))
        throw ConfigError(origin + ": " + what + " does not exist: " + path);
}

}  // namespace

PipelineConfig from_toml(const nlohmann::json& toml, const std::string& base_dir,
                         const std::string& origin) {
    const auto& known = known_keys();
    for (const auto& [section, body] : toml.items()) {
        auto it = known.find(section);
        if (it == known.end())
            throw ConfigError(origin + ": unknown section [" + section + "]");
        for (const auto& [key, value] : body.items()) {
            (void)value;
            if (!it->second.count(key))
                throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
        }
    }

    Extractor x(toml, origin);
    PipelineConfig c;
    PipelineConfig dflt;

    c.kb_path = resolve(base_dir, x.str("kb", "path", ""));

    c.retrieval_models = x.strings("retrieval", "models", dflt.retrieval_models);
    c.bm25_k1 = x.num("retrieval", "k1", dflt.bm25_k1);
    c.bm25_b = x.num("retrieval", "b", dflt.bm25_b);
    c.ensemble_weights = x.numbers("retrieval", "weights");
    c.training_path = resolve(base_dir, x.str("retrieval", "training", ""));

    c.generator_kind = x.str("generator", "kind", dflt.generator_kind);
    c.script_path = resolve(base_dir, x.str("generator", "script", ""));
    c.endpoint = x.str("generator", "endpoint", "");
    c.model_name = x.str("generator", "model", "");
    c.retry_limit = x.integer("generator", "retry_limit", dflt.retry_limit);

    c.depth = x.integer("prover", "depth", dflt.depth);

    c.critiques = x.strings("critique", "names", dflt.critiques);
    c.entailment_endpoint = x.str("critique", "entailment_endpoint", "");
    c.hedging_endpoint = x.str("critique", "hedging_endpoint", "");

    c.max_iterations = x.integer("refine", "max_iterations", dflt.max_iterations);
    c.stop_on_valid = x.boolean("refine", "stop_on_valid", dflt.stop_on_valid);
    c.retrieval_top_k = x.integer("refine", "retrieval_top_k", dflt.retrieval_top_k);

    c.out_dir = resolve(base_dir, x.str("output", "dir", dflt.out_dir));

    // ---- cross-field invariants ----
    if (c.retrieval_models.empty())
        throw ConfigError(origin + ": retrieval.models must not be empty");
    for (const auto& m : c.retrieval_models)
        if (m != "bm25" && m != "unification")
            throw ConfigError(origin + ": unknown retrieval model '" + m + "'");
    if (c.bm25_k1 <= 0) throw ConfigError(origin + ": retrieval.k1 must be positive");
    if (c.bm25_b < 0 || c.bm25_b > 1)
        throw ConfigError(origin + ": retrieval.b must be in [0,1]");
    if (!c.ensemble_weights.empty()) {
        if (c.ensemble_weights.size() != c.retrieval_models.size())
            throw ConfigError(origin + ": retrieval.weights must match retrieval.models (" +
                              std::to_string(c.retrieval_models.size()) + " models, " +
                              std::to_string(c.ensemble_weights.size()) + " weights)");
        bool any_positive = false;
        for (double w : c.ensemble_weights) {
            if (w < 0) throw ConfigError(origin + ": retrieval.weights must be non-negative");
            if (w > 0) any_positive = true;
        }
        if (!any_positive)
            throw ConfigError(origin + ": retrieval.weights must not all be zero");
    }
    bool wants_unification = false;
    for (const auto& m : c.retrieval_models) wants_unification |= (m == "unification");
    if (wants_unification && c.training_path.empty())
        throw ConfigError(origin + ": retrieval model 'unification' needs retrieval.training");

    if (c.generator_kind != "replay" && c.generator_kind != "remote")
        throw ConfigError(origin + ": generator.kind must be 'replay' or 'remote'");
    // A config without a [generator] section still serves retrieval- and
    // critique-only runs; the script/endpoint requirement binds once the
    // section is spelled out (and again in make_generator for lazy misuse).
    bool generator_configured = toml.contains("generator");
    if (generator_configured) {
        if (c.generator_kind == "replay" && c.script_path.empty())
            throw ConfigError(origin + ": generator.kind 'replay' needs generator.script");
        if (c.generator_kind == "remote" && c.endpoint.empty())
            throw ConfigError(origin + ": generator.kind 'remote' needs generator.endpoint");
    }
    if (c.retry_limit < 1) throw ConfigError(origin + ": generator.retry_limit must be >= 1");

    if (c.depth < 1) throw ConfigError(origin + ": prover.depth must be >= 1");

    if (c.critiques.empty())
        throw ConfigError(origin + ": critique.names must not be empty");
    static const std::set<std::string> kCritiques = {"hard", "parsimony", "coherence",
                                                     "uncertainty"};
    for (const auto& name : c.critiques)
        if (!kCritiques.count(name))
            throw ConfigError(origin + ": unknown critique '" + name + "'");

    if (c.max_iterations < 1)
        throw ConfigError(origin + ": refine.max_iterations must be >= 1");
    if (c.retrieval_top_k < 0)
        throw ConfigError(origin + ": refine.retrieval_top_k must be >= 0");
    if (c.retrieval_top_k > 0 && c.kb_path.empty())
        throw ConfigError(origin + ": refine.retrieval_top_k needs kb.path");

    // Referenced inputs must exist now, not at first use.
    if (!c.kb_path.empty()) require_file(origin, "kb.path", c.kb_path);
    if (!c.training_path.empty()) require_file(origin, "retrieval.training", c.training_path);
    if (c.generator_kind == "replay" && !c.script_path.empty())
        require_file(origin, "generator.script", c.script_path);

    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string base = fs::path(path).parent_path().string();
    return from_toml(parse_toml(buf.str(), path), base, path);
}

std::unique_ptr<gen::GenerativeModel> make_generator(const PipelineConfig& config,
                                                     std::optional<int> seed) {
    if (config.generator_kind == "replay") {
        if (config.script_path.empty())
            throw ConfigError("generator.script is not configured");
        return std::make_unique<gen::ReplayModel>(gen::load_replay_script(config.script_path));
    }
    if (config.endpoint.empty())
        throw ConfigError("generator.endpoint is not configured");
    gen::RemoteConfig rc;
    rc.base_url = config.endpoint;
    rc.model = config.model_name;
    rc.retry_limit = config.retry_limit;
    rc.decoding.seed = seed;
    return std::make_unique<gen::RemoteModel>(std::move(rc));
}

refine::RefinementConfig make_refinement_config(const PipelineConfig& config) {
    refine::RefinementConfig rc;
    rc.max_iterations = config.max_iterations;
    rc.critiques = config.critiques;
    rc.stop_on_valid = config.stop_on_valid;
    rc.retrieval_top_k = config.retrieval_top_k;
    rc.hard.prove.max_depth = config.depth;
    if (!config.entailment_endpoint.empty())
        rc.entailment_scorer =
            std::make_shared<critique::RemoteEntailmentScorer>(config.entailment_endpoint);
    if (!config.hedging_endpoint.empty())
        rc.hedging_scorer =
            std::make_shared<critique::RemoteHedgingScorer>(config.hedging_endpoint);
    return rc;
}

}  // namespace peirce::config
