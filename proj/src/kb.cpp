#include "peirce/kb.hpp"

#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

#include "peirce/errors.hpp"
#include "peirce/io.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace peirce::kb {

std::string NLIProblem::full_text() const {
    std::string out;
    if (premise) out += *premise;
    if (!out.empty() && !hypothesis.empty()) out += " ";
    out += hypothesis;
    for (const auto& c : candidates) {
        out += " ";
        out += c;
    }
    return out;
}

KnowledgeBase::KnowledgeBase(std::string name, std::vector<Statement> statements)
    : name_(std::move(name)), statements_(std::move(statements)) {
    for (size_t i = 0; i < statements_.size(); ++i) index_[statements_[i].id] = i;
}

const Statement& KnowledgeBase::get(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownIdError(id);
    return statements_[it->second];
}

namespace {

std::string get_string(const json& j, const char* key, size_t line) {
    if (!j.contains(key)) throw MalformedRecordError(line, std::string("missing key '") + key + "'");
    if (!j[key].is_string()) throw MalformedRecordError(line, std::string("key '") + key + "' is not a string");
    return j[key].get<std::string>();
}

std::vector<std::string> get_string_list(const json& j, const char* key, size_t line) {
    if (!j.contains(key)) return {};
    if (!j[key].is_array()) throw MalformedRecordError(line, std::string("key '") + key + "' is not an array");
    std::vector<std::string> out;
    for (const auto& v : j[key]) {
        if (!v.is_string()) throw MalformedRecordError(line, std::string("key '") + key + "' has a non-string entry");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::map<std::string, std::string> get_string_map(const json& j, const char* key, size_t line) {
    if (!j.contains(key)) return {};
    if (!j[key].is_object()) throw MalformedRecordError(line, std::string("key '") + key + "' is not an object");
    std::map<std::string, std::string> out;
    for (auto it = j[key].begin(); it != j[key].end(); ++it) {
        if (!it.value().is_string()) throw MalformedRecordError(line, std::string("key '") + key + "' has a non-string value");
        out[it.key()] = it.value().get<std::string>();
    }
    return out;
}

// DFS cycle check over premise links; throws PremiseCycle with the id chain.
void check_acyclic(const std::vector<Statement>& statements,
                   const std::unordered_map<std::string, size_t>& index) {
    enum class Mark { unseen, active, done };
    std::vector<Mark> marks(statements.size(), Mark::unseen);
    std::vector<std::string> chain;

    struct Frame {
        size_t node;
        size_t next_child = 0;
    };
    for (size_t root = 0; root < statements.size(); ++root) {
        if (marks[root] != Mark::unseen) continue;
        std::vector<Frame> stack{{root}};
        marks[root] = Mark::active;
        chain = {statements[root].id};
        while (!stack.empty()) {
            Frame& f = stack.back();
            const Statement& s = statements[f.node];
            if (f.next_child == s.premise_ids.size()) {
                marks[f.node] = Mark::done;
                stack.pop_back();
                chain.pop_back();
                continue;
            }
            size_t child = index.at(s.premise_ids[f.next_child++]);
            if (marks[child] == Mark::active) {
                std::string msg;
                for (const auto& id : chain) msg += id + " -> ";
                msg += statements[child].id;
                throw PremiseCycleError(msg);
            }
            if (marks[child] == Mark::unseen) {
                marks[child] = Mark::active;
                chain.push_back(statements[child].id);
                stack.push_back({child});
            }
        }
    }
}

}  // namespace

KnowledgeBase load_kb(const std::string& path, const std::string& format,
                      std::vector<std::string>* warnings) {
    if (format != "jsonl-v1") throw DataError("unknown corpus format: " + format);

    std::vector<Statement> statements;
    std::unordered_map<std::string, size_t> index;
    for (const auto& [line_no, line] : io::read_lines(path)) {
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw MalformedRecordError(line_no, e.what());
        }
        if (!j.is_object()) throw MalformedRecordError(line_no, "record is not a JSON object");
        Statement s;
        s.id = get_string(j, "id", line_no);
        s.surface = get_string(j, "surface", line_no);
        s.entities = get_string_list(j, "entities", line_no);
        s.premise_ids = get_string_list(j, "premise_ids", line_no);
        s.annotations = get_string_map(j, "annotations", line_no);
        if (index.count(s.id)) throw MalformedRecordError(line_no, "duplicate id '" + s.id + "'");
        index[s.id] = statements.size();
        statements.push_back(std::move(s));
    }

    for (const auto& s : statements)
        for (const auto& p : s.premise_ids)
            if (!index.count(p)) throw DanglingPremiseError(s.id, p);

    check_acyclic(statements, index);

    if (warnings) {
        for (const auto& s : statements) {
            auto split = s.annotations.find("split");
            if (split == s.annotations.end()) continue;
            for (const auto& p : s.premise_ids) {
                const auto& ps = statements[index.at(p)];
                auto psplit = ps.annotations.find("split");
                if (psplit != ps.annotations.end() && psplit->second != split->second)
                    warnings->push_back("statement '" + s.id + "' (split " + split->second +
                                        ") links premise '" + p + "' (split " + psplit->second + ")");
            }
        }
    }

    return KnowledgeBase(std::filesystem::path(path).stem().string(), std::move(statements));
}

std::string save_kb(const KnowledgeBase& kb) {
    std::string out;
    for (const auto& s : kb.statements()) {
        ordered_json j;
        j["id"] = s.id;
        j["surface"] = s.surface;
        j["entities"] = s.entities;
        j["premise_ids"] = s.premise_ids;
        ordered_json ann = ordered_json::object();
        for (const auto& [k, v] : s.annotations) ann[k] = v;  // std::map is sorted
        j["annotations"] = std::move(ann);
        out += j.dump();
        out += "\n";
    }
    return out;
}

std::vector<Statement> filter_statements(const KnowledgeBase& kb, const std::string& key,
                                         const std::string& value) {
    std::vector<Statement> out;
    for (const auto& s : kb.statements()) {
        auto it = s.annotations.find(key);
        if (it != s.annotations.end() && it->second == value) out.push_back(s);
    }
    return out;
}

std::vector<Statement> explanation_of(const KnowledgeBase& kb, const std::string& id) {
    const Statement& s = kb.get(id);
    std::vector<Statement> out;
    out.reserve(s.premise_ids.size());
    for (const auto& p : s.premise_ids) out.push_back(kb.get(p));
    return out;
}

std::vector<ProblemRecord> load_problems(const std::string& path) {
    std::vector<ProblemRecord> out;
    for (const auto& [line_no, line] : io::read_lines(path)) {
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw MalformedRecordError(line_no, e.what());
        }
        if (!j.is_object()) throw MalformedRecordError(line_no, "record is not a JSON object");
        ProblemRecord rec;
        rec.problem.id = get_string(j, "id", line_no);
        rec.problem.hypothesis = get_string(j, "hypothesis", line_no);
        if (rec.problem.hypothesis.empty()) throw MalformedRecordError(line_no, "empty hypothesis");
        if (j.contains("premise")) rec.problem.premise = get_string(j, "premise", line_no);
        rec.problem.candidates = get_string_list(j, "candidates", line_no);
        if (!rec.problem.candidates.empty() && rec.problem.candidates.size() < 2)
            throw MalformedRecordError(line_no, "candidates present but fewer than two");
        rec.problem.gold_premise_ids = get_string_list(j, "gold_premise_ids", line_no);
        rec.problem.annotations = get_string_map(j, "annotations", line_no);
        if (j.contains("initial_explanation"))
            rec.initial_explanation = get_string(j, "initial_explanation", line_no);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace peirce::kb
