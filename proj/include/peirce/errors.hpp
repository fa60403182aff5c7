#pragma once
// Error hierarchy shared by all modules. Every error carries a category that
// maps 1:1 onto the CLI exit codes (config=2, data=3, remote=4).

#include <stdexcept>
#include <string>

namespace peirce {

enum class ErrorCategory { config = 2, data = 3, remote = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string message)
        : std::runtime_error(std::move(message)), category_(category) {}
    ErrorCategory category() const { return category_; }
    int exit_code() const { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(ErrorCategory::config, msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

class RemoteError : public Error {
public:
    explicit RemoteError(const std::string& msg) : Error(ErrorCategory::remote, msg) {}
};

// ---- kb ----

struct FileMissingError : DataError {
    explicit FileMissingError(const std::string& path)
        : DataError("file missing: " + path) {}
};

struct MalformedRecordError : DataError {
    MalformedRecordError(size_t line, const std::string& reason)
        : DataError("malformed record at line " + std::to_string(line) + ": " + reason),
          line(line), reason(reason) {}
    size_t line;
    std::string reason;
};

struct DanglingPremiseError : DataError {
    DanglingPremiseError(const std::string& statement_id, const std::string& premise_id)
        : DataError("statement '" + statement_id + "' references unknown premise '" +
                    premise_id + "'"),
          statement_id(statement_id), premise_id(premise_id) {}
    std::string statement_id;
    std::string premise_id;
};

struct PremiseCycleError : DataError {
    explicit PremiseCycleError(const std::string& chain)
        : DataError("premise cycle: " + chain), chain(chain) {}
    std::string chain;
};

struct UnknownIdError : DataError {
    explicit UnknownIdError(const std::string& id)
        : DataError("unknown statement id: " + id), id(id) {}
    std::string id;
};

// ---- retrieval ----

struct EmptyIndexError : DataError {
    EmptyIndexError() : DataError("retrieval index is empty") {}
};

struct UnfittedModelError : DataError {
    UnfittedModelError() : DataError("retrieval model queried before fit") {}
};

struct EmptyTrainingSetError : DataError {
    EmptyTrainingSetError() : DataError("unification model fitted on an empty training set") {}
};

struct LengthMismatchError : DataError {
    LengthMismatchError(size_t models, size_t weights)
        : DataError("ensemble has " + std::to_string(models) + " models but " +
                    std::to_string(weights) + " weights") {}
};

struct AllZeroWeightsError : DataError {
    AllZeroWeightsError() : DataError("ensemble weights are all zero") {}
};

struct MissingGoldError : DataError {
    explicit MissingGoldError(const std::string& query_id)
        : DataError("no gold entry for query: " + query_id), query_id(query_id) {}
    std::string query_id;
};

struct EmptyGoldError : DataError {
    explicit EmptyGoldError(const std::string& query_id)
        : DataError("empty gold set for query: " + query_id), query_id(query_id) {}
    std::string query_id;
};

// ---- generation ----

struct MissingVariableError : DataError {
    explicit MissingVariableError(const std::string& name)
        : DataError("no binding for template variable {" + name + "}"), name(name) {}
    std::string name;
};

struct UnknownVariableError : DataError {
    explicit UnknownVariableError(const std::string& name)
        : DataError("binding '" + name + "' names no template placeholder"), name(name) {}
    std::string name;
};

struct TransportError : RemoteError {
    TransportError(int status, const std::string& body_excerpt, int attempts)
        : RemoteError("transport failure (status " + std::to_string(status) + ") after " +
                      std::to_string(attempts) + " attempt(s): " + body_excerpt),
          status(status), body_excerpt(body_excerpt), attempts(attempts) {}
    int status;  // 0 when the connection itself failed
    std::string body_excerpt;
    int attempts;
};

struct EmptyResponseError : DataError {
    explicit EmptyResponseError(const std::string& detail)
        : DataError("empty generation response: " + detail) {}
};

struct ScriptExhaustedError : DataError {
    explicit ScriptExhaustedError(const std::string& key)
        : DataError("replay script exhausted for key: " + key), key(key) {}
    std::string key;
};

// ---- logic ----

struct TheorySyntaxError : DataError {
    TheorySyntaxError(size_t line, size_t column, const std::string& expected)
        : DataError("syntax error at " + std::to_string(line) + ":" + std::to_string(column) +
                    ": expected " + expected),
          line(line), column(column), expected(expected) {}
    size_t line;
    size_t column;
    std::string expected;
};

struct ArityConflictError : DataError {
    ArityConflictError(const std::string& predicate, size_t seen, size_t now)
        : DataError("predicate '" + predicate + "' used with arities " + std::to_string(seen) +
                    " and " + std::to_string(now)),
          predicate(predicate), arity_seen(seen), arity_now(now) {}
    std::string predicate;
    size_t arity_seen;
    size_t arity_now;
};

// ---- prover ----

struct NoGoalError : DataError {
    NoGoalError() : DataError("theory has no goal") {}
};

struct DepthLimitNonPositiveError : DataError {
    DepthLimitNonPositiveError() : DataError("max_depth must be positive") {}
};

struct BaseTooLargeError : DataError {
    explicit BaseTooLargeError(size_t size)
        : DataError("Herbrand base too large: " + std::to_string(size) + " ground atoms") {}
};

struct UnknownLabelError : DataError {
    explicit UnknownLabelError(const std::string& label)
        : DataError("proof step cites unknown clause label: " + label), label(label) {}
    std::string label;
};

// ---- critiques ----

struct FormalisationFailedError : DataError {
    FormalisationFailedError(const std::string& last_error, int attempts)
        : DataError("formalisation failed after " + std::to_string(attempts) +
                    " attempt(s): " + last_error),
          last_error(last_error), attempts(attempts) {}
    std::string last_error;
    int attempts;
};

struct ScorerUnavailableError : RemoteError {
    explicit ScorerUnavailableError(const std::string& detail)
        : RemoteError("remote scorer unavailable: " + detail) {}
};

struct TooFewCandidatesError : DataError {
    explicit TooFewCandidatesError(size_t n)
        : DataError("IBE needs at least 2 candidates, got " + std::to_string(n)) {}
};

}  // namespace peirce
