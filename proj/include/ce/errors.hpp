#pragma once
// Exception hierarchy shared across the library.

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ce {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed textual input (N-Triples, templates, cassettes). Positions are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line(line),
          column(column) {}
    std::size_t line;
    std::size_t column;
};

// Invalid configuration; carries every violation found, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error(join(violations)), violations(std::move(violations)) {}
    explicit ConfigError(const std::string& msg) : Error(msg), violations{msg} {}
    std::vector<std::string> violations;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }
};

// Transient failure; with_retries() retries these.
class RetryableError : public Error {
public:
    using Error::Error;
    std::optional<std::chrono::milliseconds> advised_delay;
};

class NetworkError : public RetryableError {
public:
    using RetryableError::RetryableError;
};

class RateLimitError : public RetryableError {
public:
    using RetryableError::RetryableError;
};

// Non-retryable HTTP failure (4xx other than 401/403/408/429).
class HttpStatusError : public Error {
public:
    HttpStatusError(const std::string& msg, int status)
        : Error(msg + " (HTTP " + std::to_string(status) + ")"), status(status) {}
    int status;
};

// Never retried.
class AuthError : public Error {
public:
    using Error::Error;
};

class ReplayMissError : public Error {
public:
    explicit ReplayMissError(const std::string& digest)
        : Error("replay backend has no entry for digest " + digest), digest(digest) {}
    std::string digest;
};

class CassetteError : public Error {
public:
    CassetteError(const std::string& msg, std::size_t entry_index)
        : Error(msg + " (cassette entry " + std::to_string(entry_index) + ")"),
          entry_index(entry_index) {}
    std::size_t entry_index;
};

class MissingPageError : public Error {
public:
    using Error::Error;
};

class UnboundTokenError : public Error {
public:
    explicit UnboundTokenError(std::vector<std::string> tokens)
        : Error(message(tokens)), tokens(std::move(tokens)) {}
    std::vector<std::string> tokens;

private:
    static std::string message(const std::vector<std::string>& t) {
        std::string out = "substitution does not bind template token(s):";
        for (const auto& s : t) out += " {" + s + "}";
        return out;
    }
};

class SubstitutionError : public Error {
public:
    using Error::Error;
};

// Stage-2 answer stayed unparseable through all re-asks.
class AnswerUnparseableError : public Error {
public:
    AnswerUnparseableError(const std::string& entity_id, int attempts, const std::string& last_raw)
        : Error("answer for " + entity_id + " unparseable after " + std::to_string(attempts) +
                " attempt(s); last answer: \"" + last_raw + "\""),
          entity_id(entity_id),
          attempts(attempts),
          last_raw(last_raw) {}
    std::string entity_id;
    int attempts;
    std::string last_raw;
};

// Evaluation run exceeded the classification-error threshold.
class EvalAbortedError : public Error {
public:
    using Error::Error;
};

// Persisted document does not match the expected schema; carries the field path.
class SchemaError : public Error {
public:
    SchemaError(const std::string& msg, const std::string& field_path)
        : Error(msg + " (at " + field_path + ")"), field_path(field_path) {}
    std::string field_path;
};

class AnnotationError : public Error {
public:
    explicit AnnotationError(std::vector<std::string> problems)
        : Error(join(problems)), problems(std::move(problems)) {}
    std::vector<std::string> problems;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "annotation merge failed:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }
};

}  // namespace ce
