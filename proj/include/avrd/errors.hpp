#pragma once

#include <stdexcept>
#include <string>

namespace avrd {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration discovered before any work starts: missing files,
// unknown backend ids, malformed registry entries, template problems.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Data violates a documented invariant (manifest checks, boundary asserts).
class ValidationError : public Error {
public:
    using Error::Error;
};

// A response or input file could not be parsed: malformed reasoning traces,
// unparseable scores or verdicts, broken JSONL lines.
class ParseError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure (unreadable media, unwritable output).
class IoError : public Error {
public:
    using Error::Error;
};

// Failure talking to an agent backend. The kind drives retry/abort decisions.
class AgentError : public Error {
public:
    enum class Kind {
        Transport,        // network-level failure or retryable server error
        Auth,             // missing or rejected credential
        Exhausted,        // retry budget spent
        Refused,          // backend refused the request (non-retryable 4xx)
        ScriptExhausted,  // mock backend ran out of scripted responses
    };

    AgentError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

const char* to_string(AgentError::Kind kind);

}  // namespace avrd
