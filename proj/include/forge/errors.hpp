#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forge {

// Base class for every error the library throws. The CLI maps subclasses to
// exit codes: usage/argument problems -> 1, backend problems -> 2,
// validation/parse problems -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Wrong arity, out-of-range parameter, empty input where content is required.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A record or value violates a schema invariant. The message names the field.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed serialized input. Carries the byte offset of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t byte_offset)
        : Error(message + " (byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// Non-transient backend failure. status == 0 means no HTTP status applies
// (e.g. the connection never completed).
class BackendError : public Error {
public:
    explicit BackendError(const std::string& message, int status = 0)
        : Error(message), status_(status) {}

    int status() const { return status_; }

private:
    int status_;
};

// Replay-mode cache lookup failed. Carries the missing prompt hash.
class ReplayMissError : public BackendError {
public:
    explicit ReplayMissError(const std::string& prompt_hash)
        : BackendError("replay miss: no cached completion for prompt hash " + prompt_hash),
          prompt_hash_(prompt_hash) {}

    const std::string& prompt_hash() const { return prompt_hash_; }

private:
    std::string prompt_hash_;
};

// Optimization diverged.
class TrainingError : public Error {
public:
    using Error::Error;
};

// A mathematical precondition failed (e.g. zero reference probability).
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace forge
