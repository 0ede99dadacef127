#pragma once

#include <stdexcept>
#include <string>

namespace icleval {

// Failure categories; the CLI maps these to distinct exit codes.
enum class ErrorCategory {
    config,    // bad flags, unresolved ids, invalid parameter ranges
    data,      // malformed corpus files, referential integrity, scale violations
    network,   // transport/HTTP failures after retries
    parse,     // unusable model responses
    budget,    // prompt does not fit the context window
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorCategory::config, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorCategory::data, msg); }
[[noreturn]] inline void throw_network(const std::string& msg) { throw Error(ErrorCategory::network, msg); }
[[noreturn]] inline void throw_parse(const std::string& msg) { throw Error(ErrorCategory::parse, msg); }
[[noreturn]] inline void throw_budget(const std::string& msg) { throw Error(ErrorCategory::budget, msg); }

inline const char* to_string(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::data: return "data";
    case ErrorCategory::network: return "network";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::budget: return "budget";
    case ErrorCategory::internal: return "internal";
    }
    return "internal";
}

}  // namespace icleval
