/// @file errors.hpp
/// @brief Error type shared by every module.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace jury {

/// All harness failures carry a stable machine-readable code ("SpecError",
/// "ParseError", ...) next to the human-readable message. The CLI surfaces
/// the code in its JSON error output; tests assert on it.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

inline Error spec_error(const std::string& msg) { return Error("SpecError", msg); }
inline Error config_error(const std::string& msg) { return Error("ConfigError", msg); }

}  // namespace jury
