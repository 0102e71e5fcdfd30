#pragma once

#include <stdexcept>
#include <string>

namespace thinlevy {

// Every failure carries the module that raised it; the CLI maps these to exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

struct DomainError : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };
struct BracketError : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct EffectiveSampleError : Error { using Error::Error; };

// Bad user input detected before any computation starts.
struct ValidationError : Error { using Error::Error; };

} // namespace thinlevy
