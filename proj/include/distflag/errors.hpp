#pragma once

#include <stdexcept>
#include <string>

namespace distflag {

// Error classes map onto the CLI exit-code contract:
//   input -> 2, math -> 1, certify -> 3.
enum class ErrorClass { input, math, certify };

class EngineError : public std::runtime_error {
public:
    EngineError(ErrorClass cls, std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), cls_(cls), kind_(std::move(kind)) {}

    ErrorClass cls() const { return cls_; }
    const std::string& kind() const { return kind_; }

private:
    ErrorClass cls_;
    std::string kind_;
};

[[noreturn]] inline void input_error(const std::string& kind, const std::string& msg) {
    throw EngineError(ErrorClass::input, kind, msg);
}
[[noreturn]] inline void math_error(const std::string& kind, const std::string& msg) {
    throw EngineError(ErrorClass::math, kind, msg);
}
[[noreturn]] inline void certify_error(const std::string& kind, const std::string& msg) {
    throw EngineError(ErrorClass::certify, kind, msg);
}

// DomainError is thrown by evaluation and routinely caught by the sampler,
// which resamples the offending point. Kept separate from EngineError so a
// stray DomainError cannot be mistaken for a final verdict.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace distflag
