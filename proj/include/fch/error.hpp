#pragma once

#include <stdexcept>
#include <string>

namespace fch {

/// Error categories. The CLI maps these onto process exit codes, so new
/// categories must be added to the mapping in config.cpp as well.
enum class ErrorCode {
    invalid_domain,
    parameter,
    singular_evaluation,
    assembly_tolerance,
    numerical_failure,
    mean_zero_violation,
    truncation,
    alignment,
    unsupported_reduction,
    configuration,
    invariant_breach,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::invalid_domain: return "invalid_domain";
        case ErrorCode::parameter: return "parameter";
        case ErrorCode::singular_evaluation: return "singular_evaluation";
        case ErrorCode::assembly_tolerance: return "assembly_tolerance";
        case ErrorCode::numerical_failure: return "numerical_failure";
        case ErrorCode::mean_zero_violation: return "mean_zero_violation";
        case ErrorCode::truncation: return "truncation";
        case ErrorCode::alignment: return "alignment";
        case ErrorCode::unsupported_reduction: return "unsupported_reduction";
        case ErrorCode::configuration: return "configuration";
        case ErrorCode::invariant_breach: return "invariant_breach";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

}  // namespace fch
