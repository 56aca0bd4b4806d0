#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbdx {

enum class ErrorKind {
    invalid_argument,
    degenerate_prior,      // every raw prior evaluated to zero
    inconsistent_evidence, // every posterior numerator is zero
    not_caused,            // symptom is not in the disease tree
    configuration,         // missing utility entry and similar KB gaps
    undefined_fit,         // regression design matrix is rank deficient
    oracle_too_large,      // enumeration guard exceeded
    unresolved_reference,
};

inline std::string_view to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::degenerate_prior: return "degenerate-prior";
    case ErrorKind::inconsistent_evidence: return "inconsistent-evidence";
    case ErrorKind::not_caused: return "not-caused";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::undefined_fit: return "undefined-fit";
    case ErrorKind::oracle_too_large: return "oracle-too-large";
    case ErrorKind::unresolved_reference: return "unresolved-reference";
    }
    return "unknown";
}

// Domain error raised by the engine. The kind lets callers map failures to
// exit codes and HTTP statuses without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace cbdx
