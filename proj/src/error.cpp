#include "crtlab/error.hpp"

namespace crt {

const char* category_name(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::invalid_parameter: return "invalid-parameter";
    case ErrorCategory::data: return "data-error";
    case ErrorCategory::envelope_failure: return "envelope-failure";
    case ErrorCategory::resource_guard: return "resource-guard";
    case ErrorCategory::io: return "io-error";
    case ErrorCategory::unknown_experiment: return "unknown-experiment";
    case ErrorCategory::validation_gate: return "validation-gate";
    }
    return "error";
}

int exit_code(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::invalid_parameter: return 3;
    case ErrorCategory::data: return 4;
    case ErrorCategory::envelope_failure: return 5;
    case ErrorCategory::resource_guard: return 6;
    case ErrorCategory::io: return 7;
    case ErrorCategory::unknown_experiment: return 8;
    case ErrorCategory::validation_gate: return 9;
    }
    return 1;
}

}  // namespace crt
