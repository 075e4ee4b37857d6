#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mfvol {

/// Failure categories. Every error carries the module and rule that failed so
/// the CLI can report them verbatim.
enum class Errc {
    invalid_order,
    invalid_cutoff,
    asymmetry,
    instability,
    constraint_violation,
    degenerate_weights,
    insufficient_history,
    parameter,
    data,
    misalignment,
    empty_cross_section,
    empty_score,
    load,
    look_ahead,
    undefined_metric,
    config,
    io,
};

inline std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::invalid_order: return "invalid-order";
        case Errc::invalid_cutoff: return "invalid-cutoff";
        case Errc::asymmetry: return "asymmetry";
        case Errc::instability: return "instability";
        case Errc::constraint_violation: return "constraint-violation";
        case Errc::degenerate_weights: return "degenerate-weights";
        case Errc::insufficient_history: return "insufficient-history";
        case Errc::parameter: return "parameter";
        case Errc::data: return "data";
        case Errc::misalignment: return "misalignment";
        case Errc::empty_cross_section: return "empty-cross-section";
        case Errc::empty_score: return "empty-score";
        case Errc::load: return "load";
        case Errc::look_ahead: return "look-ahead";
        case Errc::undefined_metric: return "undefined-metric";
        case Errc::config: return "config";
        case Errc::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string module, const std::string& message)
        : std::runtime_error(module + ": " + std::string(to_string(code)) + ": " + message),
          code_(code),
          module_(std::move(module)) {}

    Errc code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }

private:
    Errc code_;
    std::string module_;
};

/// First offending lag of a weight sequence that breaks positivity or
/// summability.
struct WeightViolation {
    std::size_t lag = 0;  // 1-based; 0 when the violation is about the sum
    double value = 0.0;
    std::string rule;     // "negative-weight" | "sum-not-below-one"
};

inline std::string describe(const WeightViolation& v) {
    if (v.rule == "negative-weight") {
        return "first negative weight at lag " + std::to_string(v.lag) + " (value " +
               std::to_string(v.value) + ")";
    }
    return "weight sum " + std::to_string(v.value) + " is not below 1";
}

class ConstraintViolationError : public Error {
public:
    explicit ConstraintViolationError(WeightViolation report)
        : Error(Errc::constraint_violation, "state_space", describe(report)),
          report_(std::move(report)) {}

    const WeightViolation& report() const noexcept { return report_; }

private:
    WeightViolation report_;
};

}  // namespace mfvol
