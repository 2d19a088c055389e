#ifndef SPAPPROX_ERROR_HPP
#define SPAPPROX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace spapprox {

enum class errc {
    non_decaying_system,
    zero_entry,
    budget_exceeded,
    overflow,
    zero_divisor,
    divergent_tail,
    no_finite_sup,
    non_monotone_system,
    unsupported_family,
    quadrature_failure,
    slow_convergence,
    support_violation,
    root_bracket_failure,
    branch_precondition_failed,
    regime_mismatch,
    parameter_out_of_range,
    invalid_descriptor
};

inline const char* errc_name(errc e)
{
    switch (e) {
    case errc::non_decaying_system: return "NonDecayingSystem";
    case errc::zero_entry: return "ZeroEntry";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::overflow: return "Overflow";
    case errc::zero_divisor: return "ZeroDivisor";
    case errc::divergent_tail: return "DivergentTail";
    case errc::no_finite_sup: return "NoFiniteSup";
    case errc::non_monotone_system: return "NonMonotoneSystem";
    case errc::unsupported_family: return "UnsupportedFamily";
    case errc::quadrature_failure: return "QuadratureFailure";
    case errc::slow_convergence: return "SlowConvergence";
    case errc::support_violation: return "SupportViolation";
    case errc::root_bracket_failure: return "RootBracketFailure";
    case errc::branch_precondition_failed: return "BranchPreconditionFailed";
    case errc::regime_mismatch: return "RegimeMismatch";
    case errc::parameter_out_of_range: return "ParameterOutOfRange";
    case errc::invalid_descriptor: return "InvalidDescriptor";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    errc code() const noexcept { return code_; }
    const char* name() const noexcept { return errc_name(code_); }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what)
{
    throw error(code, what);
}

} // namespace spapprox

#endif // SPAPPROX_ERROR_HPP
