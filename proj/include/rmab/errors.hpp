#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmab {

/// Parameter or precondition violation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Value iteration hit its iteration cap.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(std::size_t iterations, double residual)
        : std::runtime_error("value iteration did not converge after " + std::to_string(iterations)
                             + " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

/// Q(s,1) - Q(s,0) keeps one sign over the whole lambda search interval.
class BracketError : public std::runtime_error {
public:
    BracketError(double lambda_lo, double delta_lo, double lambda_hi, double delta_hi)
        : std::runtime_error("no sign change of Q(s,1)-Q(s,0) on [" + std::to_string(lambda_lo) + ", "
                             + std::to_string(lambda_hi) + "]: delta(lo)=" + std::to_string(delta_lo)
                             + ", delta(hi)=" + std::to_string(delta_hi)),
          delta_lo_(delta_lo), delta_hi_(delta_hi) {}

    double delta_lo() const noexcept { return delta_lo_; }
    double delta_hi() const noexcept { return delta_hi_; }

private:
    double delta_lo_;
    double delta_hi_;
};

/// An observed transition contradicts the declared structural zeros.
class PriorViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rmab
