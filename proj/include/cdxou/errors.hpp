#pragma once

#include <stdexcept>
#include <string>

namespace cdxou {

// Thrown when a transform argument lands on (or crosses) the principal
// branch cut of one of the nested logarithms. Signals inadmissible
// parameters rather than a recoverable numerical condition.
struct admissibility_error : std::domain_error {
    explicit admissibility_error(const std::string& what)
        : std::domain_error(what) {}
};

// Quadrature / solver failure. Carries the error estimate actually achieved.
struct numerical_error : std::runtime_error {
    numerical_error(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
          achieved_error(achieved) {}
    explicit numerical_error(const std::string& what)
        : std::runtime_error(what), achieved_error(0.0) {}
    double achieved_error;
};

// Market-implied extraction failed (no parity root, nonpositive payer
// extrapolation, nonpositive variance, ...).
struct extraction_error : std::runtime_error {
    explicit extraction_error(const std::string& what)
        : std::runtime_error(what) {}
};

// Annuity denominator vanished; the par spread is undefined.
struct degenerate_annuity_error : std::runtime_error {
    explicit degenerate_annuity_error(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace cdxou
