#pragma once

#include <stdexcept>
#include <string>

namespace anderson {

/// Invalid parameters, grids or configuration values.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Iterative procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best, double residual)
        : std::runtime_error(what), best_estimate(best), residual(residual) {}
    double best_estimate;
    double residual;
};

/// Circulant embedding produced unacceptable negative spectral mass.
class EmbeddingError : public std::runtime_error {
public:
    EmbeddingError(const std::string& what, double most_negative, int padding)
        : std::runtime_error(what), most_negative(most_negative), padding_factor(padding) {}
    double most_negative;
    int padding_factor;
};

/// A Brownian path left the field's box before the horizon.
class ExitError : public std::runtime_error {
public:
    ExitError(const std::string& what, std::size_t step, double tau)
        : std::runtime_error(what), exit_step(step), tau_estimate(tau) {}
    std::size_t exit_step;
    double tau_estimate;
};

} // namespace anderson
