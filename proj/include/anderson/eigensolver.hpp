#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anderson/grid.hpp"
#include "anderson/potentials.hpp"

namespace anderson {

/// Matrix-free discretization of (1/2) Delta + theta V with Dirichlet
/// exterior, optionally restricted to a sub-box of the grid (nodes outside
/// the mask are Dirichlet exterior too).
class DiscreteOperator {
public:
    DiscreteOperator(const FieldSample& field, double theta);
    DiscreteOperator(const FieldSample& field, double theta, const BoxMask& mask);

    /// out = (1/2) Delta_h in + theta V .* in on the masked region; entries
    /// outside the mask are set to zero.
    void apply(std::span<const double> in, std::span<double> out) const;

    std::int64_t size() const { return grid_.total_nodes(); }
    std::int64_t active_nodes() const { return mask_.node_count(grid_.d); }
    const GridSpec& grid() const { return grid_; }
    const BoxMask& mask() const { return mask_; }
    double theta() const { return theta_; }

private:
    GridSpec grid_;
    double theta_;
    std::vector<double> potential_;
    BoxMask mask_;
};

DiscreteOperator assemble(const FieldSample& field, double theta);

struct EigenResult {
    double lambda = 0.0;
    std::vector<double> eigenfunction; // h-weighted L2 norm 1, nonnegative
    int iterations = 0;
    double residual = 0.0;
};

/// Largest eigenvalue of the operator by Lanczos iteration with full
/// reorthogonalization (restarted); throws ConvergenceError carrying the
/// best Rayleigh estimate if max_iter operator applies are exhausted.
EigenResult principal_eigenvalue(const DiscreteOperator& op, double tol = 1e-8,
                                 int max_iter = 20000);

/// <A g, g> / <g, g>; throws DomainError on the zero vector.
double rayleigh_quotient(const DiscreteOperator& op, std::span<const double> g);

struct GapRow {
    double r = 0.0;
    double lambda_full = 0.0;
    double lambda_submax = 0.0;
    double gap = 0.0;
};

/// Gartner-Konig decomposition diagnostic: for each r, the principal
/// eigenvalue over Q_R against the max over sub-boxes z + Q_{r+1},
/// z in 2rZ^d ∩ Q_R, all on the parent grid.
std::vector<GapRow> decomposition_gap(const FieldSample& field, double theta,
                                      std::span<const double> r_values, double tol = 1e-8);

} // namespace anderson
