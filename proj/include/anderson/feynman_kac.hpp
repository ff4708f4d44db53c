#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anderson/potentials.hpp"

namespace anderson {

/// Batch of discrete Brownian paths on a shared time grid.
/// Positions are stored row-major as [path][step][axis]; increments are
/// i.i.d. N(0, dt I_d) drawn from per-path streams (stream_id = hash(seed, i)).
struct PathEnsemble {
    int d = 1;
    double t = 0.0;
    double dt = 0.0;
    std::int64_t m = 0;
    std::array<double, 3> start{0.0, 0.0, 0.0};
    std::uint64_t seed = 0;
    std::int64_t steps = 0;
    std::vector<double> positions;

    const double* path(std::int64_t i) const {
        return positions.data() + i * (steps + 1) * d;
    }
};

/// Default memory budget for an ensemble (bytes); sample_paths refuses to
/// allocate beyond it.
inline constexpr std::int64_t kEnsembleMemoryBudget = 2LL << 30;

PathEnsemble sample_paths(int d, double t, double dt, std::int64_t m,
                          std::array<double, 3> start, std::uint64_t seed,
                          std::int64_t memory_budget = kEnsembleMemoryBudget);

/// Trapezoidal time integral of the multilinearly interpolated field along
/// one path. Throws ExitError (with the first-exit step) if the path leaves
/// the field's box.
double potential_line_integral(const PathEnsemble& ensemble, std::int64_t path_index,
                               const FieldSample& field);

struct QuadratureSpec {
    int radial_panels = 16;    // Gauss-Legendre panels per radial sweep
    int angular_nodes = 48;    // trapezoid nodes for the d = 2 angular average
    int mc_samples = 8192;     // importance samples for d = 3
    double rel_tol = 5e-3;     // refinement agreement target
    int max_refine = 2;
    std::uint64_t mc_seed = 7777;
};

/// Filtered spectral formula for the conditional variance of the Brownian
/// time integral over one frozen path:
///   (2pi)^-d int |int_0^t e^{i lambda B_s} ds|^2 |F(l)(eps lambda)|^2 mu(dlambda).
double conditional_variance_spectral(const PathEnsemble& ensemble, std::int64_t path_index,
                                     const PotentialModel& model, double eps,
                                     const QuadratureSpec& spec = {});

struct MomentStats {
    double log_moment = 0.0;
    double growth_rate = 0.0;
    double standard_error = 0.0;
    double ess = 0.0;
    double surviving_fraction = 0.0;
};

/// log of the path average of exp(theta * I). With dirichlet = true, paths
/// are discarded at first exit (killed); with dirichlet = false the field is
/// extended by zero outside the box.
MomentStats quenched_moment(const FieldSample& field, double theta,
                            const PathEnsemble& ensemble, bool dirichlet);

struct AnnealedResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double z_score = 0.0;
    double se_lhs = 0.0;
    double se_rhs = 0.0;
};

struct AnnealedOptions {
    std::optional<GridSpec> grid; // default: auto-sized box
    double grid_h_over_eps = 0.25;
    unsigned threads = 1; // static field chunking; deterministic per thread count
};

/// Two-estimator check of the annealed identity
///   E (x) E_0 exp(theta Int V) = E_0 exp((theta^2/2) Int Int gamma_eps(B_u - B_v)).
/// lhs is a crossed (field x path) design with a two-way standard error;
/// rhs uses an independent path ensemble.
AnnealedResult annealed_consistency(const PotentialModel& model, double theta, double t,
                                    double dt, std::int64_t m_paths, std::int64_t m_fields,
                                    double eps, std::uint64_t seed,
                                    const AnnealedOptions& options = {});

struct SemigroupRow {
    double t = 0.0;
    double growth_rate = 0.0;
    double se = 0.0;
    double lambda = 0.0;
    double gap = 0.0;
    double ess = 0.0;
    double surviving_fraction = 0.0;
};

struct SemigroupOptions {
    double dt = 0.005;
    std::int64_t m = 100000;
    std::uint64_t seed = 99;
    double eig_tol = 1e-8;
};

/// Dirichlet Feynman-Kac growth rate against the principal eigenvalue on the
/// same frozen field, for each horizon in t_values.
std::vector<SemigroupRow> semigroup_consistency(const FieldSample& field, double theta,
                                                std::span<const double> t_values,
                                                const SemigroupOptions& options = {});

} // namespace anderson
