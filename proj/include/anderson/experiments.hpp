#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "anderson/eigensolver.hpp"
#include "anderson/potentials.hpp"
#include "anderson/result_table.hpp"
#include "anderson/variational.hpp"

namespace anderson {

/// Runs fn(i) for i in [0, count) on up to `threads` workers; results must be
/// written to disjoint slots (merging stays deterministic).
void parallel_for(std::int64_t count, unsigned threads,
                  const std::function<void(std::int64_t)>& fn);

double median(std::vector<double> values);

// --- synth-validate -----------------------------------------------------

struct SynthValidateOptions {
    std::int64_t replicates = 10000;
    std::uint64_t master_seed = 1;
};

/// Empirical covariance at the given node lags against the quadrature
/// target; columns: lag, target, estimate, se, z.
ResultTable run_synth_validate(const PotentialModel& model, const GridSpec& grid, double eps,
                               const std::vector<std::vector<std::int64_t>>& lags,
                               const SynthValidateOptions& options, unsigned threads);

// --- eig-scaling ----------------------------------------------------------

struct EigScalingOptions {
    double theta = 1.0;
    double eps = 0.5;
    double h_over_eps = 0.5; // grid spacing rule h <= eps * h_over_eps
    int replicates = 20;
    std::uint64_t master_seed = 1;
    double tol = 1e-8;
    int bootstrap = 200;
    std::optional<double> reference; // theta^{4/(4-a)} h(d,a); closed form if absent
};

struct EigScalingCell {
    double t = 0.0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::int64_t n = 0;
};

struct EigScalingResult {
    std::vector<EigScalingCell> cells;
    std::vector<double> t_values;
    std::vector<double> medians;
    std::vector<double> regressors; // (log t)^{2/(4-a)}
    double a_hat = 0.0; // slope of median lambda against (log t)^{2/(4-a)}
    double ci_lo = 0.0, ci_hi = 0.0;
    double reference = 0.0;
    double ratio = 0.0;
    bool medians_monotone = false;
};

EigScalingResult run_eig_scaling(const PotentialModel& model, std::span<const double> t_values,
                                 const EigScalingOptions& options, unsigned threads);

ResultTable eig_cells_table(const PotentialModel& model, const EigScalingOptions& options,
                            const EigScalingResult& result);
ResultTable eig_summary_table(const EigScalingResult& result);

// --- theta-scaling ----------------------------------------------------------

struct ThetaScalingResult {
    std::vector<double> thetas;
    std::vector<double> medians;
    double exponent = 0.0; // fitted log-log slope of median lambda vs theta
};

ThetaScalingResult run_theta_scaling(const PotentialModel& model, double t_fixed,
                                     std::span<const double> thetas,
                                     const EigScalingOptions& options, unsigned threads);

// --- variational constants --------------------------------------------------

struct ConstantsRow {
    std::string kernel_tag;
    int d = 0;
    double alpha_eff = 0.0;
    double theta = 0.0;
    double sigma = 0.0;
    double kappa = 0.0;
    double m_direct = 0.0;
    double m_closed = 0.0;
    double rel_gap = 0.0;
    double grid_r = 0.0;
    std::int64_t grid_n = 0;
};

struct VariationalOptions {
    int max_iter = 2000;
    double tol = 1e-10;
    int starts = 3;
};

ConstantsRow run_constants_row(const KernelSpec& kernel, const GridSpec& grid, double theta,
                               const VariationalOptions& options);

ResultTable constants_table(std::span<const ConstantsRow> rows);

// --- Gartner-Konig campaign ---------------------------------------------------

struct GapCampaignResult {
    std::vector<double> r_values;
    std::vector<double> median_scaled_gap; // median over seeds of r * gap(r)
    bool monotonicity_ok = false;          // lambda_sub <= lambda_full everywhere
    double worst_violation = 0.0;
};

GapCampaignResult run_gap_campaign(const PotentialModel& model, const GridSpec& grid,
                                   double eps, double theta, std::span<const double> r_values,
                                   int seeds, std::uint64_t master_seed, unsigned threads);

/// Moment CSV schema shared by the fk experiment and the CLI.
ResultTable fk_moment_table();

} // namespace anderson
