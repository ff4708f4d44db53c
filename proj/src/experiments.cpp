#include "anderson/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

#include "anderson/rng.hpp"
#include "anderson/variational.hpp"

namespace anderson {

void parallel_for(std::int64_t count, unsigned threads,
                  const std::function<void(std::int64_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(count));
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

double median(std::vector<double> values) {
    if (values.empty()) throw DomainError("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

ResultTable run_synth_validate(const PotentialModel& model, const GridSpec& grid, double eps,
                               const std::vector<std::vector<std::int64_t>>& lags,
                               const SynthValidateOptions& options, unsigned threads) {
    FieldSynthesizer synth(model, grid, eps);
    std::vector<FieldSample> samples(options.replicates);
    parallel_for(options.replicates, threads, [&](std::int64_t i) {
        samples[i] = synth.sample(stream_id(options.master_seed, i));
    });
    const auto estimates = empirical_covariance(samples, lags);

    ResultTable t;
    t.columns = {"lag", "target", "estimate", "se", "z"};
    t.add_meta("model", model.tag());
    t.add_meta("d", std::to_string(model.d));
    t.add_meta("eps", format_double(eps));
    t.add_meta("replicates", std::to_string(options.replicates));
    const double h = grid.spacing();
    for (const auto& est : estimates) {
        std::string lag_str;
        std::vector<double> lag_phys(est.lag.size());
        for (std::size_t a = 0; a < est.lag.size(); ++a) {
            lag_phys[a] = h * static_cast<double>(est.lag[a]);
            lag_str += (a ? ";" : "") + std::to_string(est.lag[a]);
        }
        const double target = synth.target_covariance(lag_phys);
        const double z = (est.estimate - target) /
                         std::max(est.standard_error, 1e-300);
        t.add_row({lag_str, format_double(target), format_double(est.estimate),
                   format_double(est.standard_error), format_double(z)});
    }
    return t;
}

namespace {

GridSpec scaling_grid(int d, double t_box, double eps, double h_over_eps) {
    const double target_h = eps * h_over_eps;
    const std::int64_t n =
        std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(2.0 * t_box / target_h)) - 1);
    return GridSpec(d, t_box, n);
}

// Least squares through the origin: y ~ a x.
double slope_through_origin(std::span<const double> x, std::span<const double> y) {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    return sxy / sxx;
}

} // namespace

EigScalingResult run_eig_scaling(const PotentialModel& model, std::span<const double> t_values,
                                 const EigScalingOptions& options, unsigned threads) {
    if (t_values.size() < 2) throw DomainError("run_eig_scaling: need at least two t values");
    for (std::size_t i = 1; i < t_values.size(); ++i)
        if (!(t_values[i] > t_values[i - 1]))
            throw DomainError("run_eig_scaling: t values must increase");
    if (options.replicates < 10)
        throw DomainError("run_eig_scaling: need at least 10 replicate seeds");

    EigScalingResult out;
    out.t_values.assign(t_values.begin(), t_values.end());
    const std::int64_t cells = static_cast<std::int64_t>(t_values.size()) * options.replicates;
    out.cells.resize(cells);

    // one synthesizer per t (shared spectrum across seeds)
    std::vector<std::unique_ptr<FieldSynthesizer>> synths(t_values.size());
    for (std::size_t ti = 0; ti < t_values.size(); ++ti) {
        synths[ti] = std::make_unique<FieldSynthesizer>(
            model, scaling_grid(model.d, t_values[ti], options.eps, options.h_over_eps),
            options.eps);
    }

    parallel_for(cells, threads, [&](std::int64_t c) {
        const std::size_t ti = static_cast<std::size_t>(c) / options.replicates;
        const int rep = static_cast<int>(c % options.replicates);
        const std::uint64_t seed =
            stream_id(options.master_seed, 7919 * ti + static_cast<std::uint64_t>(rep));
        const FieldSample field = synths[ti]->sample(seed);
        const EigenResult eig =
            principal_eigenvalue(DiscreteOperator(field, options.theta), options.tol);
        EigScalingCell& cell = out.cells[c];
        cell.t = t_values[ti];
        cell.seed = seed;
        cell.lambda = eig.lambda;
        cell.residual = eig.residual;
        cell.iterations = eig.iterations;
        cell.n = field.grid.n;
    });

    const double a = model.effective_alpha();
    const double expo = 2.0 / (4.0 - a);
    std::vector<double> xs(t_values.size());
    out.medians.resize(t_values.size());
    std::vector<std::vector<double>> per_t(t_values.size());
    for (std::int64_t c = 0; c < cells; ++c)
        per_t[static_cast<std::size_t>(c) / options.replicates].push_back(out.cells[c].lambda);
    for (std::size_t ti = 0; ti < t_values.size(); ++ti) {
        xs[ti] = std::pow(std::log(t_values[ti]), expo);
        out.medians[ti] = median(per_t[ti]);
    }
    out.regressors = xs;
    out.a_hat = slope_through_origin(xs, out.medians);

    out.medians_monotone = true;
    for (std::size_t ti = 1; ti < t_values.size(); ++ti)
        if (out.medians[ti] + 1e-12 < out.medians[ti - 1]) out.medians_monotone = false;

    // bootstrap over replicate seeds
    std::vector<double> boots(options.bootstrap);
    Rng rng(stream_id(options.master_seed, 0xb005));
    for (int b = 0; b < options.bootstrap; ++b) {
        std::vector<double> med(t_values.size());
        for (std::size_t ti = 0; ti < t_values.size(); ++ti) {
            std::vector<double> resampled(per_t[ti].size());
            for (auto& v : resampled)
                v = per_t[ti][static_cast<std::size_t>(rng.uniform() * per_t[ti].size())];
            med[ti] = median(resampled);
        }
        boots[b] = slope_through_origin(xs, med);
    }
    std::sort(boots.begin(), boots.end());
    out.ci_lo = boots[static_cast<std::size_t>(0.025 * options.bootstrap)];
    out.ci_hi = boots[static_cast<std::size_t>(0.975 * (options.bootstrap - 1))];

    out.reference = options.reference
                        ? *options.reference
                        : theorem_limit(model, options.theta, std::nullopt);
    out.ratio = out.a_hat / out.reference;
    return out;
}

ResultTable eig_cells_table(const PotentialModel& model, const EigScalingOptions& options,
                            const EigScalingResult& result) {
    ResultTable t;
    t.columns = {"model", "d", "R", "n", "eps", "seed", "theta", "lambda", "residual",
                 "iterations"};
    for (const auto& cell : result.cells) {
        t.add_row({model.tag(), std::to_string(model.d), format_double(cell.t),
                   std::to_string(cell.n), format_double(options.eps),
                   std::to_string(cell.seed), format_double(options.theta),
                   format_double(cell.lambda), format_double(cell.residual),
                   std::to_string(cell.iterations)});
    }
    return t;
}

ResultTable eig_summary_table(const EigScalingResult& result) {
    ResultTable t;
    t.columns = {"t", "median_lambda", "regressor", "a_hat", "ci_lo", "ci_hi", "reference",
                 "ratio"};
    for (std::size_t ti = 0; ti < result.t_values.size(); ++ti) {
        t.add_row({format_double(result.t_values[ti]), format_double(result.medians[ti]),
                   format_double(result.regressors[ti]), format_double(result.a_hat),
                   format_double(result.ci_lo), format_double(result.ci_hi),
                   format_double(result.reference), format_double(result.ratio)});
    }
    return t;
}

ThetaScalingResult run_theta_scaling(const PotentialModel& model, double t_fixed,
                                     std::span<const double> thetas,
                                     const EigScalingOptions& options, unsigned threads) {
    if (thetas.size() < 2) throw DomainError("run_theta_scaling: need >= 2 thetas");
    ThetaScalingResult out;
    out.thetas.assign(thetas.begin(), thetas.end());
    out.medians.resize(thetas.size());

    FieldSynthesizer synth(model, scaling_grid(model.d, t_fixed, options.eps,
                                               options.h_over_eps),
                           options.eps);
    const std::int64_t cells = static_cast<std::int64_t>(thetas.size()) * options.replicates;
    std::vector<double> lambdas(cells);
    parallel_for(cells, threads, [&](std::int64_t c) {
        const std::size_t ki = static_cast<std::size_t>(c) / options.replicates;
        const int rep = static_cast<int>(c % options.replicates);
        // same fields across thetas: seed depends only on the replicate
        const FieldSample field =
            synth.sample(stream_id(options.master_seed, static_cast<std::uint64_t>(rep)));
        lambdas[c] = principal_eigenvalue(DiscreteOperator(field, thetas[ki]), options.tol)
                         .lambda;
    });
    std::vector<double> lx, ly;
    for (std::size_t ki = 0; ki < thetas.size(); ++ki) {
        std::vector<double> v(lambdas.begin() + ki * options.replicates,
                              lambdas.begin() + (ki + 1) * options.replicates);
        out.medians[ki] = median(v);
        lx.push_back(std::log(thetas[ki]));
        ly.push_back(std::log(std::max(out.medians[ki], 1e-300)));
    }
    // ordinary least squares slope
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    out.exponent = sxy / sxx;
    return out;
}

ConstantsRow run_constants_row(const KernelSpec& kernel, const GridSpec& grid, double theta,
                               const VariationalOptions& options) {
    ConstantsRow row;
    row.kernel_tag = kernel.tag();
    row.d = grid.d;
    row.alpha_eff = kernel.effective_alpha();
    row.theta = theta;
    row.grid_r = grid.half_width;
    row.grid_n = grid.n;

    const VariationalSolution sig =
        maximize_sigma(kernel, grid, options.max_iter, options.tol, options.starts);
    row.sigma = sig.objective;
    const BridgeConstants bridge = bridge_constants(row.sigma, row.alpha_eff, theta);
    row.kappa = bridge.kappa;
    row.m_closed = bridge.m_closed;
    const VariationalSolution m =
        maximize_M(kernel, theta, grid, options.max_iter, options.tol, options.starts);
    row.m_direct = m.objective;
    row.rel_gap = std::abs(row.m_direct - row.m_closed) / std::abs(row.m_direct);
    return row;
}

ResultTable constants_table(std::span<const ConstantsRow> rows) {
    ResultTable t;
    t.columns = {"kernel", "d", "alpha_eff", "theta", "sigma", "kappa",
                 "M_direct", "M_closed", "rel_gap", "grid_R", "grid_n"};
    for (const auto& r : rows) {
        t.add_row({r.kernel_tag, std::to_string(r.d), format_double(r.alpha_eff),
                   format_double(r.theta), format_double(r.sigma), format_double(r.kappa),
                   format_double(r.m_direct), format_double(r.m_closed),
                   format_double(r.rel_gap), format_double(r.grid_r),
                   std::to_string(r.grid_n)});
    }
    return t;
}

GapCampaignResult run_gap_campaign(const PotentialModel& model, const GridSpec& grid,
                                   double eps, double theta, std::span<const double> r_values,
                                   int seeds, std::uint64_t master_seed, unsigned threads) {
    GapCampaignResult out;
    out.r_values.assign(r_values.begin(), r_values.end());
    FieldSynthesizer synth(model, grid, eps);

    std::vector<std::vector<double>> scaled(r_values.size());
    for (auto& v : scaled) v.resize(seeds);
    std::vector<double> violations(seeds, 0.0);

    parallel_for(seeds, threads, [&](std::int64_t s) {
        const FieldSample field = synth.sample(stream_id(master_seed, s));
        const auto rows = decomposition_gap(field, theta, r_values);
        double worst = 0.0;
        for (std::size_t ri = 0; ri < rows.size(); ++ri) {
            scaled[ri][s] = rows[ri].r * rows[ri].gap;
            worst = std::min(worst, rows[ri].gap); // gap < 0 would violate monotonicity
        }
        violations[s] = worst;
    });

    out.monotonicity_ok = true;
    for (double v : violations) {
        out.worst_violation = std::min(out.worst_violation, v);
        if (v < -1e-10) out.monotonicity_ok = false;
    }
    for (auto& v : scaled) out.median_scaled_gap.push_back(median(v));
    return out;
}

ResultTable fk_moment_table() {
    ResultTable t;
    t.columns = {"model", "d", "R", "n", "eps", "seed_field", "seed_paths", "theta",
                 "t", "dt", "m", "dirichlet", "log_moment", "growth_rate", "se", "ess",
                 "surviving_fraction"};
    return t;
}

} // namespace anderson
