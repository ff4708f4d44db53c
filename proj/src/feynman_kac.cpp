#include "anderson/feynman_kac.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <thread>

#include "anderson/eigensolver.hpp"
#include "anderson/grid_ops.hpp"
#include "anderson/mollifier.hpp"
#include "anderson/quadrature.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

double trapezoid_weight(std::int64_t k, std::int64_t steps, double dt) {
    return (k == 0 || k == steps) ? 0.5 * dt : dt;
}

// log of the mean of exp(x_j) over count entries (absent entries are zero
// contributions), with max-shift; also effective sample size and the delta
// method standard error of the log.
struct ExpAverage {
    double log_mean = 0.0;
    double se_log = 0.0;
    double ess = 0.0;
};

ExpAverage exp_average(std::span<const double> exponents, std::int64_t denominator) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double e : exponents) mx = std::max(mx, e);
    double s1 = 0.0, s2 = 0.0;
    for (double e : exponents) {
        const double w = std::exp(e - mx);
        s1 += w;
        s2 += w * w;
    }
    ExpAverage out;
    out.log_mean = mx + std::log(s1 / static_cast<double>(denominator));
    out.ess = s1 * s1 / s2;
    // sd of contributions over the full denominator (killed paths are zeros)
    const double n = static_cast<double>(denominator);
    const double mean_w = s1 / n;
    const double var_w = std::max(0.0, s2 / n - mean_w * mean_w) * n / std::max(1.0, n - 1.0);
    out.se_log = std::sqrt(var_w / n) / mean_w;
    return out;
}

} // namespace

PathEnsemble sample_paths(int d, double t, double dt, std::int64_t m,
                          std::array<double, 3> start, std::uint64_t seed,
                          std::int64_t memory_budget) {
    if (d < 1 || d > 3) throw DomainError("sample_paths: dimension must be 1, 2 or 3");
    if (!(dt > 0.0)) throw DomainError("sample_paths: dt must be positive");
    if (!(t >= dt)) throw DomainError("sample_paths: require t >= dt");
    if (m < 1) throw DomainError("sample_paths: need at least one path");

    PathEnsemble e;
    e.d = d;
    e.steps = std::max<std::int64_t>(1, std::llround(t / dt));
    e.dt = t / static_cast<double>(e.steps); // exact cover of [0, t]
    e.t = t;
    e.m = m;
    e.start = start;
    e.seed = seed;

    const std::int64_t doubles = m * (e.steps + 1) * d;
    if (doubles * 8 > memory_budget)
        throw DomainError("sample_paths: ensemble exceeds the memory budget");
    e.positions.resize(doubles);

    const double sq = std::sqrt(e.dt);
    for (std::int64_t i = 0; i < m; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        double* p = e.positions.data() + i * (e.steps + 1) * d;
        for (int a = 0; a < d; ++a) p[a] = start[a];
        for (std::int64_t k = 1; k <= e.steps; ++k)
            for (int a = 0; a < d; ++a)
                p[k * d + a] = p[(k - 1) * d + a] + sq * rng.gauss();
    }
    return e;
}

double potential_line_integral(const PathEnsemble& ensemble, std::int64_t path_index,
                               const FieldSample& field) {
    if (ensemble.d != field.grid.d)
        throw DomainError("potential_line_integral: dimension mismatch");
    const double* p = ensemble.path(path_index);
    double acc = 0.0;
    for (std::int64_t k = 0; k <= ensemble.steps; ++k) {
        double v = 0.0;
        if (!interpolate(field.grid, field.values,
                         std::span<const double>(p + k * ensemble.d, ensemble.d), v))
            throw ExitError("potential_line_integral: path exits the box before the horizon",
                            static_cast<std::size_t>(k),
                            static_cast<double>(k) * ensemble.dt);
        acc += trapezoid_weight(k, ensemble.steps, ensemble.dt) * v;
    }
    return acc;
}

MomentStats quenched_moment(const FieldSample& field, double theta,
                            const PathEnsemble& ensemble, bool dirichlet) {
    if (ensemble.d != field.grid.d)
        throw DomainError("quenched_moment: dimension mismatch");
    std::vector<double> exponents;
    exponents.reserve(ensemble.m);
    std::int64_t survivors = 0;
    for (std::int64_t i = 0; i < ensemble.m; ++i) {
        const double* p = ensemble.path(i);
        double acc = 0.0;
        bool exited = false;
        for (std::int64_t k = 0; k <= ensemble.steps; ++k) {
            double v = 0.0;
            const bool inside =
                interpolate(field.grid, field.values,
                            std::span<const double>(p + k * ensemble.d, ensemble.d), v);
            if (!inside) {
                exited = true;
                if (dirichlet) break;
                v = 0.0; // zero extension outside the box
            }
            acc += trapezoid_weight(k, ensemble.steps, ensemble.dt) * v;
        }
        if (dirichlet && exited) continue;
        if (!exited) ++survivors;
        exponents.push_back(theta * acc);
    }
    if (dirichlet && exponents.empty())
        throw ConvergenceError("quenched_moment: all paths exited before the horizon", 0.0,
                               1.0);
    const ExpAverage avg = exp_average(exponents, ensemble.m);
    if (avg.ess < 30.0)
        throw ConvergenceError("quenched_moment: effective sample size below 30",
                               avg.log_mean, avg.ess);
    MomentStats out;
    out.log_moment = avg.log_mean;
    out.growth_rate = avg.log_mean / ensemble.t;
    out.standard_error = avg.se_log;
    out.ess = avg.ess;
    out.surviving_fraction =
        static_cast<double>(survivors) / static_cast<double>(ensemble.m);
    return out;
}

namespace {

// --- conditional variance quadratures ---------------------------------

// |T(lambda)|^2 with T = sum_k w_k e^{i lambda . B_k} (trapezoid weights).
double path_transform_sq(const PathEnsemble& e, std::int64_t i,
                         std::span<const double> lambda) {
    const double* p = e.path(i);
    double re = 0.0, im = 0.0;
    for (std::int64_t k = 0; k <= e.steps; ++k) {
        double phase = 0.0;
        for (int a = 0; a < e.d; ++a) phase += lambda[a] * p[k * e.d + a];
        const double w = trapezoid_weight(k, e.steps, e.dt);
        re += w * std::cos(phase);
        im += w * std::sin(phase);
    }
    return re * re + im * im;
}

struct SpectralModelData {
    double alpha = 0.0;
    double rho0 = 0.0; // radial density rho0 * s^{alpha - d} (radial backends)
};

SpectralModelData radial_spectral_data(const PotentialModel& model) {
    SpectralModelData out;
    switch (model.variant) {
        case PotentialVariant::WhiteNoise1D:
            out.alpha = 1.0;
            out.rho0 = 1.0;
            break;
        case PotentialVariant::FractionalWhiteNoise:
            out.alpha = model.effective_alpha();
            out.rho0 = fractional_axis_coefficient(model.hurst[0]);
            break;
        default:
            out.alpha = model.effective_alpha();
            out.rho0 = model.amplitude() *
                       riesz_spectral_coefficient(model.d, out.alpha);
            break;
    }
    return out;
}

double cond_var_once(const PathEnsemble& e, std::int64_t i, const PotentialModel& model,
                     double eps, const QuadratureSpec& q, int refine) {
    const int d = model.d;
    const double s_cut = mollifier::filter_cutoff(d) / eps;
    const int mult = 1 << refine;

    if (model.variant == PotentialVariant::FractionalWhiteNoise && d == 2) {
        // product density, tensor quadrature with per-axis power substitution
        const double c1 = fractional_axis_coefficient(model.hurst[0]);
        const double c2 = fractional_axis_coefficient(model.hurst[1]);
        const double b1 = 2.0 - 2.0 * model.hurst[0];
        const double b2 = 2.0 - 2.0 * model.hurst[1];
        const int panels = q.radial_panels * mult;
        const double v = integrate_power_weight(
            [&](double l2) {
                return integrate_power_weight(
                    [&](double l1) {
                        const double f =
                            mollifier::filter(d, eps, std::sqrt(l1 * l1 + l2 * l2));
                        const double pa[2] = {l1, l2};
                        const double pb[2] = {-l1, l2};
                        return f * (path_transform_sq(e, i, pa) +
                                    path_transform_sq(e, i, pb));
                    },
                    b1, s_cut, panels, 16);
            },
            b2, s_cut, panels, 16);
        return 2.0 * c1 * c2 * v / std::pow(2.0 * M_PI, 2);
    }

    const SpectralModelData sd = radial_spectral_data(model);
    switch (d) {
        case 1: {
            const int panels = q.radial_panels * mult * 4;
            const double v = integrate_power_weight(
                [&](double s) {
                    const double lam[1] = {s};
                    return mollifier::filter(1, eps, s) * path_transform_sq(e, i, lam);
                },
                sd.alpha, s_cut, panels, 32);
            return sd.rho0 * v / M_PI;
        }
        case 2: {
            const int panels = q.radial_panels * mult;
            const int na = q.angular_nodes * mult;
            const double v = integrate_power_weight(
                [&](double s) {
                    double ang = 0.0;
                    for (int a = 0; a < na; ++a) {
                        const double phi = M_PI * (a + 0.5) / na; // half circle suffices
                        const double lam[2] = {s * std::cos(phi), s * std::sin(phi)};
                        ang += path_transform_sq(e, i, lam);
                    }
                    return mollifier::filter(2, eps, s) * ang * (2.0 * M_PI / na);
                },
                sd.alpha, s_cut, panels, 16);
            return sd.rho0 * v / std::pow(2.0 * M_PI, 2);
        }
        default: {
            if (model.variant == PotentialVariant::FractionalWhiteNoise)
                throw DomainError("conditional_variance_spectral: fractional model "
                                  "supported for d <= 2");
            // importance sampling: s ~ p(s) ∝ s^{alpha-1} filter(s), direction uniform
            const int nmc = q.mc_samples * mult;
            const int grid_n = 4096;
            const double umax = std::pow(s_cut, sd.alpha);
            std::vector<double> cdf(grid_n + 1, 0.0);
            for (int k = 1; k <= grid_n; ++k) {
                const double u = umax * (k - 0.5) / grid_n;
                const double s = std::pow(u, 1.0 / sd.alpha);
                cdf[k] = cdf[k - 1] + mollifier::filter(3, eps, s);
            }
            const double z_u = cdf[grid_n] * (umax / grid_n) / sd.alpha; // int s^{a-1} filter ds
            Rng rng(q.mc_seed);
            double acc = 0.0;
            for (int it = 0; it < nmc; ++it) {
                const double target = rng.uniform() * cdf[grid_n];
                const auto pos = std::lower_bound(cdf.begin(), cdf.end(), target);
                const double ku = static_cast<double>(pos - cdf.begin());
                const double u = umax * std::min(1.0, ku / grid_n);
                const double s = std::pow(std::max(u, 1e-300), 1.0 / sd.alpha);
                // uniform direction
                const double zc = 2.0 * rng.uniform() - 1.0;
                const double ph = 2.0 * M_PI * rng.uniform();
                const double sq = std::sqrt(std::max(0.0, 1.0 - zc * zc));
                const double lam[3] = {s * sq * std::cos(ph), s * sq * std::sin(ph), s * zc};
                acc += path_transform_sq(e, i, lam);
            }
            const double mean_t = acc / nmc;
            return sd.rho0 * 4.0 * M_PI * z_u * mean_t / std::pow(2.0 * M_PI, 3);
        }
    }
}

} // namespace

double conditional_variance_spectral(const PathEnsemble& ensemble, std::int64_t path_index,
                                     const PotentialModel& model, double eps,
                                     const QuadratureSpec& spec) {
    model.validate();
    if (model.d != ensemble.d)
        throw DomainError("conditional_variance_spectral: dimension mismatch");
    if (!(eps > 0.0)) throw DomainError("conditional_variance_spectral: epsilon > 0 required");

    double prev = cond_var_once(ensemble, path_index, model, eps, spec, 0);
    for (int r = 1; r <= spec.max_refine; ++r) {
        const double cur = cond_var_once(ensemble, path_index, model, eps, spec, r);
        if (std::abs(cur - prev) <= spec.rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
        prev = cur;
        if (r == spec.max_refine) {
            const double last = cond_var_once(ensemble, path_index, model, eps, spec, r + 1);
            if (std::abs(last - prev) <= spec.rel_tol * std::max(std::abs(last), 1e-300))
                return last;
            throw ConvergenceError("conditional_variance_spectral: quadrature did not "
                                   "converge; last two refinements " +
                                       std::to_string(prev) + " and " + std::to_string(last),
                                   last, std::abs(last - prev) / std::abs(last));
        }
    }
    return prev;
}

namespace {

// Interpolation stencil of one path against a grid: flat base index plus
// corner weights; steps outside the box get weight zero everywhere.
struct PathStencil {
    std::vector<std::int64_t> corner; // (steps+1) * 2^d flat indices, -1 = ghost
    std::vector<double> weight;
    int corners = 0;
};

PathStencil build_stencil(const GridSpec& g, const PathEnsemble& e, std::int64_t i) {
    PathStencil st;
    st.corners = 1 << g.d;
    st.corner.assign((e.steps + 1) * st.corners, -1);
    st.weight.assign((e.steps + 1) * st.corners, 0.0);
    const double R = g.half_width;
    const double h = g.spacing();
    const std::int64_t n = g.n;
    const double* p = e.path(i);
    for (std::int64_t k = 0; k <= e.steps; ++k) {
        std::int64_t base[3];
        double frac[3];
        bool inside = true;
        for (int a = 0; a < g.d; ++a) {
            const double xa = p[k * g.d + a];
            if (!(xa > -R && xa < R)) {
                inside = false;
                break;
            }
            const double u = (xa + R) / h - 1.0;
            std::int64_t b = static_cast<std::int64_t>(std::floor(u));
            b = std::clamp<std::int64_t>(b, -1, n - 1);
            base[a] = b;
            frac[a] = u - static_cast<double>(b);
        }
        if (!inside) continue;
        const double w_time = trapezoid_weight(k, e.steps, e.dt);
        for (int c = 0; c < st.corners; ++c) {
            double w = w_time;
            std::int64_t idx = 0;
            bool valid = true;
            for (int a = 0; a < g.d; ++a) {
                const int bit = (c >> a) & 1;
                const std::int64_t kk = base[a] + bit;
                w *= bit ? frac[a] : 1.0 - frac[a];
                if (kk < 0 || kk >= n) {
                    valid = false;
                    break;
                }
                idx = idx * n + kk;
            }
            if (valid) {
                st.corner[k * st.corners + c] = idx;
                st.weight[k * st.corners + c] = w;
            }
        }
    }
    return st;
}

} // namespace

AnnealedResult annealed_consistency(const PotentialModel& model, double theta, double t,
                                    double dt, std::int64_t m_paths, std::int64_t m_fields,
                                    double eps, std::uint64_t seed,
                                    const AnnealedOptions& options) {
    model.validate();
    if (!(theta > 0.0)) throw DomainError("annealed_consistency: theta > 0 required");
    GridSpec grid;
    if (options.grid) {
        grid = *options.grid;
    } else {
        const double R = std::ceil(4.0 * std::sqrt(t)) + 1.0;
        const double target_h = options.grid_h_over_eps * eps;
        const std::int64_t n = static_cast<std::int64_t>(std::ceil(2.0 * R / target_h)) - 1;
        grid = GridSpec(model.d, R, n);
    }

    // lhs: crossed design over fields x paths with a two-way standard error.
    PathEnsemble paths = sample_paths(model.d, t, dt, m_paths, {0.0, 0.0, 0.0},
                                      stream_id(seed, 1));
    std::vector<PathStencil> stencils;
    stencils.reserve(m_paths);
    for (std::int64_t j = 0; j < m_paths; ++j) stencils.push_back(build_stencil(grid, paths, j));

    FieldSynthesizer synth(model, grid, eps);
    std::vector<double> row_mean(m_fields, 0.0), col_sum(m_paths, 0.0);
    const double exp_cap = 700.0;
    const unsigned n_threads = std::max(1u, options.threads);
    std::vector<std::vector<double>> col_partial(n_threads,
                                                 std::vector<double>(m_paths, 0.0));
    std::vector<std::thread> workers;
    std::atomic<bool> overflow{false};
    auto run_chunk = [&](unsigned tid) {
        const std::int64_t lo = m_fields * tid / n_threads;
        const std::int64_t hi = m_fields * (tid + 1) / n_threads;
        std::vector<double>& cols = col_partial[tid];
        for (std::int64_t i = lo; i < hi && !overflow.load(); ++i) {
            const FieldSample field = synth.sample(stream_id(seed, 1000 + i));
            double row = 0.0;
            for (std::int64_t j = 0; j < m_paths; ++j) {
                const PathStencil& st = stencils[j];
                double acc = 0.0;
                const std::int64_t cells = (paths.steps + 1) * st.corners;
                for (std::int64_t c = 0; c < cells; ++c) {
                    const std::int64_t idx = st.corner[c];
                    if (idx >= 0) acc += st.weight[c] * field.values[idx];
                }
                const double ex = theta * acc;
                if (ex > exp_cap) {
                    overflow.store(true);
                    return;
                }
                const double v = std::exp(ex);
                row += v;
                cols[j] += v;
            }
            row_mean[i] = row / static_cast<double>(m_paths);
        }
    };
    if (n_threads == 1) {
        run_chunk(0);
    } else {
        for (unsigned tid = 0; tid < n_threads; ++tid) workers.emplace_back(run_chunk, tid);
        for (auto& w : workers) w.join();
    }
    if (overflow.load())
        throw ConvergenceError(
            "annealed_consistency: exponential overflow; reduce theta or t", exp_cap, 0.0);
    for (unsigned tid = 0; tid < n_threads; ++tid)
        for (std::int64_t j = 0; j < m_paths; ++j) col_sum[j] += col_partial[tid][j];
    double lhs = 0.0;
    for (double v : row_mean) lhs += v;
    lhs /= static_cast<double>(m_fields);

    double var_rows = 0.0;
    for (double v : row_mean) var_rows += (v - lhs) * (v - lhs);
    var_rows /= static_cast<double>(m_fields) * std::max<double>(1.0, m_fields - 1);
    double var_cols = 0.0;
    for (double c : col_sum) {
        const double v = c / static_cast<double>(m_fields);
        var_cols += (v - lhs) * (v - lhs);
    }
    var_cols /= static_cast<double>(m_paths) * std::max<double>(1.0, m_paths - 1);
    const double se_lhs = std::sqrt(var_rows + var_cols);

    // rhs: independent ensemble, double time integral of gamma_eps.
    PathEnsemble rhs_paths = sample_paths(model.d, t, dt, m_paths, {0.0, 0.0, 0.0},
                                          stream_id(seed, 2));
    MollifiedCovariance cov(model, eps, 16.0 * std::sqrt(t) + 8.0 * eps);
    const bool radial_model =
        !(model.variant == PotentialVariant::FractionalWhiteNoise && model.d >= 2);
    const double R = grid.half_width;
    std::vector<double> rhs_vals(m_paths);
    for (std::int64_t j = 0; j < m_paths; ++j) {
        const double* p = rhs_paths.path(j);
        const std::int64_t s = rhs_paths.steps;
        double acc = 0.0;
        for (std::int64_t u = 0; u <= s; ++u) {
            const double wu = trapezoid_weight(u, s, rhs_paths.dt);
            bool u_in = true;
            for (int a = 0; a < model.d; ++a)
                if (!(std::abs(p[u * model.d + a]) < R)) u_in = false;
            if (!u_in) continue; // zero extension
            for (std::int64_t v = 0; v <= s; ++v) {
                bool v_in = true;
                for (int a = 0; a < model.d; ++a)
                    if (!(std::abs(p[v * model.d + a]) < R)) v_in = false;
                if (!v_in) continue;
                const double wv = trapezoid_weight(v, s, rhs_paths.dt);
                double gval;
                if (radial_model) {
                    double rr = 0.0;
                    for (int a = 0; a < model.d; ++a) {
                        const double dxa = p[u * model.d + a] - p[v * model.d + a];
                        rr += dxa * dxa;
                    }
                    gval = cov.radial(std::sqrt(rr));
                } else {
                    double lag[3];
                    for (int a = 0; a < model.d; ++a)
                        lag[a] = p[u * model.d + a] - p[v * model.d + a];
                    gval = cov.at(std::span<const double>(lag, model.d));
                }
                acc += wu * wv * gval;
            }
        }
        const double ex = 0.5 * theta * theta * acc;
        if (ex > exp_cap)
            throw ConvergenceError("annealed_consistency: exponential overflow; reduce "
                                   "theta or t",
                                   ex, 0.0);
        rhs_vals[j] = std::exp(ex);
    }
    double rhs = 0.0;
    for (double v : rhs_vals) rhs += v;
    rhs /= static_cast<double>(m_paths);
    double var_rhs = 0.0;
    for (double v : rhs_vals) var_rhs += (v - rhs) * (v - rhs);
    var_rhs /= static_cast<double>(m_paths) * std::max<double>(1.0, m_paths - 1);
    const double se_rhs = std::sqrt(var_rhs);

    AnnealedResult out;
    out.lhs = lhs;
    out.rhs = rhs;
    out.se_lhs = se_lhs;
    out.se_rhs = se_rhs;
    out.z_score = std::abs(lhs - rhs) / std::sqrt(se_lhs * se_lhs + se_rhs * se_rhs);
    return out;
}

std::vector<SemigroupRow> semigroup_consistency(const FieldSample& field, double theta,
                                                std::span<const double> t_values,
                                                const SemigroupOptions& options) {
    const EigenResult eig =
        principal_eigenvalue(DiscreteOperator(field, theta), options.eig_tol);
    std::vector<SemigroupRow> rows;
    double prev_t = 0.0;
    for (double t : t_values) {
        if (!(t > prev_t)) throw DomainError("semigroup_consistency: t values must increase");
        prev_t = t;
        PathEnsemble ens = sample_paths(field.grid.d, t, options.dt, options.m,
                                        {0.0, 0.0, 0.0},
                                        stream_id(options.seed, std::llround(t * 1000)));
        const MomentStats ms = quenched_moment(field, theta, ens, /*dirichlet=*/true);
        SemigroupRow row;
        row.t = t;
        row.growth_rate = ms.growth_rate;
        row.se = ms.standard_error / t;
        row.lambda = eig.lambda;
        row.gap = std::abs(ms.growth_rate - eig.lambda);
        row.ess = ms.ess;
        row.surviving_fraction = ms.surviving_fraction;
        rows.push_back(row);
    }
    return rows;
}

} // namespace anderson
