#include <doctest.h>

#include <cmath>

#include "anderson/feynman_kac.hpp"
#include "anderson/mollifier.hpp"
#include "anderson/potentials.hpp"
#include "anderson/rng.hpp"

using namespace anderson;

namespace {

FieldSample constant_field(const GridSpec& grid, double value) {
    FieldSample f;
    f.grid = grid;
    f.model = PotentialModel::riesz(grid.d, 0.5, 1.0);
    f.epsilon = 1.0;
    f.seed = 0;
    f.values.assign(grid.total_nodes(), value);
    return f;
}

// Deterministic smooth trajectory packed into a single-path ensemble.
PathEnsemble smooth_path(double t, double dt) {
    PathEnsemble e;
    e.d = 1;
    e.t = t;
    e.steps = std::llround(t / dt);
    e.dt = t / static_cast<double>(e.steps);
    e.m = 1;
    e.seed = 0;
    e.positions.resize(e.steps + 1);
    for (std::int64_t k = 0; k <= e.steps; ++k) {
        const double s = static_cast<double>(k) * e.dt;
        e.positions[k] = 1.2 * std::sin(2.1 * s) + 0.4 * std::cos(5.0 * s);
    }
    return e;
}

} // namespace

TEST_CASE("path ensembles: shapes, determinism, increment statistics") {
    // t = dt: exactly two time slices
    const PathEnsemble two = sample_paths(2, 0.25, 0.25, 3, {0.1, -0.2, 0.0}, 5);
    CHECK(two.steps == 1);
    CHECK(two.path(1)[0] == 0.1); // B_0 = start
    CHECK(two.path(1)[1] == -0.2);

    // determinism
    const PathEnsemble a = sample_paths(1, 1.0, 0.01, 10, {0.0, 0.0, 0.0}, 77);
    const PathEnsemble b = sample_paths(1, 1.0, 0.01, 10, {0.0, 0.0, 0.0}, 77);
    CHECK(a.positions == b.positions);

    // terminal variance within 3 SE of t; increment mean/variance within 4 SE
    const std::int64_t m = 50000;
    const PathEnsemble e = sample_paths(1, 1.0, 0.05, m, {0.0, 0.0, 0.0}, 123);
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        const double x = e.path(i)[e.steps];
        s1 += x;
        s2 += x * x;
    }
    const double var = (s2 - s1 * s1 / m) / static_cast<double>(m - 1);
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / (m - 1.0)));

    double inc1 = 0.0, inc2 = 0.0;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < 2000; ++i) {
        for (std::int64_t k = 1; k <= e.steps; ++k) {
            const double d = e.path(i)[k] - e.path(i)[k - 1];
            inc1 += d;
            inc2 += d * d;
            ++count;
        }
    }
    const double mean_inc = inc1 / count;
    const double var_inc = inc2 / count - mean_inc * mean_inc;
    CHECK(std::abs(mean_inc) < 4.0 * std::sqrt(e.dt / count));
    CHECK(std::abs(var_inc - e.dt) < 4.0 * e.dt * std::sqrt(2.0 / count));

    CHECK_THROWS_AS(sample_paths(1, 0.1, 0.2, 1, {0, 0, 0}, 1), DomainError); // t < dt
    CHECK_THROWS_AS(sample_paths(1, 1.0, 0.001, 1 << 30, {0, 0, 0}, 1),
                    DomainError); // memory budget, refused before allocation
}

TEST_CASE("line integral: constants, linear fields, exits") {
    const GridSpec g(1, 8.0, 255);
    const PathEnsemble paths = sample_paths(1, 1.0, 1.0 / 128.0, 4, {0.0, 0.0, 0.0}, 9);

    // constant field -> c t exactly
    const FieldSample cf = constant_field(g, 2.5);
    for (int i = 0; i < 4; ++i)
        CHECK(potential_line_integral(paths, i, cf) == doctest::Approx(2.5).epsilon(1e-12));

    // linear-in-x array: integral equals a * trapezoid(positions) exactly
    FieldSample lin = constant_field(g, 0.0);
    for (std::int64_t k = 0; k < g.n; ++k) lin.values[k] = 0.7 * g.coord(k);
    for (int i = 0; i < 4; ++i) {
        double traps = 0.0;
        for (std::int64_t k = 0; k <= paths.steps; ++k) {
            const double w = (k == 0 || k == paths.steps) ? 0.5 * paths.dt : paths.dt;
            traps += w * paths.path(i)[k];
        }
        CHECK(potential_line_integral(paths, i, lin) ==
              doctest::Approx(0.7 * traps).epsilon(1e-10));
    }

    // exit: a path started near the boundary leaves a tiny box
    const GridSpec tiny(1, 0.05, 8);
    const FieldSample tiny_field = constant_field(tiny, 0.0);
    const PathEnsemble wander = sample_paths(1, 4.0, 0.01, 1, {0.0, 0.0, 0.0}, 3);
    CHECK_THROWS_AS(potential_line_integral(wander, 0, tiny_field), ExitError);
    try {
        potential_line_integral(wander, 0, tiny_field);
    } catch (const ExitError& e) {
        CHECK(e.tau_estimate >= 0.0);
        CHECK(e.tau_estimate <= 4.0);
    }
}

TEST_CASE("line integral is Cauchy in dt on a frozen rough field") {
    const GridSpec g(1, 4.0, 511);
    const FieldSample field =
        synthesize_field(PotentialModel::white_noise_1d(), g, 0.2, 2024);
    double prev = 0.0, prev_diff = 0.0;
    int idx = 0;
    for (double dt : {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0}) {
        const PathEnsemble p = smooth_path(2.0, dt);
        const double val = potential_line_integral(p, 0, field);
        if (idx >= 1) {
            const double diff = std::abs(val - prev);
            if (idx >= 2) CHECK(diff < prev_diff);
            prev_diff = diff;
        }
        prev = val;
        ++idx;
    }
}

TEST_CASE("conditional variance: degenerate path and filter monotonicity") {
    // frozen path at the origin: value = t^2 gamma_eps(0)
    PathEnsemble still;
    still.d = 1;
    still.t = 0.7;
    still.steps = 64;
    still.dt = still.t / 64.0;
    still.m = 1;
    still.positions.assign(65, 0.0);

    const PotentialModel white = PotentialModel::white_noise_1d();
    const double eps = 0.15;
    const double value = conditional_variance_spectral(still, 0, white, eps);
    const double expected = 0.7 * 0.7 * mollifier::autocorrelation_at_zero(1) / eps;
    CHECK(value == doctest::Approx(expected).epsilon(1e-4));

    // smaller eps lets more spectral mass through
    const PathEnsemble wiggle = sample_paths(1, 1.0, 1.0 / 256.0, 1, {0.0, 0.0, 0.0}, 31);
    const PotentialModel rz = PotentialModel::riesz(1, 0.5, 1.0);
    const double v1 = conditional_variance_spectral(wiggle, 0, rz, 0.4);
    const double v2 = conditional_variance_spectral(wiggle, 0, rz, 0.2);
    const double v3 = conditional_variance_spectral(wiggle, 0, rz, 0.1);
    CHECK(v2 > v1);
    CHECK(v3 > v2);
}

TEST_CASE("conditional variance equals monte-carlo variance over fields") {
    // unit-scale version of the acceptance closure (def-2)
    const PotentialModel model = PotentialModel::white_noise_1d();
    const double eps = 0.2;
    const PathEnsemble paths = sample_paths(1, 1.0, 1.0 / 256.0, 1, {0.0, 0.0, 0.0}, 424);

    const double spectral = conditional_variance_spectral(paths, 0, model, eps);

    const GridSpec g(1, 4.0, 319);
    FieldSynthesizer synth(model, g, eps);
    const std::int64_t m = 3000;
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        const FieldSample f = synth.sample(stream_id(888, i));
        const double v = potential_line_integral(paths, 0, f);
        s1 += v;
        s2 += v * v;
    }
    const double mc = (s2 - s1 * s1 / m) / static_cast<double>(m - 1);
    const double se = mc * std::sqrt(2.0 / (m - 1.0));
    CHECK(std::abs(spectral - mc) < 4.0 * se);
}

TEST_CASE("conditional variance in d=3 via importance sampling") {
    // degenerate path: the time integral factorizes and the lambda integral
    // reduces to gamma_eps(0); the importance-sampled value is exact up to
    // the proposal-table discretization
    PathEnsemble still;
    still.d = 3;
    still.t = 0.5;
    still.steps = 32;
    still.dt = 0.5 / 32.0;
    still.m = 1;
    still.positions.assign(33 * 3, 0.0);
    const PotentialModel rz = PotentialModel::riesz(3, 1.2, 0.8);
    const double eps = 0.3;
    MollifiedCovariance cov(rz, eps, 4.0);
    const double expected = 0.25 * cov.at_zero();
    const double got = conditional_variance_spectral(still, 0, rz, eps);
    CHECK(got == doctest::Approx(expected).epsilon(1e-4));

    // a generic path converges across refinements to a stable value
    const PathEnsemble w = sample_paths(3, 0.5, 1.0 / 128.0, 1, {0.0, 0.0, 0.0}, 99);
    QuadratureSpec q;
    q.rel_tol = 0.02;
    CHECK(conditional_variance_spectral(w, 0, rz, eps, q) > 0.0);
}

TEST_CASE("conditional variance refuses unreachable quadrature targets") {
    const PathEnsemble w = sample_paths(2, 0.5, 1.0 / 64.0, 1, {0.0, 0.0, 0.0}, 12);
    QuadratureSpec q;
    q.radial_panels = 1;
    q.angular_nodes = 3;
    q.rel_tol = 1e-12;
    q.max_refine = 1;
    CHECK_THROWS_AS(conditional_variance_spectral(w, 0, PotentialModel::riesz(2, 1.0, 1.0),
                                                  0.25, q),
                    ConvergenceError);
}

TEST_CASE("quenched moment: exact values, jensen, dirichlet ordering") {
    const GridSpec g(1, 8.0, 255);
    const PathEnsemble paths = sample_paths(1, 1.0, 1.0 / 64.0, 500, {0.0, 0.0, 0.0}, 17);

    // field = 0 -> log moment 0
    const MomentStats zero = quenched_moment(constant_field(g, 0.0), 1.0, paths, false);
    CHECK(zero.log_moment == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(zero.surviving_fraction == 1.0);

    // field = c -> theta c t exactly
    const double theta = 0.8, c = 1.3;
    const MomentStats constant = quenched_moment(constant_field(g, c), theta, paths, false);
    CHECK(constant.log_moment == doctest::Approx(theta * c).epsilon(1e-12));

    // rough field: jensen bound and dirichlet <= free
    const FieldSample rough = synthesize_field(PotentialModel::white_noise_1d(), g, 0.25, 4);
    const MomentStats free_stats = quenched_moment(rough, 1.0, paths, false);
    double mean_i = 0.0;
    for (std::int64_t i = 0; i < paths.m; ++i)
        mean_i += potential_line_integral(paths, i, rough);
    mean_i /= static_cast<double>(paths.m);
    CHECK(free_stats.log_moment >= mean_i - 1e-10);

    const MomentStats dirichlet_stats = quenched_moment(rough, 1.0, paths, true);
    CHECK(dirichlet_stats.log_moment <= free_stats.log_moment + 1e-12);

    // all paths exited: tiny box
    const GridSpec tiny(1, 0.02, 4);
    const PathEnsemble longp = sample_paths(1, 2.0, 0.01, 20, {0.0, 0.0, 0.0}, 18);
    CHECK_THROWS_AS(quenched_moment(constant_field(tiny, 0.0), 1.0, longp, true),
                    ConvergenceError);

    // degenerate weights: ESS guard refuses skewed exponential averages
    CHECK_THROWS_AS(quenched_moment(rough, 200.0, paths, false), ConvergenceError);
}

TEST_CASE("annealed identity at small scale and theta -> 0") {
    AnnealedOptions opt;
    opt.threads = 2;

    // theta -> 0: both sides -> 1
    const AnnealedResult small = annealed_consistency(PotentialModel::white_noise_1d(), 1e-6,
                                                      0.5, 1.0 / 64.0, 50, 50, 0.2, 7, opt);
    CHECK(small.lhs == doctest::Approx(1.0).epsilon(1e-5)); // deviation is O(theta)
    CHECK(small.rhs == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(small.z_score < 4.0);

    // white noise, modest sample counts: two-estimator agreement
    const AnnealedResult white = annealed_consistency(PotentialModel::white_noise_1d(), 0.5,
                                                      1.0, 1.0 / 128.0, 400, 400, 0.1, 11,
                                                      opt);
    CHECK(white.z_score < 4.0);

    // exchangeability: swapping which factor carries the outer loop agrees
    const AnnealedResult sw = annealed_consistency(PotentialModel::white_noise_1d(), 0.5, 1.0,
                                                   1.0 / 128.0, 320, 500, 0.1, 12, opt);
    const double comb = std::sqrt(white.se_lhs * white.se_lhs + sw.se_lhs * sw.se_lhs);
    CHECK(std::abs(white.lhs - sw.lhs) < 4.0 * comb);
}

TEST_CASE("annealed average refuses exponential overflow") {
    AnnealedOptions opt;
    opt.threads = 1;
    CHECK_THROWS_AS(annealed_consistency(PotentialModel::white_noise_1d(), 80.0, 1.0,
                                         1.0 / 64.0, 20, 20, 0.05, 3, opt),
                    ConvergenceError);
}

TEST_CASE("doubling theta raises both the eigenvalue and the growth rate") {
    const GridSpec g(1, 4.0, 63);
    const FieldSample field =
        synthesize_field(PotentialModel::white_noise_1d(), g, 0.5, 1021);
    SemigroupOptions opt;
    opt.dt = 0.01;
    opt.m = 20000;
    opt.seed = 77;
    const double ts[1] = {4.0};
    const auto low = semigroup_consistency(field, 0.5, ts, opt);
    const auto high = semigroup_consistency(field, 1.0, ts, opt);
    CHECK(high[0].lambda > low[0].lambda);
    CHECK(high[0].growth_rate > low[0].growth_rate);
}

TEST_CASE("growth rates at dt and dt/2 agree within combined errors") {
    // smooth (large-eps) frozen field
    const GridSpec g(1, 4.0, 127);
    const FieldSample field = synthesize_field(PotentialModel::white_noise_1d(), g, 1.0, 88);
    const double theta = 0.7, t = 2.0;
    MomentStats coarse, fine;
    {
        const PathEnsemble p1 = sample_paths(1, t, 0.02, 4000, {0, 0, 0}, 301);
        coarse = quenched_moment(field, theta, p1, true);
    }
    {
        const PathEnsemble p2 = sample_paths(1, t, 0.01, 4000, {0, 0, 0}, 302);
        fine = quenched_moment(field, theta, p2, true);
    }
    const double combined =
        std::sqrt(coarse.standard_error * coarse.standard_error +
                  fine.standard_error * fine.standard_error) / t;
    CHECK(std::abs(coarse.growth_rate - fine.growth_rate) <= 3.0 * combined);
}

TEST_CASE("semigroup consistency on a constant field") {
    const GridSpec g(1, 3.0, 127);
    const FieldSample field = constant_field(g, 1.1);
    const double theta = 0.6;
    SemigroupOptions opt;
    opt.dt = 0.01;
    opt.m = 20000;
    opt.seed = 5;
    const double ts[3] = {1.0, 2.0, 4.0};
    const auto rows = semigroup_consistency(field, theta, ts, opt);
    REQUIRE(rows.size() == 3);
    // lambda = theta c + lambda_free exactly; the growth rate approaches it
    CHECK(rows[2].gap < rows[0].gap);
    // exact spectral expansion: the residual bias at the largest horizon is
    // (1/t) log(4/pi) from the ground-state overlap
    CHECK(rows[2].gap == doctest::Approx(std::log(4.0 / M_PI) / 4.0).epsilon(0.25));
    for (const auto& r : rows) CHECK(r.lambda == rows[0].lambda);

    std::vector<double> bad = {2.0, 1.0};
    CHECK_THROWS_AS(semigroup_consistency(field, theta, bad, opt), DomainError);
}
