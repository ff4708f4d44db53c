#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "anderson/eigensolver.hpp"
#include "anderson/grid_ops.hpp"
#include "anderson/potentials.hpp"
#include "anderson/rng.hpp"

using namespace anderson;

namespace {

FieldSample make_field(const GridSpec& grid, double value) {
    FieldSample f;
    f.grid = grid;
    f.model = PotentialModel::riesz(grid.d, 0.5, 1.0);
    f.epsilon = 1.0;
    f.seed = 0;
    f.values.assign(grid.total_nodes(), value);
    return f;
}

// Dense symmetric eigensolver oracle (independent of the Lanczos path).
double dense_top_eigenvalue(const DiscreteOperator& op) {
    const std::int64_t n = op.size();
    Eigen::MatrixXd a(n, n);
    std::vector<double> unit(n, 0.0), col(n);
    for (std::int64_t j = 0; j < n; ++j) {
        unit[j] = 1.0;
        op.apply(unit, col);
        for (std::int64_t i = 0; i < n; ++i) a(i, j) = col[i];
        unit[j] = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    return solver.eigenvalues().maxCoeff();
}

// Exact principal eigenvalue of the discrete Dirichlet Laplacian (V = 0):
// (1/2) Delta_h has ground value -(d/h^2) (1 - cos(pi/(n+1))).
double discrete_zero_potential_lambda(const GridSpec& g) {
    const double h = g.spacing();
    return -(static_cast<double>(g.d) / (h * h)) *
           (1.0 - std::cos(M_PI / static_cast<double>(g.n + 1)));
}

} // namespace

TEST_CASE("zero potential reproduces the Dirichlet ground state") {
    // d=1, R=1, n=1024: lambda = -pi^2/8 within 1e-3 relative
    {
        const GridSpec g(1, 1.0, 1024);
        const EigenResult res = principal_eigenvalue(DiscreteOperator(make_field(g, 0.0), 1.0),
                                                     1e-8);
        const double target = -M_PI * M_PI / 8.0;
        CHECK(std::abs(res.lambda - target) / std::abs(target) < 1e-3);
        // and matches the exact discrete value to solver tolerance
        CHECK(res.lambda ==
              doctest::Approx(discrete_zero_potential_lambda(g)).epsilon(1e-9));
    }
    // d=2, R=1: lambda = -pi^2/4
    {
        const GridSpec g(2, 1.0, 128);
        const EigenResult res = principal_eigenvalue(DiscreteOperator(make_field(g, 0.0), 1.0),
                                                     1e-10);
        const double target = -M_PI * M_PI / 4.0;
        CHECK(std::abs(res.lambda - target) / std::abs(target) < 1e-3);
    }
}

TEST_CASE("operator action: pure Laplacian, linearity in a constant shift, symmetry") {
    const GridSpec g(1, 1.0, 64);
    const FieldSample zero = make_field(g, 0.0);
    DiscreteOperator op(zero, 1.0);

    // constant vector: interior action vanishes, boundary rows see the stencil
    std::vector<double> ones(g.total_nodes(), 1.0), out(g.total_nodes());
    op.apply(ones, out);
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    for (std::int64_t j = 1; j + 1 < g.n; ++j) CHECK(out[j] == doctest::Approx(0.0));
    CHECK(out[0] == doctest::Approx(-0.5 * inv_h2));

    // shift by a constant c acts as + theta c u pointwise
    const double c = 2.3, theta = 0.7;
    DiscreteOperator op_c(make_field(g, c), theta);
    DiscreteOperator op_0(zero, theta);
    Rng rng(5);
    std::vector<double> u(g.total_nodes()), a(g.total_nodes()), b(g.total_nodes());
    for (auto& v : u) v = rng.gauss();
    op_c.apply(u, a);
    op_0.apply(u, b);
    for (std::int64_t j = 0; j < g.total_nodes(); ++j)
        CHECK(a[j] == doctest::Approx(b[j] + theta * c * u[j]));

    // symmetry <Au, v> = <u, Av> on random pairs
    const GridSpec g2(2, 1.0, 12);
    const FieldSample field = synthesize_field(PotentialModel::riesz(2, 1.0, 1.0), g2, 0.3, 7);
    DiscreteOperator rough(field, 1.1);
    std::vector<double> x(g2.total_nodes()), y(g2.total_nodes()), ax(g2.total_nodes()),
        ay(g2.total_nodes());
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
        for (auto& v : x) v = rng.gauss();
        for (auto& v : y) v = rng.gauss();
        rough.apply(x, ax);
        rough.apply(y, ay);
        double xay = 0.0, yax = 0.0, scale = 0.0;
        for (std::int64_t j = 0; j < g2.total_nodes(); ++j) {
            xay += x[j] * ay[j];
            yax += y[j] * ax[j];
            scale += std::abs(x[j] * ay[j]);
        }
        worst = std::max(worst, std::abs(xay - yax) / scale);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("lanczos matches the dense oracle on small grids") {
    // d=1, 400 nodes, rough white-noise potential
    {
        const GridSpec g(1, 2.0, 400);
        const FieldSample f = synthesize_field(PotentialModel::white_noise_1d(), g, 0.05, 11);
        DiscreteOperator op(f, 1.0);
        const EigenResult res = principal_eigenvalue(op, 1e-11);
        const double dense = dense_top_eigenvalue(op);
        CHECK(std::abs(res.lambda - dense) / std::abs(dense) < 1e-8);
        CHECK(res.residual <= 1e-11);
    }
    // d=2, 19x19 nodes
    {
        const GridSpec g(2, 1.0, 19);
        const FieldSample f = synthesize_field(PotentialModel::riesz(2, 0.8, 1.0), g, 0.2, 23);
        DiscreteOperator op(f, 1.3);
        const EigenResult res = principal_eigenvalue(op, 1e-11);
        const double dense = dense_top_eigenvalue(op);
        CHECK(std::abs(res.lambda - dense) / std::abs(dense) < 1e-8);
    }
}

TEST_CASE("eigen result invariants: rayleigh, sign, residual") {
    const GridSpec g(1, 2.0, 200);
    const FieldSample f = synthesize_field(PotentialModel::white_noise_1d(), g, 0.1, 3);
    DiscreteOperator op(f, 1.0);
    const EigenResult res = principal_eigenvalue(op, 1e-10);

    CHECK(rayleigh_quotient(op, res.eigenfunction) == doctest::Approx(res.lambda));
    CHECK(l2_norm(g, res.eigenfunction) == doctest::Approx(1.0));
    double mn = 1e300, mx = -1e300;
    for (double v : res.eigenfunction) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    CHECK(mx > 0.0);
    CHECK(mn >= -1e-8 * mx); // no sign change

    // variational characterization: any g gives a lower Rayleigh quotient
    Rng rng(17);
    std::vector<double> probe(g.total_nodes());
    for (int it = 0; it < 20; ++it) {
        for (auto& v : probe) v = rng.gauss();
        CHECK(rayleigh_quotient(op, probe) <= res.lambda + 1e-9);
    }
    std::vector<double> zero(g.total_nodes(), 0.0);
    CHECK_THROWS_AS(rayleigh_quotient(op, zero), DomainError);

    // first Dirichlet sine mode under V = 0 gives the discrete ground value
    const FieldSample vz = make_field(g, 0.0);
    DiscreteOperator op0(vz, 1.0);
    std::vector<double> mode(g.total_nodes());
    for (std::int64_t k = 0; k < g.n; ++k)
        mode[k] = std::sin(M_PI * static_cast<double>(k + 1) /
                           static_cast<double>(g.n + 1));
    CHECK(rayleigh_quotient(op0, mode) ==
          doctest::Approx(discrete_zero_potential_lambda(g)).epsilon(1e-12));
}

TEST_CASE("grid convergence of the V=0 eigenvalue is O(h^2)") {
    const double target = -M_PI * M_PI / 8.0;
    double prev_err = 0.0;
    int i = 0;
    for (std::int64_t n : {64, 128, 256}) {
        const GridSpec g(1, 1.0, n);
        const double lam =
            principal_eigenvalue(DiscreteOperator(make_field(g, 0.0), 1.0), 1e-9).lambda;
        const double err = std::abs(lam - target);
        if (i++) CHECK(err < 0.3 * prev_err); // ~4x reduction per refinement
        prev_err = err;
    }
}

TEST_CASE("scaling identity: lambda(Q_{R/a}) = a^2 lambda(Q_R) for V = 0") {
    const std::int64_t n = 96;
    const double lam1 =
        principal_eigenvalue(DiscreteOperator(make_field(GridSpec(1, 4.0, n), 0.0), 1.0),
                             1e-11)
            .lambda;
    const double a = 2.0;
    const double lam2 =
        principal_eigenvalue(DiscreteOperator(make_field(GridSpec(1, 4.0 / a, n), 0.0), 1.0),
                             1e-11)
            .lambda;
    CHECK(lam2 == doctest::Approx(a * a * lam1).epsilon(1e-10));
}

TEST_CASE("domain monotonicity and the zero-potential gap closed form") {
    const GridSpec g(1, 8.0, 255); // h = 1/16
    const FieldSample zero = make_field(g, 0.0);
    const double rs[2] = {2.0, 4.0};
    const auto rows = decomposition_gap(zero, 1.0, rs);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        // gap(r) = -pi^2/8 (1/R^2 - 1/(r+1)^2) + O(h^2)
        const double closed =
            -M_PI * M_PI / 8.0 * (1.0 / 64.0 - 1.0 / ((row.r + 1.0) * (row.r + 1.0)));
        CHECK(row.gap == doctest::Approx(closed).epsilon(5e-3));
        CHECK(row.gap >= -1e-10); // domain monotonicity
    }

    // random field: every sub-box eigenvalue stays below the full-box one
    const FieldSample f = synthesize_field(PotentialModel::white_noise_1d(), g, 0.25, 77);
    const auto rough = decomposition_gap(f, 1.0, rs);
    for (const auto& row : rough) CHECK(row.lambda_submax <= row.lambda_full + 1e-10);

    CHECK_THROWS_AS(decomposition_gap(zero, 1.0, std::vector<double>{9.0}), DomainError);
}

TEST_CASE("domain monotonicity for nested sub-boxes on a common grid") {
    const GridSpec g(1, 8.0, 255);
    const FieldSample f = synthesize_field(PotentialModel::white_noise_1d(), g, 0.25, 31);
    BoxMask inner, outer;
    REQUIRE(BoxMask::from_box(g, {0.5, 0.0, 0.0}, 2.0, inner));
    REQUIRE(BoxMask::from_box(g, {0.0, 0.0, 0.0}, 5.0, outer));
    const double lam_inner =
        principal_eigenvalue(DiscreteOperator(f, 1.0, inner), 1e-10).lambda;
    const double lam_outer =
        principal_eigenvalue(DiscreteOperator(f, 1.0, outer), 1e-10).lambda;
    const double lam_full = principal_eigenvalue(DiscreteOperator(f, 1.0), 1e-10).lambda;
    CHECK(lam_inner <= lam_outer + 1e-10);
    CHECK(lam_outer <= lam_full + 1e-10);
}

TEST_CASE("coupling monotonicity on a fixed field with a constant shift") {
    const GridSpec g(1, 2.0, 128);
    FieldSample f = synthesize_field(PotentialModel::white_noise_1d(), g, 0.1, 9);
    const double theta = 0.8, c = 1.25;
    const double lam = principal_eigenvalue(DiscreteOperator(f, theta), 1e-11).lambda;
    FieldSample shifted = f;
    for (auto& v : shifted.values) v += c;
    const double lam_shift =
        principal_eigenvalue(DiscreteOperator(shifted, theta), 1e-11).lambda;
    CHECK(lam_shift == doctest::Approx(lam + theta * c).epsilon(1e-9));
}

TEST_CASE("non-convergence carries the best estimate") {
    const GridSpec g(2, 1.0, 40);
    const FieldSample f = synthesize_field(PotentialModel::riesz(2, 1.0, 1.0), g, 0.2, 5);
    DiscreteOperator op(f, 1.0);
    CHECK_THROWS_AS(principal_eigenvalue(op, 1e-14, 8), ConvergenceError);
    try {
        principal_eigenvalue(op, 1e-14, 8);
    } catch (const ConvergenceError& e) {
        CHECK(std::isfinite(e.best_estimate));
        CHECK(e.residual > 0.0);
    }
}
