#include <doctest.h>

#include <cmath>

#include "anderson/grid_ops.hpp"
#include "anderson/rng.hpp"
#include "anderson/variational.hpp"

using namespace anderson;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Direct O(N^2) double sum with the same cell weights as the library kernel.
double energy_double_sum(const GridSpec& g, const KernelSpec& kernel,
                         std::span<const double> f) {
    const double h = g.spacing();
    const std::int64_t total = g.total_nodes();
    std::vector<double> u(total);
    for (std::int64_t j = 0; j < total; ++j) u[j] = f[j] * f[j];
    double h2d = 1.0;
    for (int a = 0; a < 2 * g.d; ++a) h2d *= h;

    auto decode = [&](std::int64_t j, std::int64_t* idx) {
        for (int a = g.d - 1; a >= 0; --a) {
            idx[a] = j % g.n;
            j /= g.n;
        }
    };
    double acc = 0.0;
    std::int64_t ji[3], ki[3];
    for (std::int64_t j = 0; j < total; ++j) {
        decode(j, ji);
        for (std::int64_t k = 0; k < total; ++k) {
            decode(k, ki);
            double w;
            if (kernel.variant == KernelSpec::Variant::Riesz) {
                double rr = 0.0;
                for (int a = 0; a < g.d; ++a) {
                    const double dx = h * static_cast<double>(ji[a] - ki[a]);
                    rr += dx * dx;
                }
                w = rr == 0.0 ? riesz_cell_average(g.d, kernel.alpha, h)
                              : std::pow(std::sqrt(rr), -kernel.alpha);
            } else {
                w = 1.0;
                for (int a = 0; a < g.d; ++a) {
                    const double dx = h * static_cast<double>(std::llabs(ji[a] - ki[a]));
                    w *= dx == 0.0 ? riesz_cell_average(1, kernel.alphas[a], h)
                                   : std::pow(dx, -kernel.alphas[a]);
                }
            }
            acc += u[j] * u[k] * w;
        }
    }
    return acc * h2d;
}

TestFunction gaussian_profile(const GridSpec& g, double width) {
    TestFunction f;
    f.grid = g;
    f.values.resize(g.total_nodes());
    for (std::int64_t j = 0; j < g.total_nodes(); ++j) {
        std::int64_t rem = j;
        double rr = 0.0;
        for (int a = g.d - 1; a >= 0; --a) {
            const std::int64_t k = rem % g.n;
            rem /= g.n;
            const double x = g.coord(k);
            rr += x * x;
        }
        f.values[j] = std::exp(-0.5 * rr / (width * width));
    }
    return f;
}

} // namespace

TEST_CASE("kernel spec validation") {
    CHECK_THROWS_AS(KernelSpec::riesz(1.5).validate(1), DomainError);
    CHECK_THROWS_AS(KernelSpec::riesz(0.0).validate(2), DomainError);
    CHECK_THROWS_AS(KernelSpec::product({0.5}).validate(2), DomainError);
    CHECK_THROWS_AS(KernelSpec::product({1.2, 0.5}).validate(2), DomainError);
    CHECK_THROWS_AS(KernelSpec::quartic().validate(2), DomainError);
    CHECK(KernelSpec::product({0.5, 0.7}).effective_alpha() == doctest::Approx(1.2));
    CHECK(KernelSpec::quartic().effective_alpha() == 1.0);
}

TEST_CASE("fft energy equals the direct double sum") {
    {
        const GridSpec g(2, 2.0, 24);
        KernelEnergy ke(g, KernelSpec::riesz(1.0));
        TestFunction f = gaussian_profile(g, 0.7);
        const double via_fft = ke.energy(f.values);
        const double direct = energy_double_sum(g, KernelSpec::riesz(1.0), f.values);
        CHECK(rel(via_fft, direct) < 1e-10);
    }
    {
        const GridSpec g(2, 2.0, 16);
        const KernelSpec kernel = KernelSpec::product({0.5, 0.3});
        KernelEnergy ke(g, kernel);
        TestFunction f = gaussian_profile(g, 0.9);
        CHECK(rel(ke.energy(f.values), energy_double_sum(g, kernel, f.values)) < 1e-10);
    }
    {
        const GridSpec g(1, 4.0, 257);
        KernelEnergy ke(g, KernelSpec::quartic());
        TestFunction f = gaussian_profile(g, 1.1);
        double direct = 0.0;
        for (double v : f.values) direct += v * v * v * v;
        direct *= g.spacing();
        CHECK(ke.energy(f.values) == doctest::Approx(direct).epsilon(1e-14));
    }
}

TEST_CASE("kernel homogeneity under support scaling") {
    const GridSpec g(1, 8.0, 1024);
    const double alpha = 0.5;
    KernelEnergy ke(g, KernelSpec::riesz(alpha));
    const double e1 = ke.energy(gaussian_profile(g, 1.0).values);
    TestFunction f2 = gaussian_profile(g, 0.5); // beta = 2
    for (auto& v : f2.values) v *= std::sqrt(2.0);
    const double e2 = ke.energy(f2.values);
    CHECK(rel(e2 / e1, std::pow(2.0, alpha)) < 5e-3);
}

TEST_CASE("objective gradients match finite differences") {
    const GridSpec g(1, 4.0, 48);
    Rng rng(3);
    for (const auto& kernel : {KernelSpec::riesz(0.5), KernelSpec::quartic()}) {
        KernelEnergy ke(g, kernel);
        std::vector<double> f(g.total_nodes());
        for (auto& v : f) v = 0.5 + rng.uniform();
        std::vector<double> grad(f.size());
        ke.energy_and_gradient(f, grad);
        for (int probe = 0; probe < 10; ++probe) {
            const std::size_t i =
                static_cast<std::size_t>(rng.uniform() * static_cast<double>(f.size()));
            const double eps = 1e-6;
            std::vector<double> fp = f, fm = f;
            fp[i] += eps;
            fm[i] -= eps;
            const double fd = (ke.energy(fp) - ke.energy(fm)) / (2.0 * eps);
            CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("quartic sigma constant (a-29) and feasibility") {
    const GridSpec g(1, 8.0, 512);
    const VariationalSolution sol = maximize_sigma(KernelSpec::quartic(), g, 3000, 1e-11, 3);
    const double sigma_sq = sol.objective * sol.objective;
    CHECK(rel(sigma_sq, 0.75 * std::pow(0.5, 1.5)) < 0.02);
    CHECK(sol.constraint_residual < 1e-8);
    CHECK(sol.constraint == 'G');
    CHECK(sigma_sq < 0.75 * std::pow(0.5, 1.5) * 1.005);
    for (double v : sol.f.values) CHECK(v >= 0.0);
}

TEST_CASE("quartic M constant (a-28) and theta power law (a-7)") {
    const GridSpec g(1, 8.0, 512);
    const double m1 = maximize_M(KernelSpec::quartic(), 1.0, g, 3000, 1e-11, 3).objective;
    CHECK(rel(m1, 0.5 * std::pow(0.75, 2.0 / 3.0)) < 0.02);

    const double m_half = maximize_M(KernelSpec::quartic(), 0.5, g, 3000, 1e-11, 3).objective;
    const double m_two = maximize_M(KernelSpec::quartic(), 2.0, g, 3000, 1e-11, 3).objective;
    const double c1 = m_half / std::pow(0.5, 4.0 / 3.0);
    const double c3 = m_two / std::pow(2.0, 4.0 / 3.0);
    CHECK(rel(c1, m1) < 0.02);
    CHECK(rel(c3, m1) < 0.02);

    const VariationalSolution tiny = maximize_M(KernelSpec::quartic(), 0.01, g, 2000, 1e-10, 1);
    CHECK(tiny.objective < 0.01);
    CHECK(tiny.f.grad() < maximize_M(KernelSpec::quartic(), 1.0, g, 500, 1e-9, 1).f.grad());
}

TEST_CASE("bridge constants close the loop (a-7)/(a-8)") {
    const GridSpec g(1, 8.0, 512);
    const double sigma = maximize_sigma(KernelSpec::quartic(), g, 3000, 1e-11, 3).objective;
    const BridgeConstants b = bridge_constants(sigma, 1.0, 1.0);
    CHECK(rel(b.kappa, 1.0 / std::sqrt(3.0)) < 0.03);
    CHECK(rel(b.m_closed, 0.5 * std::pow(0.75, 2.0 / 3.0)) < 0.03);
    CHECK(b.sigma_closed_check == doctest::Approx(sigma).epsilon(1e-12));

    CHECK_THROWS_AS(bridge_constants(sigma, 2.5, 1.0), DomainError);
    CHECK_THROWS_AS(bridge_constants(-1.0, 1.0, 1.0), DomainError);

    const BridgeConstants b0 = bridge_constants(0.8, 1e-13, 0.7);
    CHECK(b0.kappa == doctest::Approx(0.64).epsilon(1e-9));
    CHECK(b0.m_closed == doctest::Approx(0.8 * 0.7).epsilon(1e-9));
}

TEST_CASE("h constant bookkeeping") {
    const double kappa = 0.37;
    const PotentialModel nw = PotentialModel::newtonian(3, 2.0);
    const double h1 = h_constant(nw, kappa);
    CHECK(h1 > 0.0);
    CHECK(std::isfinite(h1));
    const double a = nw.effective_alpha();
    CHECK(h_constant(nw, 2.0 * kappa) ==
          doctest::Approx(h1 * std::pow(2.0, 2.0 / (4.0 - a))).epsilon(1e-12));
    CHECK_THROWS_AS(h_constant(PotentialModel::white_noise_1d(), kappa), DomainError);

    const double theta = 1.7;
    CHECK(std::pow(theta, 4.0 / (4.0 - a)) * h1 ==
          doctest::Approx(theorem_limit(nw, theta, kappa)).epsilon(1e-12));
}

TEST_CASE("newtonian d=3 kappa pipeline produces a finite h constant") {
    const GridSpec g(3, 6.0, 40);
    const VariationalSolution sol = maximize_sigma(KernelSpec::riesz(1.0), g, 300, 1e-8, 1);
    CHECK(sol.objective > 0.0);
    const BridgeConstants b = bridge_constants(sol.objective, 1.0, 1.0);
    const double h = h_constant(PotentialModel::newtonian(3, 2.0), b.kappa);
    CHECK(h > 0.0);
    CHECK(std::isfinite(h));
}

TEST_CASE("theorem limit values and scalings") {
    const PotentialModel white = PotentialModel::white_noise_1d();
    CHECK(theorem_limit(white, 1.0, std::nullopt) ==
          doctest::Approx(0.5 * std::pow(1.5, 2.0 / 3.0)).epsilon(1e-12));

    const GridSpec g(1, 8.0, 512);
    const double m1 = maximize_M(KernelSpec::quartic(), 1.0, g, 3000, 1e-11, 3).objective;
    CHECK(rel(theorem_limit(white, 1.0, std::nullopt) / m1, std::pow(2.0, 2.0 / 3.0)) < 0.02);

    const PotentialModel rz = PotentialModel::riesz(2, 0.8, 1.3);
    const double a = 0.8;
    CHECK(theorem_limit(rz, 2.0, 0.5) / theorem_limit(rz, 1.0, 0.5) ==
          doctest::Approx(std::pow(2.0, 4.0 / (4.0 - a))).epsilon(1e-12));
    CHECK(theorem_limit(white, 2.0, std::nullopt) / theorem_limit(white, 1.0, std::nullopt) ==
          doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(theorem_limit(rz, 1.0, std::nullopt), DomainError);
}

TEST_CASE("gagliardo-nirenberg inequality checks") {
    const GridSpec g(1, 8.0, 512);
    const double kappa = 1.0 / std::sqrt(3.0);

    const VariationalSolution sol = maximize_sigma(KernelSpec::quartic(), g, 3000, 1e-11, 3);
    const GnCheck at_max = gn_inequality_check(sol.f, KernelSpec::quartic(), kappa);
    CHECK(at_max.holds);
    CHECK(at_max.lhs / at_max.rhs > 0.97);
    CHECK(at_max.lhs / at_max.rhs <= 1.0 + 2e-3); // discrete maximizer may poke above

    Rng rng(99);
    for (int it = 0; it < 100; ++it) {
        TestFunction f;
        f.grid = g;
        f.values.assign(g.total_nodes(), 0.0);
        const int bumps = 1 + static_cast<int>(rng.uniform() * 3.0);
        for (int b = 0; b < bumps; ++b) {
            const double center = 8.0 * (rng.uniform() - 0.5);
            const double width = 0.2 + 2.0 * rng.uniform();
            const double amp = 0.2 + rng.uniform();
            for (std::int64_t k = 0; k < g.n; ++k) {
                const double x = g.coord(k);
                f.values[k] += amp * std::exp(-0.5 * (x - center) * (x - center) /
                                              (width * width));
            }
        }
        const GnCheck chk = gn_inequality_check(f, KernelSpec::quartic(), kappa);
        CHECK(chk.holds);
    }

    TestFunction base = gaussian_profile(g, 1.0);
    TestFunction dil = gaussian_profile(g, 0.5);
    for (auto& v : dil.values) v *= std::sqrt(2.0);
    const GnCheck c1 = gn_inequality_check(base, KernelSpec::quartic(), kappa);
    const GnCheck c2 = gn_inequality_check(dil, KernelSpec::quartic(), kappa);
    CHECK(rel(c1.lhs / c1.rhs, c2.lhs / c2.rhs) < 0.01);

    TestFunction zero;
    zero.grid = g;
    zero.values.assign(g.total_nodes(), 0.0);
    CHECK_THROWS_AS(gn_inequality_check(zero, KernelSpec::quartic(), kappa), DomainError);
}

TEST_CASE("dilation optimality of the F_d maximizer") {
    const GridSpec g(1, 8.0, 512);
    const VariationalSolution sol = maximize_M(KernelSpec::quartic(), 1.0, g, 3000, 1e-11, 3);
    const double grad_norm = sol.f.grad();
    const double alpha = 1.0;
    const double c_g = sol.energy / std::pow(grad_norm, alpha);
    const double beta_star =
        std::pow(0.5 * alpha * std::sqrt(c_g) * std::pow(grad_norm, 0.5 * alpha - 2.0),
                 1.0 / (2.0 - 0.5 * alpha));
    CHECK(std::abs(beta_star - 1.0) < 0.02);
}

TEST_CASE("riesz d=2 sigma is stable under grid refinement and box growth") {
    const KernelSpec kernel = KernelSpec::riesz(1.0);
    const double coarse =
        maximize_sigma(kernel, GridSpec(2, 6.0, 64), 1200, 1e-10, 2).objective;
    const double fine =
        maximize_sigma(kernel, GridSpec(2, 6.0, 128), 1200, 1e-10, 2).objective;
    // same spacing as the coarse grid, 1.5x the box
    const double grown =
        maximize_sigma(kernel, GridSpec(2, 9.0, 97), 1200, 1e-10, 2).objective;
    CHECK(std::abs(fine - coarse) / fine < 0.01);
    CHECK(std::abs(grown - coarse) / grown < 0.01);
}

TEST_CASE("product kernel with equal exponents reduces to riesz in d=1") {
    const GridSpec g(1, 4.0, 128);
    KernelEnergy riesz(g, KernelSpec::riesz(0.6));
    KernelEnergy prod(g, KernelSpec::product({0.6}));
    TestFunction f = gaussian_profile(g, 0.8);
    CHECK(riesz.energy(f.values) == doctest::Approx(prod.energy(f.values)).epsilon(1e-14));
}

TEST_CASE("monotone best-of restarts and larger budgets never hurt") {
    const GridSpec g(1, 8.0, 256);
    const double short_run =
        maximize_sigma(KernelSpec::quartic(), g, 150, 1e-10, 3).objective;
    const double long_run =
        maximize_sigma(KernelSpec::quartic(), g, 1500, 1e-10, 3).objective;
    CHECK(long_run >= short_run - 1e-12);
}
