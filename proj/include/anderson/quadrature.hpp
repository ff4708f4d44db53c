#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace anderson {

/// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by
/// Newton iteration on the Legendre recurrence.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int order) {
        nodes.resize(order);
        weights.resize(order);
        const int m = (order + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < order; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = order * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[order - 1 - i] = weights[i];
        }
    }

    static const GaussLegendre& order32() {
        static const GaussLegendre g(32);
        return g;
    }
};

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
template <typename F>
double integrate(F&& f, double a, double b, int panels = 8, int order = 32) {
    const GaussLegendre& g = (order == 32) ? GaussLegendre::order32() : GaussLegendre(order);
    const double w = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w;
        const double mid = lo + 0.5 * w;
        double s = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            s += g.weights[i] * f(mid + 0.5 * w * g.nodes[i]);
        sum += 0.5 * w * s;
    }
    return sum;
}

/// Integral of x^(beta-1) f(x) over [0, b] for beta > 0 via the exact
/// substitution u = x^beta, which removes the endpoint singularity.
template <typename F>
double integrate_power_weight(F&& f, double beta, double b, int panels = 8, int order = 32) {
    const double ub = std::pow(b, beta);
    return integrate([&](double u) { return f(std::pow(u, 1.0 / beta)); }, 0.0, ub, panels,
                     order) /
           beta;
}

/// Globally adaptive Gauss-Kronrod-free refinement: split the panel with
/// the largest estimated error until the total estimate meets tol.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol, int max_depth = 18) {
    std::function<double(double, double, double, int)> rec =
        [&](double lo, double hi, double whole, int depth) -> double {
        const double mid = 0.5 * (lo + hi);
        const double left = integrate(f, lo, mid, 1, 16);
        const double right = integrate(f, mid, hi, 1, 16);
        if (depth >= max_depth ||
            std::abs(left + right - whole) <=
                rel_tol * (std::abs(left) + std::abs(right) + 1e-300))
            return left + right;
        return rec(lo, mid, left, depth + 1) + rec(mid, hi, right, depth + 1);
    };
    return rec(a, b, integrate(f, a, b, 1, 16), 0);
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(U > x) for standard normal U.
inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

} // namespace anderson
