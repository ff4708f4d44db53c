#include "anderson/mollifier.hpp"

#include <cmath>
#include <mutex>

#include "anderson/quadrature.hpp"

namespace anderson {
namespace mollifier {

namespace {

// Unnormalized radial bump supported on r < 1/2.
double bump(double r) {
    const double q = 2.0 * r;
    if (q >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - q * q));
}

// Radial Fourier kernels: e^{-i s.x} integrated over the sphere of radius r
// divided by the surface measure, i.e. cos, J0, sinc for d = 1, 2, 3.
double radial_kernel(int d, double u) {
    switch (d) {
        case 1:
            return std::cos(u);
        case 2:
            return std::cyl_bessel_j(0.0, u);
        default:
            return u == 0.0 ? 1.0 : std::sin(u) / u;
    }
}

struct Table {
    double ds = 0.0;
    std::vector<double> phi;     // F(m)(k * ds), normalized so phi[0] = 1
    double cutoff = 0.0;         // last tabulated s
    double filter_cutoff = 0.0;  // s beyond which phi^4 < 1e-16

    double eval(double s) const {
        s = std::abs(s);
        if (s >= cutoff) return 0.0;
        const double t = s / ds;
        const std::size_t k = static_cast<std::size_t>(t);
        const double f = t - static_cast<double>(k);
        // Catmull-Rom cubic on the uniform table.
        const double p1 = phi[k];
        const double p2 = phi[k + 1];
        const double p0 = k > 0 ? phi[k - 1] : 2.0 * p1 - p2;
        const double p3 = k + 2 < phi.size() ? phi[k + 2] : 2.0 * p2 - p1;
        const double a = 2.0 * p1;
        const double b = p2 - p0;
        const double c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
        const double e = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
        return 0.5 * (a + b * f + c * f * f + e * f * f * f);
    }
};

Table build_table(int d) {
    Table t;
    t.ds = 0.1;
    const double s_max = 250.0;
    const std::size_t count = static_cast<std::size_t>(s_max / t.ds) + 2;
    t.phi.resize(count);
    const double norm = integrate(
        [&](double r) { return bump(r) * std::pow(r, d - 1); }, 0.0, 0.5, 8, 32);
    for (std::size_t k = 0; k < count; ++k) {
        const double s = static_cast<double>(k) * t.ds;
        // Enough panels to resolve the oscillation of the radial kernel.
        const int panels = 8 + static_cast<int>(0.5 * s / (2.0 * M_PI) * 2.0);
        t.phi[k] = integrate([&](double r) { return bump(r) * radial_kernel(d, s * r) *
                                                    std::pow(r, d - 1); },
                             0.0, 0.5, panels, 32) /
                   norm;
    }
    t.cutoff = static_cast<double>(count - 2) * t.ds;
    // First point after which phi^4 stays below 1e-16.
    double suffix_max = 0.0;
    std::size_t cut = 0;
    for (std::size_t k = count; k-- > 0;) {
        const double p2 = t.phi[k] * t.phi[k];
        suffix_max = std::max(suffix_max, p2 * p2);
        if (suffix_max >= 1e-16) {
            cut = k + 1;
            break;
        }
    }
    t.filter_cutoff = std::min(t.cutoff, static_cast<double>(cut) * t.ds);
    return t;
}

const Table& table(int d) {
    static Table tables[3];
    static std::once_flag flags[3];
    if (d < 1 || d > 3) throw DomainError("mollifier: dimension must be 1, 2 or 3");
    std::call_once(flags[d - 1], [d] { tables[d - 1] = build_table(d); });
    return tables[d - 1];
}

struct ProfileTable {
    double dr = 0.0;
    std::vector<double> val;

    double eval(double rho) const {
        rho = std::abs(rho);
        if (rho >= 2.0) return 0.0;
        const double t = rho / dr;
        const std::size_t k = static_cast<std::size_t>(t);
        const double f = t - static_cast<double>(k);
        const double p1 = val[k];
        const double p2 = k + 1 < val.size() ? val[k + 1] : 0.0;
        const double p0 = k > 0 ? val[k - 1] : p2; // even at 0
        const double p3 = k + 2 < val.size() ? val[k + 2] : 0.0;
        const double a = 2.0 * p1;
        const double b = p2 - p0;
        const double c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
        const double e = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
        return 0.5 * (a + b * f + c * f * f + e * f * f * f);
    }
};

// Radial profile of L = l*l via the inverse transform of F(l)^2 = phi^4.
ProfileTable build_profile(int d) {
    const Table& t = table(d);
    ProfileTable p;
    p.dr = 1.0 / 256.0;
    const std::size_t count = static_cast<std::size_t>(2.0 / p.dr) + 2;
    p.val.resize(count);
    const double s_cut = t.filter_cutoff;
    for (std::size_t k = 0; k < count; ++k) {
        const double rho = static_cast<double>(k) * p.dr;
        const int panels = 8 + static_cast<int>(s_cut * std::max(rho, 1.0) / (2.0 * M_PI));
        double integral = integrate(
            [&](double s) {
                const double ph = t.eval(s);
                const double f2 = ph * ph;
                return f2 * f2 * radial_kernel(d, s * rho) * std::pow(s, d - 1);
            },
            0.0, s_cut, panels, 32);
        static const double angular[3] = {1.0 / M_PI, 1.0 / (2.0 * M_PI),
                                          1.0 / (2.0 * M_PI * M_PI)};
        p.val[k] = angular[d - 1] * integral;
    }
    // Rescale so the tabulated density integrates to exactly 1; this keeps
    // the real-space covariance leg consistent with the spectral leg.
    static const double sphere[3] = {2.0, 2.0 * M_PI, 4.0 * M_PI};
    double mass = 0.0; // Simpson on the uniform table
    for (std::size_t k = 0; k + 2 < count; k += 2) {
        const double r0 = static_cast<double>(k) * p.dr;
        const double r1 = r0 + p.dr;
        const double r2 = r0 + 2.0 * p.dr;
        mass += (p.dr / 3.0) * (p.val[k] * std::pow(r0, d - 1) +
                                4.0 * p.val[k + 1] * std::pow(r1, d - 1) +
                                p.val[k + 2] * std::pow(r2, d - 1));
    }
    mass *= sphere[d - 1];
    for (auto& v : p.val) v /= mass;
    // L = l*l is a nonnegative function; clamp residual quadrature noise.
    for (auto& v : p.val) v = std::max(v, 0.0);
    return p;
}

const ProfileTable& profile(int d) {
    static ProfileTable tables[3];
    static std::once_flag flags[3];
    if (d < 1 || d > 3) throw DomainError("mollifier: dimension must be 1, 2 or 3");
    std::call_once(flags[d - 1], [d] { tables[d - 1] = build_profile(d); });
    return tables[d - 1];
}

} // namespace

double fourier_m(int d, double s) { return table(d).eval(s); }

double fourier_l(int d, double s) {
    const double p = table(d).eval(s);
    // Interpolation can overshoot the exact bound by rounding-level amounts.
    return std::min(1.0, p * p);
}

double filter(int d, double eps, double s) {
    const double p = fourier_l(d, eps * s);
    return p * p;
}

double filter_cutoff(int d) { return table(d).filter_cutoff; }

double autocorrelation_profile(int d, double rho) { return profile(d).eval(rho); }

double autocorrelation_at_zero(int d) { return profile(d).eval(0.0); }

double mollifier_fourier(int d, double eps, double lambda_norm) {
    if (!(eps > 0.0)) throw DomainError("mollifier_fourier: epsilon must be positive");
    return fourier_l(d, eps * lambda_norm);
}

} // namespace mollifier
} // namespace anderson
