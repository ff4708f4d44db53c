#pragma once

// Test-side oracles, kept independent of the library implementation paths
// they are used to check.

#include <cmath>
#include <vector>

#include "anderson/quadrature.hpp"

namespace oracles {

// int_{R^d} |x|^-p |x-e|^-p dx with |e| = 1, by radial reduction with an
// adaptive angular integral and power-substituted panels around r = 1.
inline double newtonian_integral(int d, double p) {
    using anderson::integrate;
    using anderson::integrate_adaptive;
    auto angular = [&](double r) {
        if (d == 3) {
            return 2.0 * M_PI *
                   integrate_adaptive(
                       [&](double u) { return std::pow(r * r + 1.0 - 2.0 * r * u, -0.5 * p); },
                       -1.0, 1.0, 1e-9);
        }
        return 2.0 * integrate_adaptive(
                         [&](double phi) {
                             return std::pow(r * r + 1.0 - 2.0 * r * std::cos(phi), -0.5 * p);
                         },
                         0.0, M_PI, 1e-9);
    };
    auto radial = [&](double r) { return std::pow(r, (d - 1) - p) * angular(r); };
    // The integrable singularity sits at r = 1; keep it on panel edges so
    // quadrature nodes never touch it.
    double total = integrate_adaptive(radial, 0.0, 1.0, 1e-7, 24) +
                   integrate_adaptive(radial, 1.0, 2.0, 1e-7, 24);
    total += integrate_adaptive(
        [&](double v) {
            const double r = 2.0 * std::exp(v);
            return radial(r) * r;
        },
        0.0, std::log(1e5), 1e-8);
    return total;
}

// Fourier transform of the radially truncated Riesz kernel |x|^-1 in R^2 at
// |lambda| = 1: partial integrals 2 pi int_0^X J0(r) dr oscillate around the
// limit; averaging over one period at large X suppresses the oscillation.
inline double riesz2_fourier_truncated_oracle() {
    using anderson::integrate;
    const double x0 = 400.0;
    auto partial = [&](double x) {
        return 2.0 * M_PI *
               integrate([](double r) { return std::cyl_bessel_j(0.0, r); }, 0.0, x,
                         static_cast<int>(x / 2.0), 16);
    };
    // average of P(X) over one Bessel oscillation period (~2 pi)
    const int samples = 16;
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) acc += partial(x0 + 2.0 * M_PI * i / samples);
    return acc / samples;
}

} // namespace oracles
