#include <algorithm>
#include <cmath>
#include <vector>

#include "anderson/mollifier.hpp"
#include "anderson/potentials.hpp"
#include "anderson/quadrature.hpp"

namespace anderson {

namespace {

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

double angular_const(int d) {
    static const double a[3] = {1.0 / M_PI, 1.0 / (2.0 * M_PI), 1.0 / (2.0 * M_PI * M_PI)};
    return a[d - 1];
}

// Catmull-Rom on a uniform table.
double cubic_uniform(const std::vector<double>& tab, double t) {
    const std::size_t last = tab.size() - 1;
    if (t <= 0.0) return tab[0];
    if (t >= static_cast<double>(last)) return tab[last];
    const std::size_t k = static_cast<std::size_t>(t);
    const double f = t - static_cast<double>(k);
    const double p1 = tab[k];
    const double p2 = tab[std::min(k + 1, last)];
    const double p0 = k > 0 ? tab[k - 1] : 2.0 * p1 - p2;
    const double p3 = k + 2 <= last ? tab[k + 2] : 2.0 * p2 - p1;
    const double a = 2.0 * p1;
    const double b = p2 - p0;
    const double c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    const double e = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    return 0.5 * (a + b * f + c * f * f + e * f * f * f);
}

} // namespace

struct MollifiedCovariance::Impl {
    PotentialModel model;
    double eps;
    double r_max;

    enum class Backend { White, Radial, Product } backend;

    // Radial backend: bare-kernel amplitude and spectral data
    double alpha = 0.0;
    double rho0 = 0.0; // spectral density rho0 * s^{alpha-d}
    double amp = 0.0;  // gamma(r) = amp * r^{-alpha}

    // inner table on [0, 3 eps] (spectral leg), uniform
    double inner_dr = 0.0;
    std::vector<double> inner;
    // outer table on (3 eps, r_max] (real-space leg), log-log
    double log_r0 = 0.0, dlog = 0.0;
    std::vector<double> outer_log;

    double spectral_leg(double r) const {
        const int d = model.d;
        const double s_cut = mollifier::filter_cutoff(d) / eps;
        const double phase = r * s_cut;
        const int panels =
            std::min(20000, 8 + static_cast<int>(phase / (10.0 * alpha)));
        const double v = integrate_power_weight(
            [&](double s) {
                return radial_kernel(d, r * s) * mollifier::filter(d, eps, s);
            },
            alpha, s_cut, panels, 32);
        return angular_const(d) * rho0 * v;
    }

    double realspace_leg(double r) const {
        const int d = model.d;
        const double e = eps;
        auto bare = [&](double s) { return amp * std::pow(s, -alpha); };
        switch (d) {
            case 1:
                return integrate(
                    [&](double u) {
                        return mollifier::autocorrelation_profile(1, u) * bare(std::abs(r - e * u));
                    },
                    -2.0, 2.0, 12, 32);
            case 2: {
                // polar over the support of L
                const int n_ang = 48;
                return integrate(
                    [&](double rho) {
                        const double L = mollifier::autocorrelation_profile(2, rho);
                        if (L == 0.0) return 0.0;
                        double ang = 0.0;
                        for (int i = 0; i < n_ang; ++i) {
                            const double phi = 2.0 * M_PI * (i + 0.5) / n_ang;
                            const double dist = std::sqrt(r * r - 2.0 * r * e * rho * std::cos(phi) +
                                                          e * e * rho * rho);
                            ang += bare(dist);
                        }
                        return L * rho * ang * (2.0 * M_PI / n_ang);
                    },
                    0.0, 2.0, 10, 32);
            }
            default: {
                return integrate(
                    [&](double rho) {
                        const double L = mollifier::autocorrelation_profile(3, rho);
                        if (L == 0.0) return 0.0;
                        const double inner_int = integrate(
                            [&](double c) {
                                const double dist = std::sqrt(
                                    r * r - 2.0 * r * e * rho * c + e * e * rho * rho);
                                return bare(dist);
                            },
                            -1.0, 1.0, 6, 32);
                        return 2.0 * M_PI * L * rho * rho * inner_int;
                    },
                    0.0, 2.0, 10, 32);
            }
        }
    }

    // Product backend (fractional, d = 2): nested quadrature of
    // C_H int L(|u|) prod_j |x_j - eps u_j|^{-alpha_j} du over |u| <= 2.
    double product_eval(std::span<const double> lag) const {
        const double a1 = 2.0 - 2.0 * model.hurst[0];
        const double a2 = 2.0 - 2.0 * model.hurst[1];
        const double x1 = std::abs(lag[0]);
        const double x2 = std::abs(lag[1]);
        auto inner_integral = [&](double u2) {
            auto g = [&](double u1) {
                return mollifier::autocorrelation_profile(2, std::sqrt(u1 * u1 + u2 * u2));
            };
            return axis_integral(g, x1, a1);
        };
        auto outer_g = [&](double u2) { return inner_integral(u2); };
        const double v = axis_integral(outer_g, x2, a2);
        return model.amplitude() * v;
    }

    // int_{t0}^{t1} t^{-a} g(t) dt via the exact substitution v = t^{1-a}.
    template <typename G>
    static double power_segment(G&& g, double a, double t0, double t1) {
        const double q = 1.0 - a;
        const double v0 = std::pow(t0, q);
        const double v1 = std::pow(t1, q);
        return integrate([&](double v) { return g(std::pow(v, 1.0 / q)); }, v0, v1, 8, 24) / q;
    }

    // int_{-2}^{2} |x - eps u|^{-a} g(u) du for x >= 0; the power weight is
    // removed exactly around its singular point u* = x/eps.
    template <typename G>
    double axis_integral(G&& g, double x, double a) const {
        const double e = eps;
        const double ustar = x / e;
        double total;
        if (ustar >= 2.0) {
            // singularity at or beyond the right edge: t = ustar - u in [ustar-2, ustar+2]
            total = power_segment([&](double t) { return g(ustar - t); }, a, ustar - 2.0,
                                  ustar + 2.0);
        } else {
            total = power_segment([&](double t) { return g(ustar - t); }, a, 0.0, ustar + 2.0) +
                    power_segment([&](double t) { return g(ustar + t); }, a, 0.0, 2.0 - ustar);
        }
        return total * std::pow(e, -a);
    }

    double radial_value(double r) const {
        if (backend == Backend::White) {
            return mollifier::autocorrelation_profile(1, r / eps) / eps;
        }
        r = std::abs(r);
        if (r <= 3.0 * eps) return cubic_uniform(inner, r / inner_dr);
        const double lr = std::log(std::min(r, r_max));
        return std::exp(cubic_uniform(outer_log, (lr - log_r0) / dlog));
    }
};

MollifiedCovariance::MollifiedCovariance(const PotentialModel& model, double eps, double r_max)
    : impl_(new Impl) {
    model.validate();
    if (!(eps > 0.0)) throw DomainError("MollifiedCovariance: epsilon must be positive");
    impl_->model = model;
    impl_->eps = eps;
    impl_->r_max = std::max(r_max, 4.0 * eps);

    if (model.variant == PotentialVariant::WhiteNoise1D) {
        impl_->backend = Impl::Backend::White;
        return;
    }
    if (model.variant == PotentialVariant::FractionalWhiteNoise && model.d >= 2) {
        if (model.d > 2)
            throw DomainError("MollifiedCovariance: fractional model supported for d <= 2");
        impl_->backend = Impl::Backend::Product;
        return;
    }

    impl_->backend = Impl::Backend::Radial;
    const double a = model.effective_alpha();
    impl_->alpha = a;
    impl_->amp = model.amplitude();
    if (model.variant == PotentialVariant::FractionalWhiteNoise) {
        impl_->rho0 = fractional_axis_coefficient(model.hurst[0]);
    } else {
        impl_->rho0 = model.amplitude() * riesz_spectral_coefficient(model.d, a);
    }

    // Inner table from the spectral leg.
    const int inner_count = 3 * 24 + 1;
    impl_->inner_dr = 3.0 * eps / (inner_count - 1);
    impl_->inner.resize(inner_count);
    for (int k = 0; k < inner_count; ++k)
        impl_->inner[k] = impl_->spectral_leg(k * impl_->inner_dr);

    // Outer table from the real-space leg, 64 points per decade of r.
    const double r0 = 3.0 * eps;
    const double span = std::max(impl_->r_max / r0, 1.0 + 1e-9);
    const int outer_count = std::max(4, static_cast<int>(64.0 * std::log10(span)) + 2);
    impl_->log_r0 = std::log(r0);
    impl_->dlog = std::log(span) / (outer_count - 1);
    impl_->outer_log.resize(outer_count);
    for (int k = 0; k < outer_count; ++k) {
        const double r = std::exp(impl_->log_r0 + k * impl_->dlog);
        impl_->outer_log[k] = std::log(impl_->realspace_leg(r));
    }
}

MollifiedCovariance::~MollifiedCovariance() = default;
MollifiedCovariance::MollifiedCovariance(MollifiedCovariance&&) noexcept = default;

double MollifiedCovariance::radial(double r) const {
    if (impl_->backend == Impl::Backend::Product)
        throw DomainError("MollifiedCovariance::radial: model is not radial");
    return impl_->radial_value(r);
}

double MollifiedCovariance::at(std::span<const double> lag) const {
    if (static_cast<int>(lag.size()) != impl_->model.d)
        throw DomainError("MollifiedCovariance::at: lag dimension mismatch");
    if (impl_->backend == Impl::Backend::Product) return impl_->product_eval(lag);
    double s = 0.0;
    for (double v : lag) s += v * v;
    return impl_->radial_value(std::sqrt(s));
}

double MollifiedCovariance::at_zero() const {
    if (impl_->backend == Impl::Backend::Product) {
        const double zero[2] = {0.0, 0.0};
        return impl_->product_eval(std::span<const double>(zero, 2));
    }
    return impl_->radial_value(0.0);
}

const PotentialModel& MollifiedCovariance::model() const { return impl_->model; }
double MollifiedCovariance::epsilon() const { return impl_->eps; }

} // namespace anderson
