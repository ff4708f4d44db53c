#include "anderson/potentials.hpp"

#include <cmath>
#include <sstream>

#include "anderson/quadrature.hpp"

namespace anderson {

namespace {

double norm_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// Surface measure of S^{d-1}.
double sphere_area(int d) {
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

} // namespace

double fractional_axis_coefficient(double hurst) {
    return std::tgamma(2.0 * hurst + 1.0) * std::sin(M_PI * hurst);
}

PotentialModel PotentialModel::riesz(int d, double alpha, double c_gamma) {
    PotentialModel m;
    m.variant = PotentialVariant::RieszExact;
    m.d = d;
    m.alpha = alpha;
    m.c_gamma = c_gamma;
    m.validate();
    return m;
}

PotentialModel PotentialModel::newtonian(int d, double p) {
    PotentialModel m;
    m.variant = PotentialVariant::NewtonianDriven;
    m.d = d;
    m.p = p;
    m.validate();
    return m;
}

PotentialModel PotentialModel::fractional(std::vector<double> hurst) {
    PotentialModel m;
    m.variant = PotentialVariant::FractionalWhiteNoise;
    m.d = static_cast<int>(hurst.size());
    m.hurst = std::move(hurst);
    m.validate();
    return m;
}

PotentialModel PotentialModel::white_noise_1d() {
    PotentialModel m;
    m.variant = PotentialVariant::WhiteNoise1D;
    m.d = 1;
    m.validate();
    return m;
}

void PotentialModel::validate() const {
    if (d < 1) throw DomainError("PotentialModel: dimension must be positive");
    switch (variant) {
        case PotentialVariant::RieszExact: {
            const double cap = std::min(2.0, static_cast<double>(d));
            if (!(alpha > 0.0 && alpha < cap))
                throw DomainError("RieszExact: require 0 < alpha < min(2, d)");
            if (!(c_gamma > 0.0)) throw DomainError("RieszExact: require c_gamma > 0");
            break;
        }
        case PotentialVariant::NewtonianDriven: {
            if (!(p > 0.5 * d))
                throw DomainError("NewtonianDriven: inequality p > d/2 violated");
            if (!(p < 0.5 * (d + 2)))
                throw DomainError("NewtonianDriven: inequality p < (d+2)/2 violated");
            if (!(p < static_cast<double>(d)))
                throw DomainError("NewtonianDriven: inequality p < d violated");
            break;
        }
        case PotentialVariant::FractionalWhiteNoise: {
            if (static_cast<int>(hurst.size()) != d)
                throw DomainError("FractionalWhiteNoise: need one Hurst index per axis");
            double sum = 0.0;
            for (double h : hurst) {
                if (!(h > 0.5 && h < 1.0))
                    throw DomainError("FractionalWhiteNoise: require 1/2 < H_j < 1");
                sum += h;
            }
            if (!(sum > d - 1.0))
                throw DomainError("FractionalWhiteNoise: require sum H_j > d - 1");
            break;
        }
        case PotentialVariant::WhiteNoise1D:
            if (d != 1) throw DomainError("WhiteNoise1D: dimension must be 1");
            break;
    }
}

double PotentialModel::effective_alpha() const {
    switch (variant) {
        case PotentialVariant::RieszExact:
            return alpha;
        case PotentialVariant::NewtonianDriven:
            return 2.0 * p - d;
        case PotentialVariant::FractionalWhiteNoise: {
            double sum = 0.0;
            for (double h : hurst) sum += h;
            return 2.0 * d - 2.0 * sum;
        }
        case PotentialVariant::WhiteNoise1D:
            return 1.0; // delta_0 scaling convention in d = 1
    }
    return 0.0;
}

double PotentialModel::amplitude() const {
    switch (variant) {
        case PotentialVariant::RieszExact:
            return c_gamma;
        case PotentialVariant::NewtonianDriven:
            return newtonian_coupling(d, p);
        case PotentialVariant::FractionalWhiteNoise: {
            double prod = 1.0;
            for (double h : hurst) prod *= h * (2.0 * h - 1.0);
            return prod;
        }
        case PotentialVariant::WhiteNoise1D:
            return 1.0;
    }
    return 0.0;
}

std::string PotentialModel::tag() const {
    switch (variant) {
        case PotentialVariant::RieszExact:
            return "riesz";
        case PotentialVariant::NewtonianDriven:
            return "newtonian";
        case PotentialVariant::FractionalWhiteNoise:
            return "fwn";
        case PotentialVariant::WhiteNoise1D:
            return "white1d";
    }
    return "?";
}

double newtonian_coupling(int d, double p) {
    if (!(p > 0.5 * d)) throw DomainError("newtonian_coupling: inequality p > d/2 violated");
    if (!(p < 0.5 * (d + 2)))
        throw DomainError("newtonian_coupling: inequality p < (d+2)/2 violated");
    if (!(p < static_cast<double>(d)))
        throw DomainError("newtonian_coupling: inequality p < d violated");
    const double log_c = 0.5 * d * std::log(M_PI) + 2.0 * std::lgamma(0.5 * (d - p)) +
                         std::lgamma(0.5 * (2.0 * p - d)) - 2.0 * std::lgamma(0.5 * p) -
                         std::lgamma(static_cast<double>(d) - p);
    return std::exp(log_c);
}

double covariance(const PotentialModel& model, std::span<const double> x) {
    model.validate();
    if (static_cast<int>(x.size()) != model.d)
        throw DomainError("covariance: point dimension mismatch");
    switch (model.variant) {
        case PotentialVariant::RieszExact: {
            const double r = norm_of(x);
            if (r == 0.0) throw DomainError("covariance: singular point x = 0");
            return model.c_gamma * std::pow(r, -model.alpha);
        }
        case PotentialVariant::NewtonianDriven: {
            const double r = norm_of(x);
            if (r == 0.0) throw DomainError("covariance: singular point x = 0");
            return newtonian_coupling(model.d, model.p) *
                   std::pow(r, -(2.0 * model.p - model.d));
        }
        case PotentialVariant::FractionalWhiteNoise: {
            double prod = model.amplitude();
            for (int a = 0; a < model.d; ++a) {
                if (x[a] == 0.0)
                    throw DomainError("covariance: singular point (coordinate zero)");
                prod *= std::pow(std::abs(x[a]), -(2.0 - 2.0 * model.hurst[a]));
            }
            return prod;
        }
        case PotentialVariant::WhiteNoise1D:
            throw DomainError("covariance: no pointwise covariance (gamma = delta_0)");
    }
    return 0.0;
}

double riesz_spectral_coefficient(int d, double alpha) {
    if (!(alpha > 0.0 && alpha < d))
        throw DomainError("riesz_spectral_coefficient: require 0 < alpha < d");
    return std::pow(2.0, d - alpha) * std::pow(M_PI, 0.5 * d) *
           std::exp(std::lgamma(0.5 * (d - alpha)) - std::lgamma(0.5 * alpha));
}

double spectral_density(const PotentialModel& model, std::span<const double> lambda) {
    model.validate();
    if (static_cast<int>(lambda.size()) != model.d)
        throw DomainError("spectral_density: point dimension mismatch");
    switch (model.variant) {
        case PotentialVariant::RieszExact:
        case PotentialVariant::NewtonianDriven: {
            const double r = norm_of(lambda);
            if (r == 0.0) throw DomainError("spectral_density: singular point lambda = 0");
            const double a = model.effective_alpha();
            return model.amplitude() * riesz_spectral_coefficient(model.d, a) *
                   std::pow(r, a - model.d);
        }
        case PotentialVariant::FractionalWhiteNoise: {
            double prod = 1.0;
            for (int a = 0; a < model.d; ++a) {
                if (lambda[a] == 0.0)
                    throw DomainError("spectral_density: singular point (coordinate zero)");
                prod *= fractional_axis_coefficient(model.hurst[a]) *
                        std::pow(std::abs(lambda[a]), 1.0 - 2.0 * model.hurst[a]);
            }
            return prod;
        }
        case PotentialVariant::WhiteNoise1D:
            return 1.0;
    }
    return 0.0;
}

std::vector<double> spectral_integrability(const PotentialModel& model, double delta,
                                           std::span<const double> cutoffs) {
    model.validate();
    if (!(delta > 0.0 && delta < 1.0))
        throw DomainError("spectral_integrability: require 0 < delta < 1");
    const double a = model.effective_alpha();

    // All four models reduce to C_rad * int_0^L r^{a-1} (1+r^2)^{delta-1} dr.
    double c_rad = 0.0;
    switch (model.variant) {
        case PotentialVariant::RieszExact:
        case PotentialVariant::NewtonianDriven:
            c_rad = model.amplitude() * riesz_spectral_coefficient(model.d, a) *
                    sphere_area(model.d);
            break;
        case PotentialVariant::WhiteNoise1D:
            c_rad = 2.0;
            break;
        case PotentialVariant::FractionalWhiteNoise: {
            // int_{S^{d-1}} prod |w_j|^{1-2H_j} dw = 2 prod Gamma(1-H_j) / Gamma(sum(1-H_j)).
            double log_ang = std::log(2.0);
            double s = 0.0;
            for (double h : model.hurst) {
                log_ang += std::lgamma(1.0 - h);
                s += 1.0 - h;
            }
            log_ang -= std::lgamma(s);
            double coef = 1.0;
            for (double h : model.hurst) coef *= fractional_axis_coefficient(h);
            c_rad = coef * std::exp(log_ang);
            break;
        }
    }

    std::vector<double> out;
    out.reserve(cutoffs.size());
    double prev_cut = 0.0;
    double acc = 0.0;
    for (double cut : cutoffs) {
        if (!(cut > prev_cut))
            throw DomainError("spectral_integrability: cutoffs must be increasing and positive");
        if (prev_cut == 0.0) {
            acc = integrate_power_weight(
                [&](double r) { return std::pow(1.0 + r * r, delta - 1.0); }, a, cut, 16, 32);
        } else {
            acc += integrate([&](double r) { return std::pow(r, a - 1.0) *
                                                    std::pow(1.0 + r * r, delta - 1.0); },
                             prev_cut, cut, 16, 32);
        }
        out.push_back(c_rad * acc);
        prev_cut = cut;
    }
    return out;
}

} // namespace anderson
