#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "anderson/grid.hpp"

namespace anderson {

enum class PotentialVariant { RieszExact, NewtonianDriven, FractionalWhiteNoise, WhiteNoise1D };

/// One of the four Gaussian potential classes with its parameters.
struct PotentialModel {
    PotentialVariant variant = PotentialVariant::WhiteNoise1D;
    int d = 1;
    double alpha = 0.0;         // RieszExact
    double c_gamma = 0.0;       // RieszExact
    double p = 0.0;             // NewtonianDriven
    std::vector<double> hurst;  // FractionalWhiteNoise

    static PotentialModel riesz(int d, double alpha, double c_gamma);
    static PotentialModel newtonian(int d, double p);
    static PotentialModel fractional(std::vector<double> hurst);
    static PotentialModel white_noise_1d();

    void validate() const;

    /// The singularity exponent: alpha, 2p-d, 2d-2*sum(H), or 1 (white noise).
    double effective_alpha() const;

    /// Covariance amplitude: c(gamma), C(d,p), C_H = prod H_j(2H_j-1), or 1.
    double amplitude() const;

    std::string tag() const;
};

/// C(d,p) = pi^{d/2} Gamma^2((d-p)/2) Gamma((2p-d)/2) / (Gamma^2(p/2) Gamma(d-p)).
double newtonian_coupling(int d, double p);

/// gamma(x); throws DomainError on singular points and for white noise.
double covariance(const PotentialModel& model, std::span<const double> x);

/// Lebesgue density of the spectral measure mu at lambda.
double spectral_density(const PotentialModel& model, std::span<const double> lambda);

/// Fourier coefficient of the Riesz kernel: F(|x|^-alpha) = coef * |lambda|^{alpha-d}.
double riesz_spectral_coefficient(int d, double alpha);

/// Per-axis spectral coefficient of the fractional factor:
/// F(H(2H-1)|x|^{2H-2})(lambda) = coef * |lambda|^{1-2H}.
double fractional_axis_coefficient(double hurst);

/// Partial integrals I(Lambda) = int_{|lambda|<=Lambda} (1+|lambda|^2)^{-(1-delta)} mu(dlambda).
std::vector<double> spectral_integrability(const PotentialModel& model, double delta,
                                           std::span<const double> cutoffs);

/// One realization of the mollified potential V_eps on a grid.
struct FieldSample {
    GridSpec grid;
    PotentialModel model;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values;
};

/// Evaluator for the mollified covariance
///   gamma_eps(x) = (2pi)^-d int e^{i lambda x} |F(l)(eps lambda)|^2 mu(dlambda).
/// Radial models use a radial table (spectral quadrature near 0, real-space
/// convolution of gamma with l*l further out); the fractional product model
/// uses the convolution with per-axis singular substitutions.
class MollifiedCovariance {
public:
    MollifiedCovariance(const PotentialModel& model, double eps, double r_max);
    ~MollifiedCovariance();
    MollifiedCovariance(MollifiedCovariance&&) noexcept;

    /// Radial evaluation (radial models only; throws for fractional d >= 2).
    double radial(double r) const;

    /// General lag evaluation (all models).
    double at(std::span<const double> lag) const;

    double at_zero() const;

    const PotentialModel& model() const;
    double epsilon() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Stationary Gaussian sampler for a fixed (model, grid, eps) triple.
/// Precomputes the circulant-embedding spectrum once; each seed costs one FFT.
class FieldSynthesizer {
public:
    FieldSynthesizer(const PotentialModel& model, const GridSpec& grid, double eps);
    ~FieldSynthesizer();
    FieldSynthesizer(FieldSynthesizer&&) noexcept;

    FieldSample sample(std::uint64_t seed) const;

    /// Quadrature value of gamma_eps at a lag (the synthesis target).
    double target_covariance(std::span<const double> lag) const;
    double target_variance() const;

    const GridSpec& grid() const;
    const PotentialModel& model() const;
    double epsilon() const;

    /// Padding factor that succeeded (1 for the i.i.d. white-noise path).
    int padding_factor() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

FieldSample synthesize_field(const PotentialModel& model, const GridSpec& grid, double eps,
                             std::uint64_t seed);

struct CovarianceEstimate {
    std::vector<std::int64_t> lag;
    double estimate = 0.0;
    double standard_error = 0.0;
};

/// Unbiased cross-seed covariance estimates (translation-averaged within each
/// sample, mean known to be zero). Requires >= 2 samples sharing one
/// (model, grid, eps).
std::vector<CovarianceEstimate> empirical_covariance(
    std::span<const FieldSample> samples, const std::vector<std::vector<std::int64_t>>& lags);

} // namespace anderson
