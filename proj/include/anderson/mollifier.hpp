#pragma once

#include <vector>

#include "anderson/errors.hpp"

namespace anderson {

/// Fixed mollifier machinery. The mollifier is l = m * m, where m is the
/// radial smooth bump m(x) ∝ exp(-1/(1-(2|x|)^2)) supported on {|x| <= 1/2},
/// so l is a smooth symmetric probability density supported on {|x| <= 1}
/// with F(l) = F(m)^2 >= 0.
///
/// All radial transforms are tabulated once per dimension by quadrature and
/// interpolated (cubic). F here follows the convention
/// F(f)(lambda) = ∫ f(x) e^{-i lambda·x} dx, so F(m)(0) = F(l)(0) = 1.
namespace mollifier {

/// F(m)(s) for radial frequency s = |lambda| (dimension-dependent).
double fourier_m(int d, double s);

/// F(l)(s) = F(m)(s)^2; the value exposed by the mollifier_fourier op.
double fourier_l(int d, double s);

/// |F(l_eps)(lambda)|^2 = F(l)(eps |lambda|)^2: the spectral filter applied
/// to the spectral measure by mollification.
double filter(int d, double eps, double s);

/// Smallest radial frequency beyond which filter(d, ., s) is numerically zero.
double filter_cutoff(int d);

/// Radial profile of L = l * l (a probability density supported on
/// {|x| <= 2}); L_eps(y) = eps^{-d} L(y/eps) is the real-space kernel whose
/// convolution with gamma gives the mollified covariance.
double autocorrelation_profile(int d, double rho);

/// (l * l)(0) in dimension d; the white-noise variance scale gamma_eps(0)
/// equals this divided by eps^d.
double autocorrelation_at_zero(int d);

/// F(l)(eps * lambda) for lambda in R^d given as |lambda|.
/// Throws DomainError unless eps > 0.
double mollifier_fourier(int d, double eps, double lambda_norm);

} // namespace mollifier
} // namespace anderson
