#include "anderson/slepian.hpp"

#include <cmath>

#include "anderson/errors.hpp"
#include "anderson/quadrature.hpp"
#include "anderson/rng.hpp"

namespace anderson {

SlepianResult slepian_check(int n, const std::vector<double>& cov, double a, double b,
                            std::int64_t trials, std::uint64_t seed) {
    if (n < 1 || cov.size() != static_cast<std::size_t>(n) * n)
        throw DomainError("slepian_check: covariance must be n x n");
    if (!(a > 0.0 && b > 0.0)) throw DomainError("slepian_check: require A, B > 0");
    if (trials < 100) throw DomainError("slepian_check: need at least 100 trials");

    const double var = cov[0];
    double r_off = 0.0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(cov[i * n + i] - var) > 1e-12 * std::max(1.0, std::abs(var)))
            throw DomainError("slepian_check: diagonal entries must be equal");
        for (int j = 0; j < n; ++j) {
            if (std::abs(cov[i * n + j] - cov[j * n + i]) >
                1e-12 * std::max(1.0, std::abs(var)))
                throw DomainError("slepian_check: covariance must be symmetric");
            if (i != j) r_off = std::max(r_off, std::abs(cov[i * n + j]));
        }
    }
    if (!(var >= 2.0 * r_off))
        throw DomainError("slepian_check: lemma precondition Var(xi_1) >= 2R violated");

    // Cholesky (PSD check).
    std::vector<double> l(cov);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = l[i * n + j];
            for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (s < -1e-12 * std::max(1.0, var))
                    throw DomainError("slepian_check: covariance is not PSD");
                l[i * n + i] = std::sqrt(std::max(s, 0.0));
            } else {
                l[i * n + j] = l[j * n + j] > 0.0 ? s / l[j * n + j] : 0.0;
            }
        }
        for (int j = i + 1; j < n; ++j) l[i * n + j] = 0.0;
    }

    Rng rng(seed);
    std::vector<double> z(n), x(n);
    std::int64_t below = 0;
    for (std::int64_t it = 0; it < trials; ++it) {
        for (int i = 0; i < n; ++i) z[i] = rng.gauss();
        bool all_below = true;
        for (int i = 0; i < n && all_below; ++i) {
            double s = 0.0;
            for (int k = 0; k <= i; ++k) s += l[i * n + k] * z[k];
            if (s > a) all_below = false;
        }
        if (all_below) ++below;
    }

    SlepianResult out;
    out.r_offdiag = r_off;
    out.lhs_freq = static_cast<double>(below) / static_cast<double>(trials);
    const double scale = std::sqrt((2.0 * r_off + var) / var);
    const double tail =
        r_off > 0.0 ? normal_tail(b / std::sqrt(2.0 * r_off)) : 0.0;
    out.rhs_bound =
        std::pow(normal_cdf(scale * (a + b) / std::sqrt(var)), n) + tail;
    out.binomial_se =
        std::sqrt(out.lhs_freq * (1.0 - out.lhs_freq) / static_cast<double>(trials));
    out.holds = out.lhs_freq <= out.rhs_bound + 4.0 * out.binomial_se;
    return out;
}

} // namespace anderson
