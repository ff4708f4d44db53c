#pragma once

#include <cstdint>
#include <vector>

namespace anderson {

struct SlepianResult {
    double lhs_freq = 0.0;   // empirical P(max_k xi_k <= A)
    double rhs_bound = 0.0;  // comparison bound
    bool holds = false;      // lhs <= rhs + 4 binomial SE
    double binomial_se = 0.0;
    double r_offdiag = 0.0;  // max |off-diagonal covariance|
};

/// Monte Carlo check of the Slepian-comparison tail bound
///   P(max xi <= A) <= P(xi_1 <= sqrt((2R+Var)/Var) (A+B))^n + P(U >= B/sqrt(2R))
/// for a mean-zero Gaussian vector with equal variances, Var >= 2R.
/// cov is the full n x n covariance matrix (row-major).
SlepianResult slepian_check(int n, const std::vector<double>& cov, double a, double b,
                            std::int64_t trials, std::uint64_t seed);

} // namespace anderson
