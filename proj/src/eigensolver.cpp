#include "anderson/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anderson/grid_ops.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
double tridiag_top_eigenvalue(std::span<const double> a, std::span<const double> b) {
    const int m = static_cast<int>(a.size());
    double lo = a[0], hi = a[0];
    for (int i = 0; i < m; ++i) {
        const double off = (i > 0 ? std::abs(b[i - 1]) : 0.0) +
                           (i + 1 < m ? std::abs(b[i]) : 0.0);
        lo = std::min(lo, a[i] - off);
        hi = std::max(hi, a[i] + off);
    }
    auto count_below = [&](double x) {
        // Sturm sequence: number of eigenvalues < x
        int count = 0;
        double q = a[0] - x;
        if (q < 0.0) ++count;
        for (int i = 1; i < m; ++i) {
            const double bb = b[i - 1] * b[i - 1];
            q = a[i] - x - bb / (q == 0.0 ? 1e-300 : q);
            if (q < 0.0) ++count;
        }
        return count;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (std::abs(hi) + 1.0); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= m)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Eigenvector of the tridiagonal for an isolated eigenvalue via inverse
// iteration with a perturbed shift (tridiagonal LU with partial pivoting).
std::vector<double> tridiag_eigenvector(std::span<const double> a, std::span<const double> b,
                                        double lambda) {
    const int m = static_cast<int>(a.size());
    std::vector<double> y(m, 1.0 / std::sqrt(static_cast<double>(m)));
    double scale = std::abs(lambda);
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(a[i]));
    const double shift = lambda + 1e-12 * (scale + 1.0);

    for (int pass = 0; pass < 3; ++pass) {
        // Solve (T - shift I) x = y by Gaussian elimination with pivoting.
        std::vector<double> diag(m), up1(m, 0.0), up2(m, 0.0), rhs = y;
        for (int i = 0; i < m; ++i) diag[i] = a[i] - shift;
        std::vector<double> low(m, 0.0);
        for (int i = 0; i + 1 < m; ++i) {
            up1[i] = b[i];
            low[i] = b[i];
        }
        for (int i = 0; i + 1 < m; ++i) {
            if (std::abs(low[i]) > std::abs(diag[i])) {
                std::swap(diag[i], low[i]);
                std::swap(up1[i], diag[i + 1]);
                std::swap(up2[i], up1[i + 1]);
                std::swap(rhs[i], rhs[i + 1]);
            }
            if (diag[i] == 0.0) diag[i] = 1e-300;
            const double f = low[i] / diag[i];
            diag[i + 1] -= f * up1[i];
            up1[i + 1] -= f * up2[i];
            rhs[i + 1] -= f * rhs[i];
        }
        if (diag[m - 1] == 0.0) diag[m - 1] = 1e-300;
        std::vector<double> x(m);
        for (int i = m - 1; i >= 0; --i) {
            double v = rhs[i];
            if (i + 1 < m) v -= up1[i] * x[i + 1];
            if (i + 2 < m) v -= up2[i] * x[i + 2];
            x[i] = v / diag[i];
        }
        double nrm = 0.0;
        for (double v : x) nrm += v * v;
        nrm = std::sqrt(nrm);
        for (int i = 0; i < m; ++i) y[i] = x[i] / nrm;
    }
    return y;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

} // namespace

DiscreteOperator::DiscreteOperator(const FieldSample& field, double theta)
    : DiscreteOperator(field, theta, BoxMask::full(field.grid)) {}

DiscreteOperator::DiscreteOperator(const FieldSample& field, double theta, const BoxMask& mask)
    : grid_(field.grid), theta_(theta), potential_(field.values), mask_(mask) {
    if (!(theta > 0.0)) throw DomainError("DiscreteOperator: theta must be positive");
    for (int a = 0; a < grid_.d; ++a) {
        if (mask_.lo[a] < 0 || mask_.hi[a] >= grid_.n || mask_.lo[a] > mask_.hi[a])
            throw DomainError("DiscreteOperator: mask outside grid");
    }
}

DiscreteOperator assemble(const FieldSample& field, double theta) {
    return DiscreteOperator(field, theta);
}

void DiscreteOperator::apply(std::span<const double> in, std::span<double> out) const {
    const std::int64_t n = grid_.n;
    const int d = grid_.d;
    std::int64_t stride[3];
    {
        std::int64_t acc = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = acc;
            acc *= n;
        }
    }
    const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
    std::fill(out.begin(), out.end(), 0.0);

    std::int64_t idx[3] = {mask_.lo[0], mask_.lo[1], mask_.lo[2]};
    while (true) {
        std::int64_t j = 0;
        for (int a = 0; a < d; ++a) j += idx[a] * stride[a];
        double lap = -2.0 * d * in[j];
        for (int a = 0; a < d; ++a) {
            if (idx[a] > mask_.lo[a]) lap += in[j - stride[a]];
            if (idx[a] < mask_.hi[a]) lap += in[j + stride[a]];
        }
        out[j] = 0.5 * lap * inv_h2 + theta_ * potential_[j] * in[j];

        int a = d - 1;
        while (a >= 0 && ++idx[a] > mask_.hi[a]) {
            idx[a] = mask_.lo[a];
            --a;
        }
        if (a < 0) break;
    }
}

EigenResult principal_eigenvalue(const DiscreteOperator& op, double tol, int max_iter) {
    if (!(tol > 0.0)) throw DomainError("principal_eigenvalue: tol must be positive");
    const std::int64_t n = op.size();
    const int krylov_max = static_cast<int>(std::min<std::int64_t>(300, op.active_nodes()));

    // Deterministic start: positive smooth profile over the mask (good overlap
    // with the sign-definite ground state) plus a small generic perturbation.
    std::vector<double> v(n, 0.0);
    {
        Rng rng(0x5eed0f1e1dULL);
        const GridSpec& g = op.grid();
        const BoxMask& mask = op.mask();
        std::int64_t stride[3] = {1, 1, 1};
        {
            std::int64_t acc = 1;
            for (int a = g.d - 1; a >= 0; --a) {
                stride[a] = acc;
                acc *= g.n;
            }
        }
        for (std::int64_t j = 0; j < n; ++j) {
            bool inside = true;
            double prof = 1.0;
            for (int a = 0; a < g.d; ++a) {
                const std::int64_t k = (j / stride[a]) % g.n;
                if (k < mask.lo[a] || k > mask.hi[a]) {
                    inside = false;
                    break;
                }
                const double span = static_cast<double>(mask.hi[a] - mask.lo[a] + 2);
                prof *= std::sin(M_PI * static_cast<double>(k - mask.lo[a] + 1) / span);
            }
            const double noise = 0.01 * rng.gauss();
            v[j] = inside ? prof + noise : 0.0;
        }
        double nrm = std::sqrt(dot(v, v));
        for (auto& x : v) x /= nrm;
    }

    int applies = 0;
    double best_lambda = 0.0, best_residual = std::numeric_limits<double>::infinity();
    std::vector<double> work(n);

    while (applies < max_iter) {
        std::vector<std::vector<double>> basis;
        std::vector<double> alpha, beta;
        basis.push_back(v);

        double lambda = 0.0;
        bool have_ritz = false;
        std::vector<double> ritz;

        for (int k = 0; k < krylov_max && applies < max_iter; ++k) {
            op.apply(basis[k], work);
            ++applies;
            const double a = dot(work, basis[k]);
            alpha.push_back(a);
            for (std::size_t i = 0; i < basis[k].size(); ++i) work[i] -= a * basis[k][i];
            if (k > 0)
                for (std::size_t i = 0; i < work.size(); ++i)
                    work[i] -= beta[k - 1] * basis[k - 1][i];
            // full reorthogonalization
            for (const auto& q : basis) {
                const double c = dot(work, q);
                for (std::size_t i = 0; i < work.size(); ++i) work[i] -= c * q[i];
            }
            const double b = std::sqrt(dot(work, work));

            // Ritz estimate every few steps (and on breakdown/last step)
            const bool last = (b < 1e-14) || (k + 1 == krylov_max);
            if (((k + 1) % 5 == 0 && k >= 4) || last) {
                lambda = tridiag_top_eigenvalue(alpha, beta);
                std::vector<double> y = tridiag_eigenvector(alpha, beta, lambda);
                const double res_est = (b < 1e-14) ? 0.0 : std::abs(b * y.back());
                if (res_est <= tol * std::max(std::abs(lambda), 1e-30) || last) {
                    ritz.assign(n, 0.0);
                    for (std::size_t q = 0; q < basis.size(); ++q)
                        for (std::int64_t i = 0; i < n; ++i) ritz[i] += y[q] * basis[q][i];
                    have_ritz = true;
                    break;
                }
            }
            if (b < 1e-14) break;
            beta.push_back(b);
            std::vector<double> next(n);
            for (std::int64_t i = 0; i < n; ++i) next[i] = work[i] / b;
            basis.push_back(std::move(next));
        }

        if (!have_ritz) break;

        // True residual on the Ritz vector.
        double nrm = std::sqrt(dot(ritz, ritz));
        for (auto& x : ritz) x /= nrm;
        op.apply(ritz, work);
        ++applies;
        const double rq = dot(work, ritz);
        double res = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double r = work[i] - rq * ritz[i];
            res += r * r;
        }
        res = std::sqrt(res) / std::max(std::abs(rq), 1e-30);

        if (res < best_residual) {
            best_residual = res;
            best_lambda = rq;
        }
        if (res <= tol) {
            EigenResult out;
            out.lambda = rq;
            out.iterations = applies;
            out.residual = res;
            // sign fix: ground state taken nonnegative
            double sum = 0.0;
            for (double x : ritz) sum += x;
            const double sgn = sum < 0.0 ? -1.0 : 1.0;
            const double hnorm = l2_norm(op.grid(), ritz);
            out.eigenfunction.resize(n);
            for (std::int64_t i = 0; i < n; ++i)
                out.eigenfunction[i] = sgn * ritz[i] / hnorm;
            return out;
        }
        v = ritz; // restart from the latest Ritz vector
    }

    throw ConvergenceError("principal_eigenvalue: no convergence within max_iter",
                           best_lambda, best_residual);
}

double rayleigh_quotient(const DiscreteOperator& op, std::span<const double> g) {
    const double gg = dot(g, g);
    if (gg == 0.0) throw DomainError("rayleigh_quotient: zero vector");
    std::vector<double> work(g.size());
    op.apply(g, work);
    return dot(work, g) / gg;
}

std::vector<GapRow> decomposition_gap(const FieldSample& field, double theta,
                                      std::span<const double> r_values, double tol) {
    const GridSpec& g = field.grid;
    const double R = g.half_width;
    const double lambda_full =
        principal_eigenvalue(DiscreteOperator(field, theta), tol).lambda;

    std::vector<GapRow> rows;
    for (double r : r_values) {
        if (!(r > 0.0 && r < R)) throw DomainError("decomposition_gap: require 0 < r < R");
        double submax = -std::numeric_limits<double>::infinity();
        // z in 2rZ^d ∩ Q_R
        const std::int64_t zmax = static_cast<std::int64_t>(std::ceil(R / (2.0 * r))) - 1;
        std::int64_t zi[3] = {-zmax, -zmax, -zmax};
        for (int a = g.d; a < 3; ++a) zi[a] = 0;
        while (true) {
            std::array<double, 3> center = {0.0, 0.0, 0.0};
            bool inside = true;
            for (int a = 0; a < g.d; ++a) {
                center[a] = 2.0 * r * static_cast<double>(zi[a]);
                if (!(std::abs(center[a]) < R)) inside = false;
            }
            if (inside) {
                BoxMask mask;
                if (BoxMask::from_box(g, center, r + 1.0, mask)) {
                    DiscreteOperator sub(field, theta, mask);
                    submax = std::max(submax,
                                      principal_eigenvalue(sub, tol).lambda);
                }
            }
            int a = g.d - 1;
            while (a >= 0 && ++zi[a] > zmax) {
                zi[a] = -zmax;
                --a;
            }
            if (a < 0) break;
        }
        rows.push_back({r, lambda_full, submax, lambda_full - submax});
    }
    return rows;
}

} // namespace anderson
