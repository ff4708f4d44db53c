#include "anderson/grid_ops.hpp"

#include <cmath>

namespace anderson {

namespace {

// Row-major strides; axis d-1 is contiguous.
void strides_of(const GridSpec& g, std::int64_t* s) {
    std::int64_t acc = 1;
    for (int a = g.d - 1; a >= 0; --a) {
        s[a] = acc;
        acc *= g.n;
    }
}

} // namespace

double l2_norm_sq(const GridSpec& g, std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    double hd = 1.0;
    for (int a = 0; a < g.d; ++a) hd *= g.spacing();
    return s * hd;
}

double l2_norm(const GridSpec& g, std::span<const double> v) {
    return std::sqrt(l2_norm_sq(g, v));
}

double dirichlet_grad_sq(const GridSpec& g, std::span<const double> v) {
    const std::int64_t n = g.n;
    std::int64_t stride[3];
    strides_of(g, stride);
    const std::int64_t total = g.total_nodes();
    double sum = 0.0;
    for (int a = 0; a < g.d; ++a) {
        const std::int64_t sa = stride[a];
        for (std::int64_t j = 0; j < total; ++j) {
            const std::int64_t ka = (j / sa) % n;
            // Face to the right neighbor (or exterior zero at ka = n-1),
            // plus the leftmost face to the exterior at ka = 0.
            const double right = (ka + 1 < n) ? v[j + sa] : 0.0;
            const double diff = right - v[j];
            sum += diff * diff;
            if (ka == 0) sum += v[j] * v[j];
        }
    }
    const double h = g.spacing();
    double hd = 1.0;
    for (int a = 0; a < g.d; ++a) hd *= h;
    return sum * hd / (h * h);
}

void neg_laplacian_apply(const GridSpec& g, std::span<const double> v, std::span<double> out) {
    const std::int64_t n = g.n;
    std::int64_t stride[3];
    strides_of(g, stride);
    const std::int64_t total = g.total_nodes();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    for (std::int64_t j = 0; j < total; ++j) {
        double acc = 2.0 * g.d * v[j];
        for (int a = 0; a < g.d; ++a) {
            const std::int64_t sa = stride[a];
            const std::int64_t ka = (j / sa) % n;
            if (ka > 0) acc -= v[j - sa];
            if (ka + 1 < n) acc -= v[j + sa];
        }
        out[j] = acc * inv_h2;
    }
}

bool interpolate(const GridSpec& g, std::span<const double> values, std::span<const double> x,
                 double& out) {
    const double R = g.half_width;
    const double h = g.spacing();
    const std::int64_t n = g.n;
    std::int64_t stride[3];
    strides_of(g, stride);

    std::int64_t base[3];
    double frac[3];
    for (int a = 0; a < g.d; ++a) {
        const double xa = x[a];
        if (!(xa > -R && xa < R)) return false;
        // Node k sits at -R + (k+1) h; u is the fractional node coordinate.
        double u = (xa + R) / h - 1.0;
        std::int64_t b = static_cast<std::int64_t>(std::floor(u));
        if (b < -1) b = -1;
        if (b > n - 1) b = n - 1;
        base[a] = b;
        frac[a] = u - static_cast<double>(b);
    }

    double acc = 0.0;
    const int corners = 1 << g.d;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::int64_t idx = 0;
        bool inside = true;
        for (int a = 0; a < g.d; ++a) {
            const int bit = (c >> a) & 1;
            const std::int64_t k = base[a] + bit;
            w *= bit ? frac[a] : (1.0 - frac[a]);
            if (k < 0 || k >= n) {
                inside = false; // ghost node on the boundary, value 0
                break;
            }
            idx += k * stride[a];
        }
        if (inside) acc += w * values[idx];
    }
    out = acc;
    return true;
}

} // namespace anderson
