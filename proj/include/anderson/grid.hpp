#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "anderson/errors.hpp"

namespace anderson {

/// Regular grid of interior nodes on the box Q_R = (-R, R)^d.
///
/// Nodes per axis sit at x_k = -R + (k+1) h, k = 0..n-1, with h = 2R/(n+1),
/// so the closed hull extended by one ghost layer lands exactly on the
/// boundary +-R. All nodes are strictly interior.
struct GridSpec {
    int d = 1;
    double half_width = 1.0;
    std::int64_t n = 2;

    GridSpec() = default;
    GridSpec(int d_, double half_width_, std::int64_t n_)
        : d(d_), half_width(half_width_), n(n_) {
        validate();
    }

    void validate() const {
        if (d < 1 || d > 3)
            throw DomainError("GridSpec: dimension must be 1, 2 or 3");
        if (!(half_width > 0.0))
            throw DomainError("GridSpec: half_width must be positive");
        if (n < 2)
            throw DomainError("GridSpec: need at least 2 interior points per axis");
        // n^d must stay addressable (and allocatable).
        double total = 1.0;
        for (int i = 0; i < d; ++i) total *= static_cast<double>(n);
        if (total > 1.0e9)
            throw DomainError("GridSpec: total node count exceeds platform budget");
    }

    double spacing() const { return 2.0 * half_width / static_cast<double>(n + 1); }

    double coord(std::int64_t k) const {
        return -half_width + static_cast<double>(k + 1) * spacing();
    }

    std::int64_t total_nodes() const {
        std::int64_t total = 1;
        for (int i = 0; i < d; ++i) total *= n;
        return total;
    }

    /// Row-major flat index of the node with per-axis indices idx[0..d-1].
    std::int64_t flat_index(const std::array<std::int64_t, 3>& idx) const {
        std::int64_t f = 0;
        for (int a = 0; a < d; ++a) f = f * n + idx[a];
        return f;
    }

    bool operator==(const GridSpec& other) const {
        return d == other.d && half_width == other.half_width && n == other.n;
    }
};

/// Axis-aligned index box [lo[a], hi[a]] (inclusive) restricting operators
/// to a sub-domain of the grid. Node indices outside the box are treated
/// as Dirichlet exterior.
struct BoxMask {
    std::array<std::int64_t, 3> lo{0, 0, 0};
    std::array<std::int64_t, 3> hi{0, 0, 0};

    static BoxMask full(const GridSpec& g) {
        BoxMask m;
        for (int a = 0; a < g.d; ++a) {
            m.lo[a] = 0;
            m.hi[a] = g.n - 1;
        }
        return m;
    }

    /// Nodes of `g` falling inside the continuum box center + (-r, r)^d,
    /// clipped to the grid. Returns empty=false if no node survives.
    static bool from_box(const GridSpec& g, const std::array<double, 3>& center, double r,
                         BoxMask& out) {
        const double h = g.spacing();
        for (int a = 0; a < g.d; ++a) {
            const double leftmost = center[a] - r;
            const double rightmost = center[a] + r;
            // coord(k) = -R + (k+1) h strictly inside (leftmost, rightmost)
            std::int64_t klo = static_cast<std::int64_t>(
                std::ceil((leftmost + g.half_width) / h - 1.0 + 1e-12));
            std::int64_t khi = static_cast<std::int64_t>(
                std::floor((rightmost + g.half_width) / h - 1.0 - 1e-12));
            klo = std::max<std::int64_t>(klo, 0);
            khi = std::min<std::int64_t>(khi, g.n - 1);
            if (klo > khi) return false;
            out.lo[a] = klo;
            out.hi[a] = khi;
        }
        return true;
    }

    std::int64_t node_count(int d) const {
        std::int64_t c = 1;
        for (int a = 0; a < d; ++a) c *= (hi[a] - lo[a] + 1);
        return c;
    }
};

} // namespace anderson
