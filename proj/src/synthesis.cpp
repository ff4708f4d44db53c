#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>

#include "anderson/fft.hpp"
#include "anderson/mollifier.hpp"
#include "anderson/potentials.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

// Smallest 7-smooth size >= n (keeps FFTW away from large-prime paths).
std::int64_t next_fast_size(std::int64_t n) {
    for (std::int64_t m = n;; ++m) {
        std::int64_t r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

bool same_model(const PotentialModel& a, const PotentialModel& b) {
    return a.variant == b.variant && a.d == b.d && a.alpha == b.alpha &&
           a.c_gamma == b.c_gamma && a.p == b.p && a.hurst == b.hurst;
}

} // namespace

struct FieldSynthesizer::Impl {
    PotentialModel model;
    GridSpec grid;
    double eps = 0.0;

    bool iid = false;
    double iid_sigma = 0.0;

    int padding = 1;
    std::vector<std::int64_t> ext_shape;
    std::vector<double> sqrt_eigen;
    std::unique_ptr<MollifiedCovariance> cov;
};

FieldSynthesizer::FieldSynthesizer(const PotentialModel& model, const GridSpec& grid, double eps)
    : impl_(new Impl) {
    model.validate();
    grid.validate();
    if (model.d != grid.d) throw DomainError("FieldSynthesizer: model/grid dimension mismatch");
    if (!(eps > 0.0)) throw DomainError("FieldSynthesizer: epsilon must be positive");
    impl_->model = model;
    impl_->grid = grid;
    impl_->eps = eps;

    const double h = grid.spacing();
    if (model.variant == PotentialVariant::WhiteNoise1D && eps < h) {
        // Mollified correlation length below the grid: nodes are i.i.d.
        impl_->iid = true;
        impl_->iid_sigma = std::sqrt(mollifier::autocorrelation_at_zero(1) / eps);
        return;
    }

    const double r_max =
        std::sqrt(static_cast<double>(grid.d)) * 0.5 * h *
        static_cast<double>(next_fast_size(16 * grid.n));
    impl_->cov = std::make_unique<MollifiedCovariance>(model, eps, r_max);

    double worst_negative = 0.0;
    int last_padding = 0;
    for (int pad : {2, 4, 8, 16}) {
        const std::int64_t ne = next_fast_size(pad * grid.n);
        std::vector<std::int64_t> shape(grid.d, ne);
        std::int64_t total = 1;
        for (auto s : shape) total *= s;

        std::vector<std::complex<double>> c(total);
        const bool radial =
            !(model.variant == PotentialVariant::FractionalWhiteNoise && model.d >= 2);
        // Fill the minimum-image covariance tensor; it is mirror-symmetric
        // per axis, so only the folded block is evaluated.
        const std::int64_t half = ne / 2;
        std::vector<std::int64_t> fold_shape(grid.d, half + 1);
        std::int64_t fold_total = 1;
        for (auto s : fold_shape) fold_total *= s;
        std::vector<double> folded(fold_total);
        for (std::int64_t fj = 0; fj < fold_total; ++fj) {
            std::int64_t rem = fj;
            double dist[3] = {0, 0, 0};
            for (int a = grid.d - 1; a >= 0; --a) {
                const std::int64_t k = rem % (half + 1);
                rem /= (half + 1);
                dist[a] = static_cast<double>(k) * h;
            }
            if (radial) {
                double rr = 0.0;
                for (int a = 0; a < grid.d; ++a) rr += dist[a] * dist[a];
                folded[fj] = impl_->cov->radial(std::sqrt(rr));
            } else {
                folded[fj] = impl_->cov->at(std::span<const double>(dist, grid.d));
            }
        }
        for (std::int64_t j = 0; j < total; ++j) {
            std::int64_t rem = j;
            std::int64_t fj = 0;
            for (int a = 0; a < grid.d; ++a) {
                std::int64_t k = 0;
                // row-major decode
                std::int64_t stride = 1;
                for (int b = grid.d - 1; b > a; --b) stride *= ne;
                k = (rem / stride) % ne;
                const std::int64_t m = std::min(k, ne - k);
                fj = fj * (half + 1) + m;
            }
            c[j] = folded[fj];
        }

        Fft::transform(c, shape, -1);
        double min_e = 0.0, max_e = 0.0;
        for (auto& z : c) {
            min_e = std::min(min_e, z.real());
            max_e = std::max(max_e, z.real());
        }
        last_padding = pad;
        // Long-range kernels floor out around 1e-7..1e-5 relative negativity
        // regardless of padding; clipping at this level perturbs the realized
        // covariance by far less than any sampling tolerance.
        if (min_e >= -1e-5 * max_e) {
            impl_->padding = pad;
            impl_->ext_shape = shape;
            impl_->sqrt_eigen.resize(total);
            const double inv_n = 1.0 / static_cast<double>(total);
            for (std::int64_t j = 0; j < total; ++j)
                impl_->sqrt_eigen[j] = std::sqrt(std::max(c[j].real(), 0.0) * inv_n);
            return;
        }
        worst_negative = min_e;
    }
    throw EmbeddingError("circulant embedding spectrum has negative eigenvalues beyond "
                         "tolerance after padding retries",
                         worst_negative, last_padding);
}

FieldSynthesizer::~FieldSynthesizer() = default;
FieldSynthesizer::FieldSynthesizer(FieldSynthesizer&&) noexcept = default;

FieldSample FieldSynthesizer::sample(std::uint64_t seed) const {
    FieldSample out;
    out.grid = impl_->grid;
    out.model = impl_->model;
    out.epsilon = impl_->eps;
    out.seed = seed;
    const std::int64_t total_nodes = impl_->grid.total_nodes();
    out.values.resize(total_nodes);

    Rng rng(seed);
    if (impl_->iid) {
        for (auto& v : out.values) v = impl_->iid_sigma * rng.gauss();
        return out;
    }

    std::int64_t ext_total = 1;
    for (auto s : impl_->ext_shape) ext_total *= s;
    std::vector<std::complex<double>> w(ext_total);
    for (std::int64_t j = 0; j < ext_total; ++j) {
        const double re = rng.gauss();
        const double im = rng.gauss();
        w[j] = std::complex<double>(re * impl_->sqrt_eigen[j], im * impl_->sqrt_eigen[j]);
    }
    Fft::transform(w, impl_->ext_shape, +1);

    // Extract the leading n^d block.
    const std::int64_t n = impl_->grid.n;
    const int d = impl_->grid.d;
    const std::int64_t ne = impl_->ext_shape[0];
    for (std::int64_t j = 0; j < total_nodes; ++j) {
        std::int64_t rem = j;
        std::int64_t src = 0;
        for (int a = 0; a < d; ++a) {
            std::int64_t stride = 1;
            for (int b = d - 1; b > a; --b) stride *= n;
            const std::int64_t k = (rem / stride) % n;
            src = src * ne + k;
        }
        out.values[j] = w[src].real();
    }
    return out;
}

double FieldSynthesizer::target_covariance(std::span<const double> lag) const {
    if (impl_->iid) {
        double rr = 0.0;
        for (double v : lag) rr += v * v;
        return rr == 0.0 ? impl_->iid_sigma * impl_->iid_sigma : 0.0;
    }
    return impl_->cov->at(lag);
}

double FieldSynthesizer::target_variance() const {
    if (impl_->iid) return impl_->iid_sigma * impl_->iid_sigma;
    return impl_->cov->at_zero();
}

const GridSpec& FieldSynthesizer::grid() const { return impl_->grid; }
const PotentialModel& FieldSynthesizer::model() const { return impl_->model; }
double FieldSynthesizer::epsilon() const { return impl_->eps; }
int FieldSynthesizer::padding_factor() const { return impl_->padding; }

FieldSample synthesize_field(const PotentialModel& model, const GridSpec& grid, double eps,
                             std::uint64_t seed) {
    FieldSynthesizer synth(model, grid, eps);
    return synth.sample(seed);
}

std::vector<CovarianceEstimate> empirical_covariance(
    std::span<const FieldSample> samples, const std::vector<std::vector<std::int64_t>>& lags) {
    if (samples.size() < 2) throw DomainError("empirical_covariance: insufficient replicates");
    const FieldSample& first = samples[0];
    for (const auto& s : samples) {
        if (!(s.grid == first.grid) || s.epsilon != first.epsilon ||
            !same_model(s.model, first.model))
            throw DomainError("empirical_covariance: samples do not share (model, grid, eps)");
    }
    const GridSpec& g = first.grid;
    const std::int64_t n = g.n;

    std::vector<CovarianceEstimate> out;
    out.reserve(lags.size());
    for (const auto& lag : lags) {
        if (static_cast<int>(lag.size()) != g.d)
            throw DomainError("empirical_covariance: lag dimension mismatch");
        std::int64_t lo[3], hi[3], off = 0;
        for (int a = 0; a < g.d; ++a) {
            if (std::llabs(lag[a]) >= n)
                throw DomainError("empirical_covariance: lag offset out of range");
            lo[a] = std::max<std::int64_t>(0, -lag[a]);
            hi[a] = n - 1 - std::max<std::int64_t>(0, lag[a]);
            std::int64_t stride = 1;
            for (int b = g.d - 1; b > a; --b) stride *= n;
            off += lag[a] * stride;
        }
        std::vector<double> per_sample;
        per_sample.reserve(samples.size());
        for (const auto& s : samples) {
            double acc = 0.0;
            std::int64_t count = 0;
            // iterate the valid translation block
            std::int64_t idx[3] = {lo[0], lo[1], lo[2]};
            while (true) {
                std::int64_t j = 0;
                for (int a = 0; a < g.d; ++a) j = j * n + idx[a];
                acc += s.values[j] * s.values[j + off];
                ++count;
                int a = g.d - 1;
                while (a >= 0 && ++idx[a] > hi[a]) {
                    idx[a] = lo[a];
                    --a;
                }
                if (a < 0) break;
            }
            per_sample.push_back(acc / static_cast<double>(count));
        }
        double mean = 0.0;
        for (double v : per_sample) mean += v;
        mean /= static_cast<double>(per_sample.size());
        double var = 0.0;
        for (double v : per_sample) var += (v - mean) * (v - mean);
        var /= static_cast<double>(per_sample.size() - 1);
        CovarianceEstimate est;
        est.lag = lag;
        est.estimate = mean;
        est.standard_error = std::sqrt(var / static_cast<double>(per_sample.size()));
        out.push_back(std::move(est));
    }
    return out;
}

} // namespace anderson
