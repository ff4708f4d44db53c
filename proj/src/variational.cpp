#include "anderson/variational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "anderson/fft.hpp"
#include "anderson/grid_ops.hpp"
#include "anderson/quadrature.hpp"

namespace anderson {

namespace {

std::int64_t next_fast_size(std::int64_t n) {
    for (std::int64_t m = n;; ++m) {
        std::int64_t r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

} // namespace

KernelSpec KernelSpec::riesz(double alpha) {
    KernelSpec k;
    k.variant = Variant::Riesz;
    k.alpha = alpha;
    return k;
}

KernelSpec KernelSpec::product(std::vector<double> alphas) {
    KernelSpec k;
    k.variant = Variant::Product;
    k.alphas = std::move(alphas);
    return k;
}

KernelSpec KernelSpec::quartic() {
    KernelSpec k;
    k.variant = Variant::Quartic;
    return k;
}

double KernelSpec::effective_alpha() const {
    switch (variant) {
        case Variant::Riesz:
            return alpha;
        case Variant::Product: {
            double s = 0.0;
            for (double a : alphas) s += a;
            return s;
        }
        case Variant::Quartic:
            return 1.0;
    }
    return 0.0;
}

void KernelSpec::validate(int d) const {
    switch (variant) {
        case Variant::Riesz: {
            const double cap = std::min(2.0, static_cast<double>(d));
            if (!(alpha > 0.0 && alpha < cap))
                throw DomainError("KernelSpec: Riesz requires 0 < alpha < min(2, d)");
            break;
        }
        case Variant::Product: {
            if (static_cast<int>(alphas.size()) != d)
                throw DomainError("KernelSpec: product kernel needs one exponent per axis");
            double s = 0.0;
            for (double a : alphas) {
                if (!(a >= 0.0 && a < 1.0))
                    throw DomainError("KernelSpec: product requires 0 <= alpha_j < 1");
                s += a;
            }
            if (!(s < 2.0)) throw DomainError("KernelSpec: product requires sum alpha_j < 2");
            break;
        }
        case Variant::Quartic:
            if (d != 1) throw DomainError("KernelSpec: quartic kernel is 1-dimensional");
            break;
    }
}

std::string KernelSpec::tag() const {
    switch (variant) {
        case Variant::Riesz:
            return "riesz";
        case Variant::Product:
            return "product";
        case Variant::Quartic:
            return "quartic";
    }
    return "?";
}

double TestFunction::l2() const { return l2_norm(grid, values); }
double TestFunction::grad() const { return std::sqrt(dirichlet_grad_sq(grid, values)); }

double riesz_cell_average(int d, double alpha, double h) {
    const double half = 0.5 * h;
    switch (d) {
        case 1:
            return 2.0 * std::pow(half, 1.0 - alpha) / ((1.0 - alpha) * h);
        case 2: {
            const double ang = integrate(
                [&](double phi) { return std::pow(std::cos(phi), alpha - 2.0); }, 0.0,
                0.25 * M_PI, 8, 32);
            return 8.0 * std::pow(half, 2.0 - alpha) / (2.0 - alpha) * ang / (h * h);
        }
        default: {
            // 6 faces; integral over one face of rho^-alpha with
            // rho = sqrt(half^2 + u^2 + v^2), then radial closed form.
            const double face = integrate(
                [&](double u) {
                    return integrate(
                        [&](double v) {
                            return std::pow(half * half + u * u + v * v, -0.5 * alpha);
                        },
                        -half, half, 4, 32);
                },
                -half, half, 4, 32);
            return 6.0 * half * face / ((3.0 - alpha) * h * h * h);
        }
    }
}

struct KernelEnergy::Impl {
    GridSpec grid;
    KernelSpec kernel;
    bool quartic = false;
    std::vector<std::int64_t> ext_shape;
    std::int64_t ext_total = 1;
    std::vector<double> what; // real DFT of the kernel weights

    // S = W * u on the grid block (linear convolution via padded FFT).
    void convolve(std::span<const double> u, std::vector<double>& s_out) const {
        const std::int64_t n = grid.n;
        const int d = grid.d;
        const std::int64_t ne = ext_shape[0];
        std::vector<std::complex<double>> buf(ext_total, 0.0);
        const std::int64_t total = grid.total_nodes();
        for (std::int64_t j = 0; j < total; ++j) {
            std::int64_t rem = j, src = 0;
            for (int a = 0; a < d; ++a) {
                std::int64_t stride = 1;
                for (int b = d - 1; b > a; --b) stride *= n;
                src = src * ne + (rem / stride) % n;
            }
            buf[src] = u[j];
        }
        Fft::transform(buf, ext_shape, -1);
        for (std::int64_t j = 0; j < ext_total; ++j) buf[j] *= what[j];
        Fft::transform(buf, ext_shape, +1);
        const double inv = 1.0 / static_cast<double>(ext_total);
        s_out.resize(total);
        for (std::int64_t j = 0; j < total; ++j) {
            std::int64_t rem = j, src = 0;
            for (int a = 0; a < d; ++a) {
                std::int64_t stride = 1;
                for (int b = d - 1; b > a; --b) stride *= n;
                src = src * ne + (rem / stride) % n;
            }
            s_out[j] = buf[src].real() * inv;
        }
    }
};

KernelEnergy::KernelEnergy(const GridSpec& grid, const KernelSpec& kernel) : impl_(new Impl) {
    grid.validate();
    kernel.validate(grid.d);
    impl_->grid = grid;
    impl_->kernel = kernel;
    if (kernel.variant == KernelSpec::Variant::Quartic) {
        impl_->quartic = true;
        return;
    }

    const std::int64_t n = grid.n;
    const int d = grid.d;
    const double h = grid.spacing();
    const std::int64_t ne = next_fast_size(2 * n);
    impl_->ext_shape.assign(d, ne);
    impl_->ext_total = 1;
    for (int a = 0; a < d; ++a) impl_->ext_total *= ne;

    std::vector<std::complex<double>> w(impl_->ext_total);
    double h2d = 1.0;
    for (int a = 0; a < 2 * d; ++a) h2d *= h;

    if (kernel.variant == KernelSpec::Variant::Riesz) {
        const double diag = riesz_cell_average(d, kernel.alpha, h);
        for (std::int64_t j = 0; j < impl_->ext_total; ++j) {
            std::int64_t rem = j;
            double rr = 0.0;
            for (int a = d - 1; a >= 0; --a) {
                const std::int64_t k = rem % ne;
                rem /= ne;
                const double delta = static_cast<double>(std::min(k, ne - k)) * h;
                rr += delta * delta;
            }
            w[j] = h2d * (rr == 0.0 ? diag : std::pow(std::sqrt(rr), -kernel.alpha));
        }
    } else {
        // product kernel: per-axis factors handle every hyperplane-singular cell
        for (std::int64_t j = 0; j < impl_->ext_total; ++j) {
            std::int64_t rem = j;
            double prod = 1.0;
            for (int a = d - 1; a >= 0; --a) {
                const std::int64_t k = rem % ne;
                rem /= ne;
                const double aexp = kernel.alphas[a];
                const double delta = static_cast<double>(std::min(k, ne - k)) * h;
                const double factor =
                    delta == 0.0 ? riesz_cell_average(1, aexp, h) : std::pow(delta, -aexp);
                prod *= h * h * factor;
            }
            w[j] = prod;
        }
    }
    Fft::transform(w, impl_->ext_shape, -1);
    impl_->what.resize(impl_->ext_total);
    for (std::int64_t j = 0; j < impl_->ext_total; ++j) impl_->what[j] = w[j].real();
}

KernelEnergy::~KernelEnergy() = default;
KernelEnergy::KernelEnergy(KernelEnergy&&) noexcept = default;

double KernelEnergy::energy(std::span<const double> f) const {
    if (static_cast<std::int64_t>(f.size()) != impl_->grid.total_nodes())
        throw DomainError("KernelEnergy: function size does not match grid");
    if (impl_->quartic) {
        double s = 0.0;
        for (double v : f) s += v * v * v * v;
        return s * impl_->grid.spacing();
    }
    const std::int64_t total = impl_->grid.total_nodes();
    std::vector<double> u(total);
    for (std::int64_t j = 0; j < total; ++j) u[j] = f[j] * f[j];
    std::vector<double> s;
    impl_->convolve(u, s);
    double e = 0.0;
    for (std::int64_t j = 0; j < total; ++j) e += u[j] * s[j];
    return e;
}

double KernelEnergy::energy_and_gradient(std::span<const double> f,
                                         std::span<double> grad) const {
    const std::int64_t total = impl_->grid.total_nodes();
    if (impl_->quartic) {
        const double h = impl_->grid.spacing();
        double e = 0.0;
        for (std::int64_t j = 0; j < total; ++j) {
            const double v = f[j];
            e += v * v * v * v;
            grad[j] = 4.0 * h * v * v * v;
        }
        return e * h;
    }
    std::vector<double> u(total);
    for (std::int64_t j = 0; j < total; ++j) u[j] = f[j] * f[j];
    std::vector<double> s;
    impl_->convolve(u, s);
    double e = 0.0;
    for (std::int64_t j = 0; j < total; ++j) {
        e += u[j] * s[j];
        grad[j] = 4.0 * f[j] * s[j];
    }
    return e;
}

const KernelSpec& KernelEnergy::kernel() const { return impl_->kernel; }
const GridSpec& KernelEnergy::grid() const { return impl_->grid; }

namespace {

enum class Mode { SigmaG, MF };

struct Start {
    const char* name;
    std::vector<double> values;
};

std::vector<Start> build_starts(const GridSpec& g) {
    const std::int64_t total = g.total_nodes();
    const double R = g.half_width;
    std::vector<Start> starts(3);
    starts[0].name = "gaussian";
    starts[1].name = "sine";
    starts[2].name = "plateau";
    for (auto& s : starts) s.values.resize(total);
    for (std::int64_t j = 0; j < total; ++j) {
        std::int64_t rem = j;
        double rr = 0.0, prod_sine = 1.0;
        for (int a = g.d - 1; a >= 0; --a) {
            const std::int64_t k = rem % g.n;
            rem /= g.n;
            const double x = g.coord(k);
            rr += x * x;
            prod_sine *= std::cos(0.5 * M_PI * x / R);
        }
        const double sdev = R / 6.0;
        starts[0].values[j] = std::exp(-0.5 * rr / (sdev * sdev));
        starts[1].values[j] = prod_sine;
        const double q = rr / (0.64 * R * R);
        starts[2].values[j] = std::max(0.0, 1.0 - q * q);
    }
    return starts;
}

struct AscentResult {
    std::vector<double> g;
    double objective = 0.0;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Projected gradient ascent with exact rescaling onto the constraint
// section, |.| symmetrization, BB step seeding and backtracking.
AscentResult ascend(const KernelEnergy& ke, Mode mode, double theta,
                    std::vector<double> g0, int max_iter, double tol) {
    const GridSpec& grid = ke.grid();
    const std::int64_t total = grid.total_nodes();
    const double h = grid.spacing();
    double hd = 1.0;
    for (int a = 0; a < grid.d; ++a) hd *= h;

    auto project = [&](std::vector<double>& g) {
        for (auto& v : g) v = std::abs(v);
        double norm_sq = l2_norm_sq(grid, g);
        if (mode == Mode::SigmaG) norm_sq += 0.5 * dirichlet_grad_sq(grid, g);
        const double c = std::sqrt(norm_sq);
        for (auto& v : g) v /= c;
    };

    std::vector<double> grad_e(total), lap(total);
    auto eval = [&](const std::vector<double>& g, std::vector<double>* grad_out,
                    double* energy_out) {
        double e;
        if (grad_out) {
            e = ke.energy_and_gradient(g, *grad_out);
        } else {
            e = ke.energy(g);
        }
        *energy_out = e;
        if (mode == Mode::SigmaG) {
            if (grad_out) {
                // ascend along the component tangential to the constraint
                // ellipsoid; the raw gradient stalls at non-stationary points
                neg_laplacian_apply(grid, g, lap);
                std::vector<double>& ge = *grad_out;
                double gb = 0.0, bb = 0.0;
                for (std::int64_t i = 0; i < total; ++i) {
                    lap[i] = hd * (g[i] + 0.5 * lap[i]); // grad Phi / 2
                    gb += ge[i] * lap[i];
                    bb += lap[i] * lap[i];
                }
                const double c = gb / bb;
                for (std::int64_t i = 0; i < total; ++i) ge[i] -= c * lap[i];
            }
            return e;
        }
        const double gs = 0.5 * dirichlet_grad_sq(grid, g);
        const double j = theta * std::sqrt(std::max(e, 1e-300)) - gs;
        if (grad_out) {
            neg_laplacian_apply(grid, g, lap);
            const double c = theta / (2.0 * std::sqrt(std::max(e, 1e-300)));
            for (std::int64_t i = 0; i < total; ++i)
                (*grad_out)[i] = c * (*grad_out)[i] - hd * lap[i];
        }
        return j;
    };

    std::vector<double> g = std::move(g0);
    project(g);
    double energy = 0.0;
    double obj = eval(g, &grad_e, &energy);

    double step;
    {
        double gmax = 0.0;
        for (double v : grad_e) gmax = std::max(gmax, std::abs(v));
        step = gmax > 0.0 ? 0.05 / gmax : 1.0;
    }

    std::vector<double> prev_g, prev_grad, trial(total);
    int it = 0, since_improvement = 0;
    double best_obj = obj;
    bool converged = false;
    while (it < max_iter) {
        ++it;
        trial = g;
        for (std::int64_t i = 0; i < total; ++i) trial[i] += step * grad_e[i];
        project(trial);
        double trial_energy = 0.0;
        const double trial_obj = eval(trial, nullptr, &trial_energy);
        if (trial_obj >= obj) {
            prev_g = g;
            prev_grad = grad_e;
            g = trial;
            obj = trial_obj;
            energy = trial_energy;
            eval(g, &grad_e, &energy);
            // BB step from the accepted move
            double ss = 0.0, sy = 0.0;
            for (std::int64_t i = 0; i < total; ++i) {
                const double s = g[i] - prev_g[i];
                ss += s * s;
                sy += s * (prev_grad[i] - grad_e[i]);
            }
            if (sy > 1e-300) step = std::min(ss / sy, 1e6 * step);
            else step *= 2.0;
        } else {
            step *= 0.5;
            if (step < 1e-18) {
                converged = true;
                break;
            }
        }
        // converged when no material improvement shows up for a long window
        if (obj > best_obj + tol * std::max(std::abs(best_obj), 1e-30)) {
            best_obj = obj;
            since_improvement = 0;
        } else if (++since_improvement >= 60) {
            converged = true;
            break;
        }
    }

    AscentResult out;
    out.g = std::move(g);
    out.energy = energy;
    out.objective = obj;
    out.iterations = it;
    out.converged = converged;
    return out;
}

VariationalSolution run_multistart(const KernelSpec& kernel, const GridSpec& grid, Mode mode,
                                   double theta, int max_iter, double tol, int starts) {
    kernel.validate(grid.d);
    KernelEnergy ke(grid, kernel);
    auto inits = build_starts(grid);
    if (starts < static_cast<int>(inits.size()))
        inits.resize(static_cast<std::size_t>(std::max(starts, 1)));

    AscentResult best;
    bool first = true;
    int total_iters = 0;
    for (auto& s : inits) {
        AscentResult r = ascend(ke, mode, theta, std::move(s.values), max_iter, tol);
        total_iters += r.iterations;
        if (first || r.objective > best.objective) {
            best = std::move(r);
            first = false;
        }
    }

    VariationalSolution sol;
    sol.f.grid = grid;
    sol.f.values = std::move(best.g);
    sol.energy = best.energy;
    sol.iterations = total_iters;
    sol.converged = best.converged;
    if (mode == Mode::SigmaG) {
        sol.constraint = 'G';
        sol.objective = std::sqrt(std::max(best.energy, 0.0));
        const double c = l2_norm_sq(grid, sol.f.values) +
                         0.5 * dirichlet_grad_sq(grid, sol.f.values);
        sol.constraint_residual = std::abs(c - 1.0);
    } else {
        sol.constraint = 'F';
        sol.objective = best.objective;
        sol.constraint_residual = std::abs(l2_norm_sq(grid, sol.f.values) - 1.0);
    }
    return sol;
}

} // namespace

VariationalSolution maximize_sigma(const KernelSpec& kernel, const GridSpec& grid, int max_iter,
                                   double tol, int starts) {
    return run_multistart(kernel, grid, Mode::SigmaG, 0.0, max_iter, tol, starts);
}

VariationalSolution maximize_M(const KernelSpec& kernel, double theta, const GridSpec& grid,
                               int max_iter, double tol, int starts) {
    if (!(theta > 0.0)) throw DomainError("maximize_M: theta must be positive");
    return run_multistart(kernel, grid, Mode::MF, theta, max_iter, tol, starts);
}

BridgeConstants bridge_constants(double sigma, double alpha, double theta) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw DomainError("bridge_constants: require 0 < alpha < 2");
    if (!(sigma > 0.0)) throw DomainError("bridge_constants: require sigma > 0");
    if (!(theta > 0.0)) throw DomainError("bridge_constants: require theta > 0");
    const double q = 0.25 * (4.0 - alpha);
    BridgeConstants out;
    out.kappa = sigma * sigma /
                (std::pow(q, 0.5 * (4.0 - alpha)) * std::pow(0.5 * alpha, 0.5 * alpha));
    out.m_closed = q * std::pow(0.5 * alpha, alpha / (4.0 - alpha)) *
                   std::pow(out.kappa, 2.0 / (4.0 - alpha)) *
                   std::pow(theta, 4.0 / (4.0 - alpha));
    out.sigma_closed_check = std::pow(q, 0.25 * (4.0 - alpha)) *
                             std::pow(0.5 * alpha, 0.25 * alpha) * std::sqrt(out.kappa);
    return out;
}

double h_constant(const PotentialModel& model, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("h_constant: require kappa > 0");
    if (model.variant == PotentialVariant::WhiteNoise1D)
        throw DomainError("h_constant: not defined for white noise; use theorem_limit");
    const double a = model.effective_alpha();
    const double c = model.amplitude();
    return 0.25 * (4.0 - a) * std::pow(0.5 * a, a / (4.0 - a)) *
           std::pow(2.0 * model.d * c * kappa, 2.0 / (4.0 - a));
}

double theorem_limit(const PotentialModel& model, double theta,
                     std::optional<double> kappa) {
    if (!(theta > 0.0)) throw DomainError("theorem_limit: require theta > 0");
    if (model.variant == PotentialVariant::WhiteNoise1D)
        return 0.5 * std::pow(1.5, 2.0 / 3.0) * std::pow(theta, 4.0 / 3.0);
    if (!kappa) throw DomainError("theorem_limit: kappa required for this model");
    const double a = model.effective_alpha();
    const double c = model.amplitude();
    return 0.25 * (4.0 - a) * std::pow(0.5 * a, a / (4.0 - a)) *
           std::pow(2.0 * model.d * c * theta * theta * (*kappa), 2.0 / (4.0 - a));
}

GnCheck gn_inequality_check(const TestFunction& f, const KernelSpec& kernel, double kappa) {
    const double norm = f.l2();
    if (!(norm > 0.0)) throw DomainError("gn_inequality_check: zero function");
    KernelEnergy ke(f.grid, kernel);
    const double a = kernel.effective_alpha();
    GnCheck out;
    out.lhs = ke.energy(f.values);
    out.rhs = kappa * std::pow(norm, 4.0 - a) * std::pow(f.grad(), a);
    out.holds = out.lhs <= out.rhs * 1.01;
    return out;
}

GridSpec variational_reference_grid(int d) {
    switch (d) {
        case 1:
            return GridSpec(1, 8.0, 1024);
        case 2:
            return GridSpec(2, 8.0, 256);
        default:
            return GridSpec(3, 6.0, 96);
    }
}

} // namespace anderson
