#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "anderson/grid.hpp"
#include "anderson/potentials.hpp"

namespace anderson {

/// Singular interaction kernels for the double integral
/// E(f) = int int f^2(x) f^2(y) K(x-y) dx dy.
struct KernelSpec {
    enum class Variant { Riesz, Product, Quartic };
    Variant variant = Variant::Quartic;
    double alpha = 0.0;          // Riesz exponent
    std::vector<double> alphas;  // product per-axis exponents

    static KernelSpec riesz(double alpha);
    static KernelSpec product(std::vector<double> alphas);
    static KernelSpec quartic();

    /// alpha, sum of alphas, or 1 (quartic convention).
    double effective_alpha() const;
    void validate(int d) const;
    std::string tag() const;
};

struct TestFunction {
    GridSpec grid;
    std::vector<double> values;

    double l2() const;
    double grad() const;
};

/// Average of |y|^-alpha over the grid cell [-h/2, h/2]^d.
double riesz_cell_average(int d, double alpha, double h);

/// FFT-convolution evaluator of E(f) with the singular diagonal cell
/// replaced by the analytic cell integral of the power kernel.
class KernelEnergy {
public:
    KernelEnergy(const GridSpec& grid, const KernelSpec& kernel);
    ~KernelEnergy();
    KernelEnergy(KernelEnergy&&) noexcept;

    double energy(std::span<const double> f) const;
    /// Returns E(f) and writes dE/df into grad.
    double energy_and_gradient(std::span<const double> f, std::span<double> grad) const;

    const KernelSpec& kernel() const;
    const GridSpec& grid() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct VariationalSolution {
    TestFunction f;
    double objective = 0.0; // sigma estimate (G_d) or M estimate (F_d)
    double energy = 0.0;    // kernel double integral at the solution
    char constraint = 'F';  // 'F': ||g||_2 = 1; 'G': ||g||^2 + 0.5 ||grad g||^2 = 1
    double constraint_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// sup E(g)^{1/2} over the G_d constraint set by projected gradient ascent
/// (Barzilai-Borwein step seeding, backtracking, multi-start).
VariationalSolution maximize_sigma(const KernelSpec& kernel, const GridSpec& grid,
                                   int max_iter = 2000, double tol = 1e-10, int starts = 3);

/// sup theta E(g)^{1/2} - 0.5 ||grad g||^2 over the F_d constraint set.
VariationalSolution maximize_M(const KernelSpec& kernel, double theta, const GridSpec& grid,
                               int max_iter = 2000, double tol = 1e-10, int starts = 3);

struct BridgeConstants {
    double kappa = 0.0;
    double m_closed = 0.0;
    double sigma_closed_check = 0.0;
};

/// Closed-form bridges: kappa from sigma, M from kappa, sigma round-trip.
BridgeConstants bridge_constants(double sigma, double alpha, double theta);

/// h(d, alpha) = ((4-a)/4) (a/2)^{a/(4-a)} (2 d c kappa)^{2/(4-a)} with the
/// model's amplitude c; white noise has no h-form (use theorem_limit).
double h_constant(const PotentialModel& model, double kappa);

/// The almost-sure limit constant of the matching theorem; closed form for
/// white noise, kappa required otherwise.
double theorem_limit(const PotentialModel& model, double theta, std::optional<double> kappa);

struct GnCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// E(f) <= kappa ||f||^{4-a} ||grad f||^a with 1e-2 discretization slack.
GnCheck gn_inequality_check(const TestFunction& f, const KernelSpec& kernel, double kappa);

/// Reference optimization grids (d = 1, 2, 3).
GridSpec variational_reference_grid(int d);

} // namespace anderson
