// Python bindings for the main operations of the laboratory.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "anderson/eigensolver.hpp"
#include "anderson/feynman_kac.hpp"
#include "anderson/field_io.hpp"
#include "anderson/mollifier.hpp"
#include "anderson/potentials.hpp"
#include "anderson/rng.hpp"
#include "anderson/slepian.hpp"
#include "anderson/variational.hpp"

namespace py = pybind11;
using namespace anderson;

namespace {

std::vector<double> to_vec(const py::array_t<double>& arr) {
    const auto buf = arr.request();
    const double* ptr = static_cast<const double*>(buf.ptr);
    return std::vector<double>(ptr, ptr + buf.size);
}

py::array_t<double> field_array(const FieldSample& f) {
    std::vector<py::ssize_t> shape(f.grid.d, f.grid.n);
    py::array_t<double> out(shape);
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

FieldSample field_from(const py::array_t<double>& values, const GridSpec& grid, double eps) {
    FieldSample f;
    f.grid = grid;
    f.model = PotentialModel::white_noise_1d(); // tag only; not serialized here
    f.epsilon = eps;
    f.values = to_vec(values);
    if (static_cast<std::int64_t>(f.values.size()) != grid.total_nodes())
        throw DomainError("field values do not match the grid");
    return f;
}

} // namespace

PYBIND11_MODULE(_anderson, m) {
    m.doc() = "Numerical laboratory for Brownian motion in generalized Gaussian potential";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<EmbeddingError>(m, "EmbeddingError", PyExc_RuntimeError);
    py::register_exception<ExitError>(m, "ExitError", PyExc_RuntimeError);

    py::class_<GridSpec>(m, "Grid")
        .def(py::init<int, double, std::int64_t>(), py::arg("d"), py::arg("half_width"),
             py::arg("n"))
        .def_readonly("d", &GridSpec::d)
        .def_readonly("half_width", &GridSpec::half_width)
        .def_readonly("n", &GridSpec::n)
        .def_property_readonly("spacing", &GridSpec::spacing)
        .def("coord", &GridSpec::coord);

    py::class_<PotentialModel>(m, "Model")
        .def_static("riesz", &PotentialModel::riesz, py::arg("d"), py::arg("alpha"),
                    py::arg("c_gamma"))
        .def_static("newtonian", &PotentialModel::newtonian, py::arg("d"), py::arg("p"))
        .def_static("fractional", &PotentialModel::fractional, py::arg("hurst"))
        .def_static("white_noise_1d", &PotentialModel::white_noise_1d)
        .def_property_readonly("d", [](const PotentialModel& p) { return p.d; })
        .def_property_readonly("effective_alpha", &PotentialModel::effective_alpha)
        .def_property_readonly("amplitude", &PotentialModel::amplitude)
        .def_property_readonly("tag", &PotentialModel::tag);

    m.def("newtonian_coupling", &newtonian_coupling, py::arg("d"), py::arg("p"));
    m.def(
        "covariance",
        [](const PotentialModel& model, const std::vector<double>& x) {
            return covariance(model, x);
        },
        py::arg("model"), py::arg("x"));
    m.def(
        "spectral_density",
        [](const PotentialModel& model, const std::vector<double>& lam) {
            return spectral_density(model, lam);
        },
        py::arg("model"), py::arg("lam"));
    m.def(
        "mollifier_fourier",
        [](int d, double eps, double lambda_norm) {
            return mollifier::mollifier_fourier(d, eps, lambda_norm);
        },
        py::arg("d"), py::arg("eps"), py::arg("lambda_norm"));
    m.def(
        "spectral_integrability",
        [](const PotentialModel& model, double delta, const std::vector<double>& cutoffs) {
            return spectral_integrability(model, delta, cutoffs);
        },
        py::arg("model"), py::arg("delta"), py::arg("cutoffs"));

    py::class_<FieldSample>(m, "Field")
        .def_property_readonly("values", &field_array)
        .def_property_readonly("grid", [](const FieldSample& f) { return f.grid; })
        .def_readonly("epsilon", &FieldSample::epsilon)
        .def_readonly("seed", &FieldSample::seed);

    py::class_<FieldSynthesizer>(m, "FieldSynthesizer")
        .def(py::init<const PotentialModel&, const GridSpec&, double>(), py::arg("model"),
             py::arg("grid"), py::arg("eps"))
        .def("sample", &FieldSynthesizer::sample, py::arg("seed"))
        .def("target_covariance",
             [](const FieldSynthesizer& s, const std::vector<double>& lag) {
                 return s.target_covariance(lag);
             })
        .def_property_readonly("target_variance", &FieldSynthesizer::target_variance)
        .def_property_readonly("padding_factor", &FieldSynthesizer::padding_factor);

    m.def("synthesize_field", &synthesize_field, py::arg("model"), py::arg("grid"),
          py::arg("eps"), py::arg("seed"));
    m.def("write_field",
          [](const FieldSample& f, const std::string& path) { write_field(f, path); });

    m.def(
        "principal_eigenvalue",
        [](const py::array_t<double>& values, const GridSpec& grid, double theta, double tol) {
            const FieldSample f = field_from(values, grid, 1.0);
            const EigenResult r = principal_eigenvalue(DiscreteOperator(f, theta), tol);
            py::dict out;
            out["lambda"] = r.lambda;
            out["iterations"] = r.iterations;
            out["residual"] = r.residual;
            py::array_t<double> psi(static_cast<py::ssize_t>(r.eigenfunction.size()));
            std::copy(r.eigenfunction.begin(), r.eigenfunction.end(), psi.mutable_data());
            out["eigenfunction"] = psi;
            return out;
        },
        py::arg("values"), py::arg("grid"), py::arg("theta"), py::arg("tol") = 1e-8);

    py::class_<KernelSpec>(m, "Kernel")
        .def_static("riesz", &KernelSpec::riesz, py::arg("alpha"))
        .def_static("product", &KernelSpec::product, py::arg("alphas"))
        .def_static("quartic", &KernelSpec::quartic)
        .def_property_readonly("effective_alpha", &KernelSpec::effective_alpha);

    auto solution_dict = [](const VariationalSolution& s) {
        py::dict out;
        out["objective"] = s.objective;
        out["energy"] = s.energy;
        out["constraint"] = std::string(1, s.constraint);
        out["constraint_residual"] = s.constraint_residual;
        out["iterations"] = s.iterations;
        out["converged"] = s.converged;
        py::array_t<double> f(static_cast<py::ssize_t>(s.f.values.size()));
        std::copy(s.f.values.begin(), s.f.values.end(), f.mutable_data());
        out["f"] = f;
        return out;
    };
    m.def(
        "maximize_sigma",
        [solution_dict](const KernelSpec& k, const GridSpec& g, int max_iter, double tol,
                        int starts) {
            return solution_dict(maximize_sigma(k, g, max_iter, tol, starts));
        },
        py::arg("kernel"), py::arg("grid"), py::arg("max_iter") = 2000,
        py::arg("tol") = 1e-10, py::arg("starts") = 3);
    m.def(
        "maximize_m",
        [solution_dict](const KernelSpec& k, double theta, const GridSpec& g, int max_iter,
                        double tol, int starts) {
            return solution_dict(maximize_M(k, theta, g, max_iter, tol, starts));
        },
        py::arg("kernel"), py::arg("theta"), py::arg("grid"), py::arg("max_iter") = 2000,
        py::arg("tol") = 1e-10, py::arg("starts") = 3);
    m.def(
        "bridge_constants",
        [](double sigma, double alpha, double theta) {
            const BridgeConstants b = bridge_constants(sigma, alpha, theta);
            py::dict out;
            out["kappa"] = b.kappa;
            out["m_closed"] = b.m_closed;
            out["sigma_closed_check"] = b.sigma_closed_check;
            return out;
        },
        py::arg("sigma"), py::arg("alpha"), py::arg("theta"));
    m.def("h_constant", &h_constant, py::arg("model"), py::arg("kappa"));
    m.def(
        "theorem_limit",
        [](const PotentialModel& model, double theta, std::optional<double> kappa) {
            return theorem_limit(model, theta, kappa);
        },
        py::arg("model"), py::arg("theta"), py::arg("kappa") = py::none());

    py::class_<PathEnsemble>(m, "PathEnsemble")
        .def_readonly("d", &PathEnsemble::d)
        .def_readonly("t", &PathEnsemble::t)
        .def_readonly("dt", &PathEnsemble::dt)
        .def_readonly("m", &PathEnsemble::m)
        .def_readonly("steps", &PathEnsemble::steps)
        .def_property_readonly("positions", [](const PathEnsemble& e) {
            py::array_t<double> out({static_cast<py::ssize_t>(e.m),
                                     static_cast<py::ssize_t>(e.steps + 1),
                                     static_cast<py::ssize_t>(e.d)});
            std::copy(e.positions.begin(), e.positions.end(), out.mutable_data());
            return out;
        });
    m.def(
        "sample_paths",
        [](int d, double t, double dt, std::int64_t count, std::vector<double> start,
           std::uint64_t seed) {
            std::array<double, 3> s = {0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < start.size() && i < 3; ++i) s[i] = start[i];
            return sample_paths(d, t, dt, count, s, seed);
        },
        py::arg("d"), py::arg("t"), py::arg("dt"), py::arg("m"),
        py::arg("start") = std::vector<double>{}, py::arg("seed") = 1);
    m.def(
        "potential_line_integral",
        [](const PathEnsemble& e, std::int64_t i, const py::array_t<double>& values,
           const GridSpec& grid) {
            const FieldSample f = field_from(values, grid, 1.0);
            return potential_line_integral(e, i, f);
        },
        py::arg("ensemble"), py::arg("path_index"), py::arg("values"), py::arg("grid"));
    m.def(
        "conditional_variance_spectral",
        [](const PathEnsemble& e, std::int64_t i, const PotentialModel& model, double eps) {
            return conditional_variance_spectral(e, i, model, eps);
        },
        py::arg("ensemble"), py::arg("path_index"), py::arg("model"), py::arg("eps"));
    m.def(
        "quenched_moment",
        [](const py::array_t<double>& values, const GridSpec& grid, double theta,
           const PathEnsemble& e, bool dirichlet) {
            const MomentStats s =
                quenched_moment(field_from(values, grid, 1.0), theta, e, dirichlet);
            py::dict out;
            out["log_moment"] = s.log_moment;
            out["growth_rate"] = s.growth_rate;
            out["se"] = s.standard_error;
            out["ess"] = s.ess;
            out["surviving_fraction"] = s.surviving_fraction;
            return out;
        },
        py::arg("values"), py::arg("grid"), py::arg("theta"), py::arg("ensemble"),
        py::arg("dirichlet"));
    m.def(
        "annealed_consistency",
        [](const PotentialModel& model, double theta, double t, double dt,
           std::int64_t m_paths, std::int64_t m_fields, double eps, std::uint64_t seed,
           unsigned threads) {
            AnnealedOptions opt;
            opt.threads = threads;
            const AnnealedResult r =
                annealed_consistency(model, theta, t, dt, m_paths, m_fields, eps, seed, opt);
            py::dict out;
            out["lhs"] = r.lhs;
            out["rhs"] = r.rhs;
            out["z_score"] = r.z_score;
            return out;
        },
        py::arg("model"), py::arg("theta"), py::arg("t"), py::arg("dt"), py::arg("m_paths"),
        py::arg("m_fields"), py::arg("eps"), py::arg("seed"), py::arg("threads") = 2);

    m.def(
        "slepian_check",
        [](const py::array_t<double>& cov, double a, double b, std::int64_t trials,
           std::uint64_t seed) {
            const auto buf = cov.request();
            if (buf.ndim != 2 || buf.shape[0] != buf.shape[1])
                throw DomainError("slepian_check: covariance must be square");
            const int n = static_cast<int>(buf.shape[0]);
            const SlepianResult r = slepian_check(n, to_vec(cov), a, b, trials, seed);
            py::dict out;
            out["lhs_freq"] = r.lhs_freq;
            out["rhs_bound"] = r.rhs_bound;
            out["holds"] = r.holds;
            return out;
        },
        py::arg("cov"), py::arg("a"), py::arg("b"), py::arg("trials"), py::arg("seed"));

    m.def("stream_id", &stream_id, py::arg("master_seed"), py::arg("task_index"));
}
