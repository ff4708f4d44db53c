// anderson: CLI for the Anderson-model numerical laboratory.
//
// Subcommands: synth, eig, variational, fk, scaling, slepian, acceptance.
// Exit codes: 0 success, 2 config error, 3 numerical non-convergence,
// 4 acceptance failure.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "anderson/acceptance.hpp"
#include "anderson/config.hpp"
#include "anderson/eigensolver.hpp"
#include "anderson/experiments.hpp"
#include "anderson/feynman_kac.hpp"
#include "anderson/field_io.hpp"
#include "anderson/rng.hpp"
#include "anderson/slepian.hpp"
#include "anderson/variational.hpp"

namespace {

using namespace anderson;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    bool seed_given = false;
    unsigned threads = 2;
    double tol = 1e-8;
};

std::filesystem::path ensure_out(const CommonArgs& args) {
    std::filesystem::path p(args.out_dir);
    std::filesystem::create_directories(p);
    return p;
}

std::uint64_t effective_seed(const CommonArgs& args, const Config& cfg) {
    return args.seed_given ? args.seed : cfg.get_uint("seed", 1);
}

int cmd_synth(const CommonArgs& args) {
    Config cfg = Config::parse_file(args.config_path);
    const PotentialModel model = model_from_config(cfg);
    const GridSpec grid = grid_from_config(cfg, model.d);
    const double eps = cfg.get_double("eps");
    const std::int64_t count = cfg.get_int("count", 1);
    const std::uint64_t seed = effective_seed(args, cfg);
    const bool validate = cfg.get_int("validate", 0) != 0;
    const std::int64_t replicates = cfg.get_int("replicates", 10000);
    std::vector<double> lag_list = cfg.get_list("lags", {0, 1, 2, 5, 10});
    cfg.finalize();

    const auto out = ensure_out(args);
    FieldSynthesizer synth(model, grid, eps);
    for (std::int64_t i = 0; i < count; ++i) {
        const FieldSample sample = synth.sample(stream_id(seed, i));
        char name[64];
        std::snprintf(name, sizeof(name), "field_%" PRIu64 ".txt", sample.seed);
        write_field(sample, (out / name).string());
    }
    std::printf("wrote %" PRId64 " field dump(s) to %s (padding=%d)\n", count,
                out.string().c_str(), synth.padding_factor());

    if (validate) {
        std::vector<std::vector<std::int64_t>> lags;
        for (double v : lag_list) {
            std::vector<std::int64_t> lag(grid.d, 0);
            lag[0] = static_cast<std::int64_t>(v);
            lags.push_back(lag);
        }
        SynthValidateOptions opt;
        opt.replicates = replicates;
        opt.master_seed = seed;
        ResultTable tab = run_synth_validate(model, grid, eps, lags, opt, args.threads);
        tab.add_meta("config_hash", cfg.hash());
        emit_report(tab, (out / "synth_validate.csv").string());
        std::printf("validation table: %s\n", (out / "synth_validate.csv").string().c_str());
    }
    return 0;
}

int cmd_eig(const CommonArgs& args) {
    Config cfg = Config::parse_file(args.config_path);
    const PotentialModel model = model_from_config(cfg);
    const GridSpec grid = grid_from_config(cfg, model.d);
    const double eps = cfg.get_double("eps");
    const double theta = cfg.get_double("theta");
    const std::uint64_t seed = effective_seed(args, cfg);
    cfg.finalize();

    const FieldSample field = synthesize_field(model, grid, eps, seed);
    const EigenResult eig = principal_eigenvalue(DiscreteOperator(field, theta), args.tol);

    ResultTable tab;
    tab.columns = {"model", "d", "R", "n", "eps", "seed", "theta", "lambda", "residual",
                   "iterations"};
    tab.add_meta("config_hash", cfg.hash());
    tab.add_row({model.tag(), std::to_string(model.d), format_double(grid.half_width),
                 std::to_string(grid.n), format_double(eps), std::to_string(seed),
                 format_double(theta), format_double(eig.lambda), format_double(eig.residual),
                 std::to_string(eig.iterations)});
    const auto out = ensure_out(args);
    emit_report(tab, (out / "eig.csv").string());
    std::printf("lambda = %.12g (residual %.2e, %d applies) -> %s\n", eig.lambda, eig.residual,
                eig.iterations, (out / "eig.csv").string().c_str());
    return 0;
}

int cmd_variational(const CommonArgs& args) {
    Config cfg = Config::parse_file(args.config_path);
    const std::string kind = cfg.get_string("kernel");
    const int d = static_cast<int>(cfg.get_int("d", 1));
    KernelSpec kernel = KernelSpec::quartic();
    if (kind == "riesz")
        kernel = KernelSpec::riesz(cfg.get_double("kernel.alpha"));
    else if (kind == "product")
        kernel = KernelSpec::product(cfg.get_list("kernel.alphas"));
    else if (kind != "quartic")
        throw ConfigError("config: unknown kernel `" + kind + "`");

    GridSpec grid = variational_reference_grid(d);
    if (cfg.has("grid.half_width")) grid = grid_from_config(cfg, d);
    const std::vector<double> thetas = cfg.get_list("theta", {1.0});
    VariationalOptions opt;
    opt.max_iter = static_cast<int>(cfg.get_int("max_iter", 2000));
    opt.tol = cfg.get_double("tol", 1e-10);
    opt.starts = static_cast<int>(cfg.get_int("starts", 3));
    cfg.finalize();

    std::vector<ConstantsRow> rows;
    for (double theta : thetas) rows.push_back(run_constants_row(kernel, grid, theta, opt));
    ResultTable tab = constants_table(rows);
    tab.add_meta("config_hash", cfg.hash());
    const auto out = ensure_out(args);
    emit_report(tab, (out / "constants.csv").string());
    for (const auto& row : rows)
        std::printf("theta=%.4g sigma=%.8g kappa=%.8g M_direct=%.8g M_closed=%.8g gap=%.3g\n",
                    row.theta, row.sigma, row.kappa, row.m_direct, row.m_closed, row.rel_gap);
    return 0;
}

int cmd_fk(const CommonArgs& args) {
    Config cfg = Config::parse_file(args.config_path);
    const std::string mode = cfg.get_string("mode", "semigroup");
    const PotentialModel model = model_from_config(cfg);
    const double eps = cfg.get_double("eps");
    const double theta = cfg.get_double("theta");
    const std::uint64_t seed = effective_seed(args, cfg);
    const auto out = ensure_out(args);

    if (mode == "annealed") {
        const double t = cfg.get_double("t");
        const double dt = cfg.get_double("dt", t / 256.0);
        const std::int64_t m_paths = cfg.get_int("m_paths", 2000);
        const std::int64_t m_fields = cfg.get_int("m_fields", 2000);
        AnnealedOptions opt;
        opt.threads = args.threads;
        if (cfg.has("grid.half_width")) opt.grid = grid_from_config(cfg, model.d);
        cfg.finalize();
        const AnnealedResult res = annealed_consistency(model, theta, t, dt, m_paths,
                                                        m_fields, eps, seed, opt);
        ResultTable tab;
        tab.columns = {"model", "d", "theta", "t", "dt", "m_paths", "m_fields", "eps",
                       "lhs", "rhs", "se_lhs", "se_rhs", "z"};
        tab.add_meta("config_hash", cfg.hash());
        tab.add_row({model.tag(), std::to_string(model.d), format_double(theta),
                     format_double(t), format_double(dt), std::to_string(m_paths),
                     std::to_string(m_fields), format_double(eps), format_double(res.lhs),
                     format_double(res.rhs), format_double(res.se_lhs),
                     format_double(res.se_rhs), format_double(res.z_score)});
        emit_report(tab, (out / "annealed.csv").string());
        std::printf("annealed: lhs=%.6g rhs=%.6g z=%.3f\n", res.lhs, res.rhs, res.z_score);
        return 0;
    }

    // semigroup mode
    const GridSpec grid = grid_from_config(cfg, model.d);
    const std::vector<double> ts = cfg.get_list("t");
    SemigroupOptions opt;
    opt.dt = cfg.get_double("dt", 0.01);
    opt.m = cfg.get_int("m", 100000);
    opt.seed = stream_id(seed, 2);
    cfg.finalize();

    const FieldSample field = synthesize_field(model, grid, eps, seed);
    const auto rows = semigroup_consistency(field, theta, ts, opt);
    ResultTable tab = fk_moment_table();
    tab.add_meta("config_hash", cfg.hash());
    tab.add_meta("lambda", format_double(rows.front().lambda));
    for (const auto& row : rows) {
        tab.add_row({model.tag(), std::to_string(model.d), format_double(grid.half_width),
                     std::to_string(grid.n), format_double(eps), std::to_string(seed),
                     std::to_string(opt.seed), format_double(theta), format_double(row.t),
                     format_double(opt.dt), std::to_string(opt.m), "1",
                     format_double(row.growth_rate * row.t), format_double(row.growth_rate),
                     format_double(row.se), format_double(row.ess),
                     format_double(row.surviving_fraction)});
        std::printf("t=%.3g growth=%.6g lambda=%.6g gap=%.3g\n", row.t, row.growth_rate,
                    row.lambda, row.gap);
    }
    emit_report(tab, (out / "semigroup.csv").string());
    return 0;
}

int cmd_scaling(const CommonArgs& args) {
    Config cfg = Config::parse_file(args.config_path);
    const std::string kind = cfg.get_string("experiment", "eig-scaling");
    const PotentialModel model = model_from_config(cfg);
    EigScalingOptions opt;
    opt.theta = cfg.get_double("theta", 1.0);
    opt.eps = cfg.get_double("eps", 0.5);
    opt.h_over_eps = cfg.get_double("h_over_eps", 0.5);
    opt.replicates = static_cast<int>(cfg.get_int("replicates", 20));
    opt.master_seed = effective_seed(args, cfg);
    opt.tol = args.tol;
    const auto out = ensure_out(args);

    if (kind == "theta-scaling") {
        const double t_fixed = cfg.get_double("t_fixed", 16.0);
        const std::vector<double> thetas = cfg.get_list("theta_list");
        cfg.finalize();
        const ThetaScalingResult res =
            run_theta_scaling(model, t_fixed, thetas, opt, args.threads);
        ResultTable tab;
        tab.columns = {"theta", "median_lambda", "fitted_exponent"};
        tab.add_meta("config_hash", cfg.hash());
        for (std::size_t i = 0; i < res.thetas.size(); ++i)
            tab.add_row({format_double(res.thetas[i]), format_double(res.medians[i]),
                         format_double(res.exponent)});
        emit_report(tab, (out / "theta_scaling.csv").string());
        std::printf("fitted theta exponent: %.4f\n", res.exponent);
        return 0;
    }

    const std::vector<double> ts = cfg.get_list("t", {8, 16, 32, 64});
    cfg.finalize();
    const EigScalingResult res = run_eig_scaling(model, ts, opt, args.threads);
    ResultTable cells = eig_cells_table(model, opt, res);
    cells.add_meta("config_hash", cfg.hash());
    ResultTable summary = eig_summary_table(res);
    summary.add_meta("config_hash", cfg.hash());
    emit_report(cells, (out / "scaling_cells.csv").string());
    emit_report(summary, (out / "scaling_summary.csv").string());
    std::printf("a_hat=%.5f CI=[%.5f, %.5f] reference=%.5f ratio=%.3f monotone=%d\n",
                res.a_hat, res.ci_lo, res.ci_hi, res.reference, res.ratio,
                static_cast<int>(res.medians_monotone));
    return 0;
}

int cmd_slepian(const CommonArgs& args) {
    Config cfg = Config::parse_file(args.config_path);
    const int n = static_cast<int>(cfg.get_int("n", 16));
    const double a = cfg.get_double("A", 2.0);
    const double b = cfg.get_double("B", 1.0);
    const std::int64_t trials = cfg.get_int("trials", 100000);
    const double rho = cfg.get_double("rho", 0.2);
    const std::uint64_t seed = effective_seed(args, cfg);
    cfg.finalize();

    std::vector<double> cov(static_cast<std::size_t>(n) * n, rho);
    for (int i = 0; i < n; ++i) cov[static_cast<std::size_t>(i) * n + i] = 1.0;
    const SlepianResult res = slepian_check(n, cov, a, b, trials, seed);
    ResultTable tab;
    tab.columns = {"n", "rho", "A", "B", "trials", "lhs_freq", "rhs_bound", "holds"};
    tab.add_meta("config_hash", cfg.hash());
    tab.add_row({std::to_string(n), format_double(rho), format_double(a), format_double(b),
                 std::to_string(trials), format_double(res.lhs_freq),
                 format_double(res.rhs_bound), res.holds ? "1" : "0"});
    const auto out = ensure_out(args);
    emit_report(tab, (out / "slepian.csv").string());
    std::printf("lhs=%.5f rhs=%.5f holds=%d\n", res.lhs_freq, res.rhs_bound,
                static_cast<int>(res.holds));
    return res.holds ? 0 : 3;
}

int cmd_acceptance(const CommonArgs& args, int only) {
    AcceptanceOptions opt;
    opt.threads = args.threads;
    opt.only = only;
    const auto results = run_acceptance(opt);
    bool all_pass = true;
    ResultTable tab;
    tab.columns = {"id", "name", "pass", "seconds", "detail"};
    for (const auto& r : results) {
        std::printf("%s\n", format_criterion(r).c_str());
        all_pass = all_pass && r.pass;
        tab.add_row({std::to_string(r.id), r.name, r.pass ? "1" : "0",
                     format_double(r.seconds), r.detail});
    }
    const auto out = ensure_out(args);
    emit_report(tab, (out / "acceptance.csv").string());
    std::printf("%s\n", all_pass ? "ACCEPTANCE: all criteria passed"
                                 : "ACCEPTANCE: FAILURES PRESENT");
    return all_pass ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Brownian motion in generalized Gaussian potential"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    CommonArgs args;
    app.add_option("--out", args.out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", args.seed, "master seed (overrides config)");
    app.add_option("--threads", args.threads, "worker threads")->capture_default_str();
    app.add_option("--tol", args.tol, "solver tolerance")->capture_default_str();

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "config file")->required();
    };

    auto* synth = app.add_subcommand("synth", "synthesize field dumps");
    add_config(synth);
    auto* eig = app.add_subcommand("eig", "principal eigenvalue of one sampled field");
    add_config(eig);
    auto* vari = app.add_subcommand("variational", "variational constants report");
    add_config(vari);
    auto* fk = app.add_subcommand("fk", "Feynman-Kac consistency runs");
    add_config(fk);
    auto* scaling = app.add_subcommand("scaling", "eigenvalue scaling campaigns");
    add_config(scaling);
    auto* slepian = app.add_subcommand("slepian", "Slepian comparison check");
    add_config(slepian);
    auto* acceptance = app.add_subcommand("acceptance", "run the acceptance suite");
    int only = 0;
    acceptance->add_option("--only", only, "run a single criterion (1-13)");

    CLI11_PARSE(app, argc, argv);
    args.seed_given = seed_opt->count() > 0;

    try {
        if (*synth) return cmd_synth(args);
        if (*eig) return cmd_eig(args);
        if (*vari) return cmd_variational(args);
        if (*fk) return cmd_fk(args);
        if (*scaling) return cmd_scaling(args);
        if (*slepian) return cmd_slepian(args);
        if (*acceptance) return cmd_acceptance(args, only);
    } catch (const anderson::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const anderson::DomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const anderson::ConvergenceError& e) {
        std::fprintf(stderr, "numerical non-convergence: %s\n", e.what());
        return 3;
    } catch (const anderson::EmbeddingError& e) {
        std::fprintf(stderr, "numerical non-convergence: %s (min eigenvalue %.3e, padding %d)\n",
                     e.what(), e.most_negative, e.padding_factor);
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
