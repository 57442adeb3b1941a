#include "stationary/cli.hpp"

#include "stationary/diagnostics.hpp"
#include "stationary/errors.hpp"
#include "stationary/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <ostream>

namespace stationary {

namespace {

const std::vector<std::string> kCommands = {"build", "errors", "invariance", "rate", "diagnose", "baseline", "mcmc"};

double require(const std::optional<double>& v, const char* key, const RunConfig& c) {
    if (!v) throw ValidationError(fmt::format("'{}' needs key '{}'", c.command, key));
    return *v;
}

InnovationDensity build_innovation(const RunConfig& c) {
    if (c.innovation == "gaussian") return InnovationDensity::gaussian(c.sigma);
    if (c.innovation == "exponential") return InnovationDensity::exponential(c.rate);
    if (c.innovation == "uniform") return InnovationDensity::uniform(c.uniform_lo, c.uniform_hi);
    throw ValidationError("unknown innovation '" + c.innovation + "'");
}

Partition partition_for(const RunConfig& c, double delta) {
    return build_partition(require(c.k_minus, "k_minus", c), require(c.k_plus, "k_plus", c), delta);
}

Partition partition_for(const RunConfig& c) { return partition_for(c, require(c.delta, "delta", c)); }

PipelineOptions pipeline_options(const RunConfig& c) {
    PipelineOptions o;
    o.assembly.quadrature = QuadratureRule::parse(c.quadrature);
    if (c.inf_strategy) o.assembly.strategy = InfStrategy::parse(*c.inf_strategy);
    o.assembly.j0 = c.j0;
    o.assembly.threads = c.threads;
    o.solve.method = SolverMethod::parse(c.solver);
    o.solve.threads = c.threads;
    return o;
}

/// Closed-form stationary density when the model has one.
std::optional<DensityFn> exact_density(const RunConfig& c) {
    if (c.model == "ar1" && c.innovation == "gaussian") return gaussian_ar1_density(*c.rho, c.sigma);
    if (c.model == "constant") {
        const InnovationDensity nu = build_innovation(c);
        return DensityFn([nu](double x) { return nu(x); });
    }
    return std::nullopt;
}

std::filesystem::path output_path(const RunConfig& c, const char* name) {
    std::error_code ec;
    std::filesystem::create_directories(c.output_dir, ec);
    if (ec) throw ValidationError(fmt::format("cannot create output directory '{}': {}", c.output_dir, ec.message()));
    return std::filesystem::path(c.output_dir) / name;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot open '" + path.string() + "' for writing");
    return f;
}

void finish(std::ofstream& f, const std::filesystem::path& path) {
    f.close();
    if (!f) throw ValidationError("failed writing '" + path.string() + "'");
}

std::string optional_field(const std::optional<double>& v) { return v ? fmt::format("{:.15g}", *v) : ""; }

void write_report(const RunConfig& c, ErrorReport report, std::ostream& out) {
    report.config["run"] = to_json(c);
    const auto path = output_path(c, "report.json");
    auto f = open_output(path);
    f << to_json(report).dump(2) << '\n';
    finish(f, path);
    fmt::print(out, "dirac_weight = {:.6e}\n", report.dirac_weight);
    if (report.sup_error) fmt::print(out, "sup_error = {:.6e}\nl1_riemann = {:.6e}\n", *report.sup_error, *report.l1_riemann);
    if (report.invariance_residual) fmt::print(out, "invariance_residual = {:.6e}\n", *report.invariance_residual);
    fmt::print(out, "runtime_seconds = {:.3f}\nwrote {}\n", report.runtime_seconds, path.string());
}

void run_density(const RunConfig& c, std::ostream& out) {
    const KernelModel model = build_model(c);
    const Partition p = partition_for(c);
    const PipelineOptions options = pipeline_options(c);
    const PipelineResult run = run_pipeline(model, p, options);

    std::optional<DensityFn> exact;
    if (c.command == "errors") {
        exact = exact_density(c);
        if (!exact) throw ValidationError("'errors' needs a closed-form target (model=ar1 with gaussian innovation, or constant)");
    }
    const ErrorReport report =
        make_error_report(run, options.solve, exact ? &*exact : nullptr, c.command == "invariance", c.threads);

    const auto path = output_path(c, "density.csv");
    auto f = open_output(path);
    write_density_csv(run.density, f, exact ? &*exact : nullptr, c.threads);
    finish(f, path);
    if (c.dump_matrix) {
        const auto mpath = output_path(c, "matrix.csv");
        auto m = open_output(mpath);
        write_triplets(run.chain, m);
        finish(m, mpath);
    }
    for (const auto& w : run.chain.warnings) fmt::print(out, "warning: {}\n", w);
    write_report(c, report, out);
}

void run_rate(const RunConfig& c, std::ostream& out) {
    if (c.deltas.empty()) throw ValidationError("'rate' needs key 'deltas'");
    const KernelModel model = build_model(c);
    const std::optional<DensityFn> exact = exact_density(c);
    const RateStudy study = rate_study(model, require(c.k_minus, "k_minus", c), require(c.k_plus, "k_plus", c),
                                       c.deltas, exact, pipeline_options(c));
    const auto path = output_path(c, "rate.csv");
    auto f = open_output(path);
    f << "delta,sup_error,l1_riemann,invariance_residual,slope\n";
    for (std::size_t i = 0; i < study.rows.size(); ++i) {
        const ErrorReport& r = study.rows[i];
        fmt::print(f, "{:.15g},{},{},{},{}\n", study.deltas[i], optional_field(r.sup_error), optional_field(r.l1_riemann),
                   optional_field(r.invariance_residual), optional_field(study.slope));
    }
    if (study.slope_l1) fmt::print(f, "# slope_l1={:.15g}\n", *study.slope_l1);
    finish(f, path);
    for (const auto& failure : study.failures) fmt::print(out, "failed: {}\n", failure);
    fmt::print(out, "slope = {}\n", study.slope ? fmt::format("{:.4f}", *study.slope) : "absent");
    if (study.slope_l1) fmt::print(out, "slope_l1 = {:.4f}\n", *study.slope_l1);
    fmt::print(out, "wrote {}\n", path.string());
    if (study.rows.empty()) throw NumericalError("every mesh of the rate study failed");
}

void run_diagnose(const RunConfig& c, std::ostream& out) {
    const KernelModel model = build_model(c);
    const Partition p = partition_for(c);
    const AssumptionReport report =
        assumption_diagnostics(model, p, c.mc_samples, c.seed, QuadratureRule::parse(c.quadrature), c.threads);
    nlohmann::json j = to_json(report);
    j["config"] = to_json(c);
    const auto path = output_path(c, "assumptions.json");
    auto f = open_output(path);
    f << j.dump(2) << '\n';
    finish(f, path);
    fmt::print(out, "alpha_k = {:.6e}\ndrift = ({:.2f}, {:.6g}) {}\nlipschitz_budget = {:.6e}\ntau_k = {:.6e}\n",
               report.alpha_k, report.drift_delta_hat, report.drift_M_hat,
               report.drift_verified ? "verified" : "not verified", report.lipschitz_budget, report.tau_k);
    if (report.arch_logmoment) fmt::print(out, "arch_logmoment = {:.6f}\n", *report.arch_logmoment);
    fmt::print(out, "verdict = {}\nwrote {}\n", j["verdict"].get<std::string>(), path.string());
}

void run_baseline(const RunConfig& c, std::ostream& out) {
    if (c.model != "ar1") throw ValidationError("'baseline' needs model=ar1");
    const double rho = require(c.rho, "rho", c);
    const TabulatedDensity h = hn_baseline(build_innovation(c), rho, c.n_iters, partition_for(c));
    const std::optional<DensityFn> exact = exact_density(c);
    const auto path = output_path(c, "hn.csv");
    auto f = open_output(path);
    f << (exact ? "x,h_n,p_exact\n" : "x,h_n\n");
    double sup = 0.0;
    for (std::size_t i = 0; i < h.xs().size(); ++i) {
        const double x = h.xs()[i];
        if (exact) {
            const double e = (*exact)(x);
            sup = std::max(sup, std::abs(h.values()[i] - e));
            fmt::print(f, "{:.15g},{:.15g},{:.15g}\n", x, h.values()[i], e);
        } else {
            fmt::print(f, "{:.15g},{:.15g}\n", x, h.values()[i]);
        }
    }
    finish(f, path);
    if (exact) fmt::print(out, "sup_distance = {:.6e}\n", sup);
    fmt::print(out, "wrote {}\n", path.string());
}

void run_mcmc(const RunConfig& c, std::ostream& out) {
    const KernelModel model = build_model(c);
    const Partition p = partition_for(c);
    const TabulatedDensity hist = mcmc_histogram(model, c.n_samples, p, c.seed);
    const std::optional<DensityFn> exact = exact_density(c);
    const auto path = output_path(c, "hist.csv");
    auto f = open_output(path);
    f << (exact ? "x,hist,p_exact\n" : "x,hist\n");
    for (std::size_t i = 0; i < hist.xs().size(); ++i) {
        const double x = hist.xs()[i];
        if (exact) fmt::print(f, "{:.15g},{:.15g},{:.15g}\n", x, hist.values()[i], (*exact)(x));
        else fmt::print(f, "{:.15g},{:.15g}\n", x, hist.values()[i]);
    }
    finish(f, path);
    if (exact) fmt::print(out, "l1_to_exact = {:.6e}\n", histogram_l1(hist, p.delta(), *exact));
    fmt::print(out, "wrote {}\n", path.string());
}

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

KernelModel build_model(const RunConfig& c) {
    if (c.model.empty()) throw ValidationError(fmt::format("'{}' needs key 'model'", c.command));
    std::optional<KernelModel> model;
    if (c.model == "ar1") {
        model = KernelModel::ar1(require(c.rho, "rho", c), build_innovation(c));
    } else if (c.model == "ar1_iter3") {
        model = KernelModel::iterated_ar1(require(c.rho, "rho", c), build_innovation(c), 3, c.conv_mesh);
    } else if (c.model == "arch1") {
        model = KernelModel::arch1(require(c.alpha, "alpha", c), c.beta, require(c.lambda, "lambda", c),
                                   build_innovation(c));
    } else if (c.model == "constant") {
        model = KernelModel::constant(build_innovation(c));
    } else {
        throw ValidationError("unknown model '" + c.model + "'");
    }
    if (c.m) return model->with_drift_exponent(*c.m);
    return *model;
}

nlohmann::json to_json(const RunConfig& c) {
    return {
        {"command", c.command},
        {"model", c.model},
        {"rho", opt(c.rho)},
        {"alpha", opt(c.alpha)},
        {"beta", c.beta},
        {"lambda", opt(c.lambda)},
        {"innovation", c.innovation},
        {"sigma", c.sigma},
        {"rate", c.rate},
        {"uniform_lo", c.uniform_lo},
        {"uniform_hi", c.uniform_hi},
        {"m", opt(c.m)},
        {"conv_mesh", c.conv_mesh},
        {"k_minus", opt(c.k_minus)},
        {"k_plus", opt(c.k_plus)},
        {"delta", opt(c.delta)},
        {"deltas", c.deltas},
        {"quadrature", c.quadrature},
        {"inf_strategy", opt(c.inf_strategy)},
        {"solver", c.solver},
        {"j0", opt(c.j0)},
        {"output_dir", c.output_dir},
        {"seed", c.seed},
        {"threads", c.threads},
        {"n_iters", c.n_iters},
        {"n_samples", c.n_samples},
        {"mc_samples", c.mc_samples},
        {"dump_matrix", c.dump_matrix},
    };
}

void run_command(const RunConfig& c, std::ostream& out) {
    if (c.command == "build" || c.command == "errors" || c.command == "invariance") run_density(c, out);
    else if (c.command == "rate") run_rate(c, out);
    else if (c.command == "diagnose") run_diagnose(c, out);
    else if (c.command == "baseline") run_baseline(c, out);
    else if (c.command == "mcmc") run_mcmc(c, out);
    else throw ValidationError("unknown command '" + c.command + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Stationary law of a Markov chain with density kernel", "stationary-kernel"};
    app.set_config("--config", "", "flat `key = value` file; flags override it");
    app.allow_config_extras(false);
    app.add_option("command", c.command, "build | errors | invariance | rate | diagnose | baseline | mcmc")
        ->required()
        ->check(CLI::IsMember(kCommands));

    app.add_option("--model", c.model, "ar1 | ar1_iter3 | arch1 | constant");
    app.add_option("--rho", c.rho);
    app.add_option("--alpha", c.alpha);
    app.add_option("--beta", c.beta)->capture_default_str();
    app.add_option("--lambda", c.lambda);
    app.add_option("--innovation", c.innovation, "gaussian | exponential | uniform")->capture_default_str();
    app.add_option("--sigma", c.sigma)->capture_default_str();
    app.add_option("--rate", c.rate)->capture_default_str();
    app.add_option("--uniform_lo", c.uniform_lo)->capture_default_str();
    app.add_option("--uniform_hi", c.uniform_hi)->capture_default_str();
    app.add_option("--m", c.m, "drift exponent");
    app.add_option("--conv_mesh", c.conv_mesh, "lattice step for ar1_iter3")->capture_default_str();
    app.add_option("--k_minus", c.k_minus);
    app.add_option("--k_plus", c.k_plus);
    app.add_option("--delta", c.delta);
    app.add_option("--deltas", c.deltas, "comma separated meshes for 'rate'")->delimiter(',');
    app.add_option("--quadrature", c.quadrature, "gauss5 | gauss3 | gaussN | midpoint")->capture_default_str();
    app.add_option("--inf_strategy", c.inf_strategy, "endpoint | sampled:<n>");
    app.add_option("--solver", c.solver, "auto | direct | power | power:<tol>")->capture_default_str();
    app.add_option("--j0", c.j0, "cell receiving the defect mass");
    app.add_option("--output_dir", c.output_dir)->capture_default_str();
    app.add_option("--seed", c.seed)->capture_default_str();
    app.add_option("--threads", c.threads, "0 = all cores")->capture_default_str();
    app.add_option("--n_iters", c.n_iters)->capture_default_str();
    app.add_option("--n_samples", c.n_samples)->capture_default_str();
    app.add_option("--mc_samples", c.mc_samples)->capture_default_str();
    app.add_option("--dump_matrix", c.dump_matrix)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ConfigError& e) {
        fmt::print(err, "error: unknown or malformed config entry ({})\n", e.what());
        return 1;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    }

    try {
        run_command(c, out);
    } catch (const ValidationError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    } catch (const NumericalError& e) {
        fmt::print(err, "numerical failure: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(err, "failure: {}\n", e.what());
        return 2;
    }
    return 0;
}

}  // namespace stationary
