#include "stationary/diagnostics.hpp"

#include "stationary/errors.hpp"
#include "stationary/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace stationary {

DensityFn gaussian_ar1_density(double rho, double sigma) {
    if (!(std::abs(rho) < 1.0)) throw DomainError("AR(1) requires |rho| < 1");
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    const double var = sigma * sigma / (1.0 - rho * rho);
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
    return [c, var](double x) { return c * std::exp(-0.5 * x * x / var); };
}

GridErrors grid_errors(const ApproxDensity& pk, std::span<const double> grid_values, const DensityFn& exact) {
    const Partition& part = pk.partition();
    if (grid_values.size() != part.q_max()) throw DimensionMismatch("grid values do not match the partition");
    GridErrors out{0.0, 0.0};
    double sum = 0.0;
    for (std::size_t i = 0; i < grid_values.size(); ++i) {
        const double d = std::abs(grid_values[i] - exact(part.point(i)));
        out.sup = std::max(out.sup, d);
        sum += d;
    }
    out.l1_riemann = part.delta() * sum;
    return out;
}

double sup_error(const ApproxDensity& pk, const DensityFn& exact, unsigned threads) {
    return grid_errors(pk, pk.grid_values(threads), exact).sup;
}

double riemann_l1_error(const ApproxDensity& pk, const DensityFn& exact, unsigned threads) {
    return grid_errors(pk, pk.grid_values(threads), exact).l1_riemann;
}

double invariance_residual(const ApproxDensity& pk, std::span<const double> grid_values, unsigned threads) {
    const Partition& part = pk.partition();
    const std::size_t q = part.q_max();
    if (grid_values.size() != q) throw DimensionMismatch("grid values do not match the partition");
    const double delta = part.delta();
    std::vector<double> diff(q);
    pk.model().visit_kernel([&](const auto& p) {
        parallel_chunks(q, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double xi = part.point(i);
                double acc = 0.0;
                for (std::size_t j = 0; j < q; ++j)
                    if (grid_values[j] != 0.0) acc += grid_values[j] * p(part.point(j), xi);
                diff[i] = std::abs(grid_values[i] - acc * delta);
            }
        });
    });
    return q == 0 ? 0.0 : *std::max_element(diff.begin(), diff.end());
}

double invariance_residual(const ApproxDensity& pk, unsigned threads) {
    const std::vector<double> values = pk.grid_values(threads);
    return invariance_residual(pk, values, threads);
}

namespace {

nlohmann::json innovation_json(const InnovationDensity& d) {
    nlohmann::json j;
    j["name"] = d.name();
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, InnovationDensity::Gaussian>) j["sigma"] = k.sigma;
            else if constexpr (std::is_same_v<K, InnovationDensity::Exponential>) j["rate"] = k.rate;
            else if constexpr (std::is_same_v<K, InnovationDensity::Uniform>) {
                j["lo"] = k.lo;
                j["hi"] = k.hi;
            } else if constexpr (std::is_same_v<K, InnovationDensity::Exponential3>) j["rho"] = k.rho;
            else if constexpr (std::is_same_v<K, InnovationDensity::Tabulated>) j["points"] = k.table->xs().size();
        },
        d.kind());
    return j;
}

nlohmann::json model_json(const KernelModel& model) {
    nlohmann::json j;
    j["name"] = model.name();
    j["drift_exponent"] = model.drift_exponent();
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, KernelModel::Ar1>) {
                j["rho"] = k.rho;
                j["innovation"] = innovation_json(k.innovation);
            } else if constexpr (std::is_same_v<K, KernelModel::IteratedAr1>) {
                j["rho_eff"] = k.rho_eff;
                j["steps"] = k.steps;
                if (k.base) {
                    j["rho"] = k.base_rho;
                    j["innovation"] = innovation_json(*k.base);
                }
            } else if constexpr (std::is_same_v<K, KernelModel::Arch1>) {
                j["alpha"] = k.alpha;
                j["beta"] = k.beta;
                j["lambda"] = k.lambda;
                j["innovation"] = innovation_json(k.innovation);
            } else if constexpr (std::is_same_v<K, KernelModel::Constant>) {
                j["innovation"] = innovation_json(k.innovation);
            }
        },
        model.kind());
    return j;
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json describe_run(const DiscretizedChain& chain, const SolveOptions& solve) {
    const Partition& p = chain.partition;
    return {
        {"model", model_json(chain.model)},
        {"k_minus", p.k_minus()},
        {"k_plus", p.k_plus()},
        {"delta", p.delta()},
        {"q_max", p.q_max()},
        {"quadrature", chain.quadrature.name()},
        {"inf_strategy", chain.strategy.name()},
        {"solver", solve.method.name()},
        {"j0", chain.j0},
        {"x0", chain.x0},
        {"drop_tol", chain.drop_tol},
    };
}

ErrorReport make_error_report(const PipelineResult& run, const SolveOptions& solve, const DensityFn* exact,
                              bool with_invariance, unsigned threads) {
    ErrorReport report;
    report.dirac_weight = run.density.dirac_weight();
    report.config = describe_run(run.chain, solve);
    const auto start = std::chrono::steady_clock::now();
    if (exact || with_invariance) {
        const std::vector<double> values = run.density.grid_values(threads);
        if (exact) {
            const GridErrors e = grid_errors(run.density, values, *exact);
            report.sup_error = e.sup;
            report.l1_riemann = e.l1_riemann;
        }
        if (with_invariance) report.invariance_residual = invariance_residual(run.density, values, threads);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.runtime_seconds = run.runtime_seconds + elapsed.count();
    return report;
}

nlohmann::json to_json(const ErrorReport& report) {
    return {
        {"sup_error", optional_json(report.sup_error)},
        {"l1_riemann", optional_json(report.l1_riemann)},
        {"dirac_weight", report.dirac_weight},
        {"invariance_residual", optional_json(report.invariance_residual)},
        {"config", report.config},
        {"runtime_seconds", report.runtime_seconds},
    };
}

std::optional<double> log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("slope fit needs paired samples");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2) return std::nullopt;
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    return sxy / sxx;
}

RateStudy rate_study(const KernelModel& model, double k_minus, double k_plus, std::span<const double> deltas,
                     const std::optional<DensityFn>& exact, const PipelineOptions& options) {
    if (deltas.empty()) throw ValidationError("rate study needs at least one mesh");
    RateStudy out;
    const unsigned threads = options.assembly.threads;
    std::vector<double> xs, sup, l1;
    for (double delta : deltas) {
        // bad meshes are input errors and abort the whole study
        const Partition p = build_partition(k_minus, k_plus, delta);
        try {
            const PipelineResult run = run_pipeline(model, p, options);
            ErrorReport row = make_error_report(run, options.solve, exact ? &*exact : nullptr, true, threads);
            out.deltas.push_back(delta);
            xs.push_back(delta);
            sup.push_back(exact ? *row.sup_error : *row.invariance_residual);
            l1.push_back(exact ? *row.l1_riemann : 0.0);
            out.rows.push_back(std::move(row));
        } catch (const NumericalError& e) {
            out.failures.push_back(fmt::format("delta={:g}: {}", delta, e.what()));
        }
    }
    out.slope = log_log_slope(xs, sup);
    if (exact) out.slope_l1 = log_log_slope(xs, l1);
    return out;
}

// ---------------------------------------------------------------------------

InnovationSampler::InnovationSampler(const InnovationDensity& innovation) : kind_(innovation.kind()) {
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, InnovationDensity::Gaussian>) {
                normal_ = std::normal_distribution<double>(0.0, k.sigma);
            } else if constexpr (std::is_same_v<K, InnovationDensity::Tabulated> ||
                                 std::is_same_v<K, InnovationDensity::Custom>) {
                throw UnsamplableInnovation("cannot sample from innovation '" + innovation.name() + "'");
            }
        },
        kind_);
}

double InnovationSampler::operator()(std::mt19937_64& rng) {
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, InnovationDensity::Gaussian>) {
                return normal_(rng);
            } else if constexpr (std::is_same_v<K, InnovationDensity::Exponential>) {
                return -std::log1p(-unit_(rng)) / k.rate;
            } else if constexpr (std::is_same_v<K, InnovationDensity::Uniform>) {
                return k.lo + (k.hi - k.lo) * unit_(rng);
            } else if constexpr (std::is_same_v<K, InnovationDensity::Exponential3>) {
                const double e1 = -std::log1p(-unit_(rng));
                const double e2 = -std::log1p(-unit_(rng));
                const double e3 = -std::log1p(-unit_(rng));
                return k.rho * k.rho * e1 + k.rho * e2 + e3;
            } else {
                throw UnsamplableInnovation("cannot sample from this innovation");
            }
        },
        kind_);
}

namespace {

/// Integral of g over (-inf, lo] and [hi, inf) by adaptive Gauss-Kronrod.
template <class G>
double outside_integral(G&& g, double lo, double hi) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr double inf = std::numeric_limits<double>::infinity();
    double err = 0.0;
    const double left = gauss_kronrod<double, 31>::integrate(g, -inf, lo, 12, 1e-10, &err);
    const double right = gauss_kronrod<double, 31>::integrate(g, hi, inf, 12, 1e-10, &err);
    return left + right;
}

struct PointMoments {
    double inside_mass;
    double pv;
    double lipschitz;
};

}  // namespace

AssumptionReport assumption_diagnostics(const KernelModel& model, const Partition& p, std::int64_t mc_samples,
                                        std::uint64_t seed, const QuadratureRule& quad, unsigned threads) {
    const std::size_t q = p.q_max();
    const double e = model.drift_exponent();
    const double delta = p.delta();
    const double h = delta / 10.0;
    std::vector<PointMoments> moments(q);

    model.visit_kernel([&](const auto& kernel) {
        parallel_chunks(q, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double u = p.point(i);
                double mass = 0.0, pv = 0.0, lip = 0.0;
                for (std::size_t j = 0; j < q; ++j) {
                    const double a = p.cell_lo(j), b = p.cell_hi(j);
                    mass += quad.integrate([&](double y) { return kernel(u, y); }, a, b);
                    pv += quad.integrate([&](double y) { return kernel(u, y) * drift_value(e, y); }, a, b);
                    lip += quad.integrate(
                        [&](double y) { return std::abs(kernel(u + h, y) - kernel(u - h, y)) / (2.0 * h); }, a, b);
                }
                pv += outside_integral([&](double y) { return kernel(u, y) * drift_value(e, y); }, p.k_minus(),
                                       p.k_plus());
                moments[i] = {mass, pv, lip};
            }
        });
    });

    AssumptionReport r;
    double max_lip = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        const double v = drift_value(e, p.point(i));
        r.alpha_k = std::max(r.alpha_k, std::max(0.0, 1.0 - moments[i].inside_mass) / v);
        max_lip = std::max(max_lip, moments[i].lipschitz);
    }
    r.lipschitz_budget = delta * max_lip;

    // Drift fit: M is the excess PV - dV over the inner core of the grid; the
    // smallest d for which the inequality then holds on the whole grid wins.
    double reach = 0.0;
    for (std::size_t i = 0; i < q; ++i) reach = std::max(reach, std::abs(p.point(i)));
    auto core_excess = [&](double d) {
        double m = 0.0;
        for (std::size_t i = 0; i < q; ++i)
            if (std::abs(p.point(i)) <= 0.5 * reach)
                m = std::max(m, moments[i].pv - d * drift_value(e, p.point(i)));
        return m;
    };
    r.drift_delta_hat = 1.0;
    r.drift_M_hat = core_excess(1.0);
    for (int step = 1; step <= 99; ++step) {
        const double d = step / 100.0;
        const double m = core_excess(d);
        bool holds = true;
        for (std::size_t i = 0; i < q && holds; ++i) {
            const double rhs = d * drift_value(e, p.point(i)) + m;
            holds = moments[i].pv <= rhs + 1e-9 * std::max(1.0, rhs);
        }
        if (holds) {
            r.drift_delta_hat = d;
            r.drift_M_hat = m;
            r.drift_verified = true;
            break;
        }
    }

    const double half = 0.5 * (p.k_plus() - p.k_minus());
    r.tau_k = 1.0 / drift_value(e, half) + r.alpha_k + r.lipschitz_budget;

    if (const auto* arch = std::get_if<KernelModel::Arch1>(&model.kind()); arch && mc_samples > 0) {
        std::mt19937_64 rng(seed);
        InnovationSampler draw(arch->innovation);
        const double s = std::sqrt(arch->lambda);
        double acc = 0.0;
        for (std::int64_t n = 0; n < mc_samples; ++n) acc += std::log(std::abs(arch->alpha + s * draw(rng)));
        r.arch_logmoment = acc / static_cast<double>(mc_samples);
    }
    return r;
}

nlohmann::json to_json(const AssumptionReport& report) {
    return {
        {"alpha_k", report.alpha_k},
        {"drift_delta_hat", report.drift_delta_hat},
        {"drift_M_hat", report.drift_M_hat},
        {"drift_verified", report.drift_verified},
        {"lipschitz_budget", report.lipschitz_budget},
        {"tau_k", report.tau_k},
        {"arch_logmoment", optional_json(report.arch_logmoment)},
        {"verdict", report.drift_verified && report.drift_delta_hat > 0.0 && report.drift_delta_hat < 1.0 &&
                            (!report.arch_logmoment || *report.arch_logmoment < 0.0)
                        ? "PASS"
                        : "FAIL"},
    };
}

// ---------------------------------------------------------------------------

TabulatedDensity hn_baseline(const InnovationDensity& innovation, double rho, int n_iters, const Partition& grid) {
    if (n_iters < 0) throw ValidationError("n_iters must be nonnegative");
    if (!(std::abs(rho) < 1.0)) throw DomainError("AR(1) requires |rho| < 1");
    const std::vector<double>& xs = grid.points();
    const std::size_t n = xs.size();
    std::vector<double> tw(n, grid.delta());
    tw.front() = tw.back() = 0.5 * grid.delta();

    std::vector<double> h(n), next(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = innovation(xs[i]);

    auto normalize = [&](std::vector<double>& v) {
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) mass += tw[i] * v[i];
        if (!(mass > 0.0)) throw NumericalError("baseline iterate lost all mass on the grid");
        for (double& x : v) x /= mass;
    };
    if (n_iters > 0) normalize(h);

    constexpr std::size_t cached_max = 16'000'000;
    std::vector<double> k;
    innovation.visit_pdf([&](const auto& nu) {
        if (n * n <= cached_max && n_iters > 1) {
            k.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) k[i * n + j] = nu(xs[i] - rho * xs[j]) * tw[j];
        }
        for (int it = 0; it < n_iters; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                if (!k.empty()) {
                    const double* row = k.data() + i * n;
                    for (std::size_t j = 0; j < n; ++j) acc += row[j] * h[j];
                } else {
                    for (std::size_t j = 0; j < n; ++j) acc += nu(xs[i] - rho * xs[j]) * tw[j] * h[j];
                }
                next[i] = acc;
            }
            normalize(next);
            h.swap(next);
        }
    });
    return TabulatedDensity(xs, std::move(h), n_iters > 0);
}

TabulatedDensity mcmc_histogram(const KernelModel& model, std::int64_t n_samples, const Partition& p,
                                std::uint64_t seed) {
    if (n_samples < 10'000) throw ValidationError("mcmc needs at least 10000 samples");
    std::mt19937_64 rng(seed);
    const std::size_t q = p.q_max();
    std::vector<std::int64_t> counts(q, 0);
    const std::int64_t burn = n_samples / 100;

    auto run = [&](auto&& step) {
        double x = 0.0;
        for (std::int64_t n = 0; n < n_samples; ++n) {
            x = step(x);
            if (n < burn) continue;
            if (const auto cell = locate_cell(p, x)) ++counts[*cell];
        }
    };

    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, KernelModel::Ar1>) {
                InnovationSampler draw(k.innovation);
                run([&](double x) { return k.rho * x + draw(rng); });
            } else if constexpr (std::is_same_v<K, KernelModel::IteratedAr1>) {
                if (!k.base) throw UnsamplableInnovation("iterated AR(1) built from a table cannot be simulated");
                InnovationSampler draw(*k.base);
                run([&](double x) {
                    for (int s = 0; s < k.steps; ++s) x = k.base_rho * x + draw(rng);
                    return x;
                });
            } else if constexpr (std::is_same_v<K, KernelModel::Arch1>) {
                InnovationSampler draw(k.innovation);
                run([&](double x) { return k.alpha * x + std::sqrt(k.beta + k.lambda * x * x) * draw(rng); });
            } else if constexpr (std::is_same_v<K, KernelModel::Constant>) {
                InnovationSampler draw(k.innovation);
                run([&](double) { return draw(rng); });
            } else {
                throw UnsamplableInnovation("custom kernels cannot be simulated");
            }
        },
        model.kind());

    const double kept = static_cast<double>(n_samples - burn);
    std::vector<double> mids(q), values(q);
    for (std::size_t j = 0; j < q; ++j) {
        mids[j] = 0.5 * (p.cell_lo(j) + p.cell_hi(j));
        values[j] = static_cast<double>(counts[j]) / (kept * p.delta());
    }
    return TabulatedDensity(std::move(mids), std::move(values), false);
}

double histogram_l1(const TabulatedDensity& histogram, double delta, const DensityFn& f) {
    double acc = 0.0;
    for (std::size_t j = 0; j < histogram.xs().size(); ++j) acc += std::abs(histogram.values()[j] - f(histogram.xs()[j]));
    return delta * acc;
}

}  // namespace stationary
