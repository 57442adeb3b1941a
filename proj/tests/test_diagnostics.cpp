#include <doctest.h>

#include "stationary/diagnostics.hpp"
#include "stationary/errors.hpp"

#include <cmath>
#include <numbers>

using namespace stationary;

namespace {

PipelineResult gaussian_run(double rho, double k, double delta) {
    return run_pipeline(KernelModel::ar1(rho, InnovationDensity::gaussian(1.0)), build_partition(-k, k, delta));
}

bool within_factor_two(double value, double reference) { return value >= reference / 2.0 && value <= reference * 2.0; }

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("gaussian closed form") {
    const auto p = gaussian_ar1_density(0.5);
    CHECK(p(0.0) == doctest::Approx(std::sqrt(0.75) / std::sqrt(2.0 * std::numbers::pi)));
    CHECK_THROWS_AS(gaussian_ar1_density(1.0), DomainError);
}

TEST_CASE("sup and Riemann L1 errors against the gaussian stationary law") {
    {
        const auto run = gaussian_run(0.5, 8.0, 0.005);
        CHECK(within_factor_two(sup_error(run.density, gaussian_ar1_density(0.5)), 2.45e-4));
    }
    {
        const auto run = gaussian_run(0.7, 14.0, 0.02);
        CHECK(within_factor_two(riemann_l1_error(run.density, gaussian_ar1_density(0.7)), 0.0061));
    }
    {
        const auto run = gaussian_run(0.9, 40.0, 0.05);
        CHECK(within_factor_two(riemann_l1_error(run.density, gaussian_ar1_density(0.9)), 0.0540));
    }
}

TEST_CASE("self comparison gives zero error") {
    const auto run = gaussian_run(0.5, 8.0, 0.05);
    const DensityFn self = [&](double y) { return density_eval(run.density, y); };
    CHECK(sup_error(run.density, self) == 0.0);
    CHECK(riemann_l1_error(run.density, self) == 0.0);
}

TEST_CASE("error report invariants") {
    const auto run = gaussian_run(0.5, 8.0, 0.05);
    const auto exact = gaussian_ar1_density(0.5);
    const auto r = make_error_report(run, SolveOptions{}, &exact, true);
    REQUIRE(r.sup_error);
    REQUIRE(r.l1_riemann);
    REQUIRE(r.invariance_residual);
    CHECK(*r.sup_error >= 0.0);
    CHECK(*r.l1_riemann >= 0.0);
    CHECK(*r.invariance_residual >= 0.0);
    CHECK(*r.l1_riemann <= 16.0 * *r.sup_error);
    const auto j = to_json(r);
    for (const char* key : {"sup_error", "l1_riemann", "dirac_weight", "invariance_residual", "config", "runtime_seconds"})
        CHECK(j.contains(key));
    for (const char* key : {"model", "k_minus", "k_plus", "delta", "quadrature", "inf_strategy", "j0"})
        CHECK(j["config"].contains(key));
    CHECK(j["config"]["j0"] == 160);
}

TEST_CASE("invariance residuals for the iterated chains") {
    {
        const auto model = KernelModel::iterated_ar1(0.5, InnovationDensity::exponential(1.0), 3);
        const auto run = run_pipeline(model, build_partition(0.0, 13.0, 0.02));
        CHECK(within_factor_two(invariance_residual(run.density), 8.73e-4));
    }
    {
        const auto model = KernelModel::iterated_ar1(0.9, InnovationDensity::uniform(0.0, 1.0), 3);
        const auto run = run_pipeline(model, build_partition(0.0, 10.0, 0.02));
        CHECK(within_factor_two(invariance_residual(run.density), 0.0051));
    }
}

TEST_CASE("log-log slope") {
    const std::vector<double> x{1.0, 2.0, 4.0}, y{3.0, 12.0, 48.0};
    CHECK(*log_log_slope(x, y) == doctest::Approx(2.0));
    CHECK_FALSE(log_log_slope(std::vector<double>{1.0}, std::vector<double>{1.0}).has_value());
    CHECK_FALSE(log_log_slope(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}).has_value());
}

TEST_CASE("rate study on the gaussian chain") {
    const auto model = KernelModel::ar1(0.5, InnovationDensity::gaussian(1.0));
    const std::vector<double> deltas{0.05, 0.02, 0.005};
    const auto study = rate_study(model, -8.0, 8.0, deltas, gaussian_ar1_density(0.5));
    REQUIRE(study.rows.size() == 3);
    const double table[] = {0.0025, 0.001, 2.45e-4};
    for (std::size_t i = 0; i < 3; ++i) CHECK(within_factor_two(*study.rows[i].sup_error, table[i]));
    REQUIRE(study.slope);
    REQUIRE(study.slope_l1);
    CHECK(*study.slope >= 0.7);
    CHECK(*study.slope <= 1.3);
    CHECK(*study.slope_l1 >= 0.7);
    CHECK(*study.slope_l1 <= 1.3);

    const std::vector<double> one{0.05};
    const auto single = rate_study(model, -8.0, 8.0, one, gaussian_ar1_density(0.5));
    CHECK_FALSE(single.slope.has_value());
}

TEST_CASE("rate study L1 errors at rho 0.7") {
    const auto model = KernelModel::ar1(0.7, InnovationDensity::gaussian(1.0));
    const std::vector<double> deltas{0.05, 0.02, 0.005};
    const auto study = rate_study(model, -14.0, 14.0, deltas, gaussian_ar1_density(0.7));
    const double table[] = {0.0151, 0.0061, 0.0015};
    REQUIRE(study.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(within_factor_two(*study.rows[i].l1_riemann, table[i]));
}

TEST_CASE("rate study without a closed form fits the invariance residual") {
    const auto model = KernelModel::ar1(0.5, InnovationDensity::gaussian(1.0));
    const std::vector<double> deltas{0.1, 0.05};
    const auto study = rate_study(model, -8.0, 8.0, deltas, std::nullopt);
    REQUIRE(study.slope);
    CHECK_FALSE(study.slope_l1);
    CHECK_FALSE(study.rows[0].sup_error);
    CHECK(*study.slope > 0.7);
}

TEST_CASE("assumption diagnostics: constant kernel tail coefficient") {
    const auto nu = InnovationDensity::gaussian(1.0);
    const auto r = assumption_diagnostics(KernelModel::constant(nu), build_partition(-2.0, 2.0, 0.1), 0);
    // the tail mass is the same for every u; V is smallest (= 1) at u = 0
    CHECK(r.alpha_k == doctest::Approx(1.0 - nu.mass(-2.0, 2.0)).epsilon(1e-9));
    CHECK(r.lipschitz_budget == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK_FALSE(r.arch_logmoment);
}

TEST_CASE("assumption diagnostics: gaussian AR(1)") {
    const auto model = KernelModel::ar1(0.5, InnovationDensity::gaussian(1.0));
    const auto r = assumption_diagnostics(model, build_partition(-8.0, 8.0, 0.05), 0);
    CHECK(r.alpha_k >= 0.0);
    CHECK(r.alpha_k <= 1.0 / (0.25 * 64.0));
    CHECK(r.drift_verified);
    CHECK(r.drift_delta_hat < 1.0);
    // PV(u) = 1 + 1 + 0.25 u^2 exactly, so the fit recovers rho^2
    CHECK(r.drift_delta_hat == doctest::Approx(0.25));
    CHECK(r.drift_M_hat == doctest::Approx(1.75).epsilon(1e-6));
    // l_{k,1} = int |d/dx nu(y - rho x)| dy = rho * 2 nu(0)
    CHECK(r.lipschitz_budget == doctest::Approx(0.05 * 0.5 * 2.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-3));
    CHECK(r.tau_k == doctest::Approx(1.0 / 65.0 + r.alpha_k + r.lipschitz_budget));
    CHECK(to_json(r)["verdict"] == "PASS");
}

TEST_CASE("assumption diagnostics: ARCH log-moment") {
    const auto model = KernelModel::arch1(0.7, 1.0, 0.2, InnovationDensity::gaussian(1.0));
    const auto r = assumption_diagnostics(model, build_partition(-4.0, 4.0, 0.2), 1'000'000, 42);
    REQUIRE(r.arch_logmoment);
    CHECK(*r.arch_logmoment < 0.0);
    const auto j = to_json(r);
    for (const char* key : {"alpha_k", "drift_delta_hat", "drift_M_hat", "lipschitz_budget", "arch_logmoment"})
        CHECK(j.contains(key));
}

TEST_CASE("hn baseline") {
    const auto nu = InnovationDensity::gaussian(1.0);
    const auto grid = build_partition(-8.0, 8.0, 0.05);
    const auto h0 = hn_baseline(nu, 0.5, 0, grid);
    for (std::size_t i = 0; i < h0.xs().size(); i += 37) CHECK(h0.values()[i] == nu(h0.xs()[i]));
    const auto h1 = hn_baseline(nu, 0.5, 1, grid);
    CHECK(h1(0.0) == doctest::Approx(0.356825).epsilon(1e-6));
    const auto h30 = hn_baseline(nu, 0.5, 30, grid);
    const auto exact = gaussian_ar1_density(0.5);
    double sup = 0.0;
    for (std::size_t i = 0; i < h30.xs().size(); ++i) sup = std::max(sup, std::abs(h30.values()[i] - exact(h30.xs()[i])));
    CHECK(sup <= 1e-4);
    CHECK_THROWS_AS(hn_baseline(nu, 0.5, -1, grid), ValidationError);
}

TEST_CASE("mcmc histogram") {
    const auto model = KernelModel::ar1(0.5, InnovationDensity::gaussian(1.0));
    const auto p = build_partition(-8.0, 8.0, 0.05);
    const auto hist = mcmc_histogram(model, 10'000'000, p, 12345);
    CHECK(histogram_l1(hist, p.delta(), gaussian_ar1_density(0.5)) <= 0.02);
    CHECK_THROWS_AS(mcmc_histogram(model, 9'999, p, 1), ValidationError);
    const auto a = mcmc_histogram(model, 20'000, p, 9);
    const auto b = mcmc_histogram(model, 20'000, p, 9);
    CHECK(a.values() == b.values());
}

TEST_CASE("mcmc refuses innovations it cannot draw from") {
    const auto p = build_partition(-4.0, 4.0, 0.1);
    const auto table = InnovationDensity::tabulated(TabulatedDensity({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}));
    CHECK_THROWS_AS(mcmc_histogram(KernelModel::ar1(0.5, table), 20'000, p, 1), UnsamplableInnovation);
    const auto custom = InnovationDensity::custom([](double) { return 0.5; }, {-1.0, 1.0});
    CHECK_THROWS_AS(mcmc_histogram(KernelModel::ar1(0.5, custom), 20'000, p, 1), UnsamplableInnovation);
}

TEST_CASE("innovation sampler moments") {
    std::mt19937_64 rng(1);
    for (const auto& [d, mean] : {std::pair{InnovationDensity::exponential(2.0), 0.5},
                                  std::pair{InnovationDensity::uniform(1.0, 3.0), 2.0},
                                  std::pair{InnovationDensity::exponential3(0.5), 1.75}}) {
        InnovationSampler s(d);
        double acc = 0.0;
        const int n = 200'000;
        for (int k = 0; k < n; ++k) acc += s(rng);
        CAPTURE(d.name());
        CHECK(acc / n == doctest::Approx(mean).epsilon(0.01));
    }
}

}
