#include <doctest.h>

#include "stationary/errors.hpp"
#include "stationary/invariant.hpp"

#include <numeric>
#include <random>

using namespace stationary;

namespace {

DiscretizedChain gaussian_chain(double rho, double k, double delta) {
    return assemble_matrix(KernelModel::ar1(rho, InnovationDensity::gaussian(1.0)), build_partition(-k, k, delta));
}

StochasticMatrix random_positive(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (auto& r : rows) {
        for (double& v : r) v = u(rng);
        const double s = std::accumulate(r.begin(), r.end(), 0.0);
        for (double& v : r) v /= s;
    }
    return StochasticMatrix::from_rows(rows);
}

}  // namespace

TEST_SUITE("invariant") {

TEST_CASE("two-state chains") {
    const auto sym = direct_solve(StochasticMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
    CHECK(sym[0] == doctest::Approx(0.5));
    CHECK(sym[1] == doctest::Approx(0.5));
    const auto b = StochasticMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}});
    const auto d = direct_solve(b);
    CHECK(d[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(d[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    const auto p = power_iterate(b, {0.5, 0.5}, 1e-14, 100000);
    CHECK(p.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    const auto swap = direct_solve(StochasticMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
    CHECK(swap[0] == doctest::Approx(0.5));
    CHECK(swap[1] == doctest::Approx(0.5));
}

TEST_CASE("identity matrix is singular") {
    CHECK_THROWS_AS(direct_solve(StochasticMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})), SingularSystem);
}

TEST_CASE("random positive matrix: direct and power agree") {
    const auto b = random_positive(50, 99);
    const auto d = direct_solve(b);
    std::vector<double> start(50, 1.0 / 50.0);
    const auto p = power_iterate(b, start, 1e-14, 1000000);
    for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(d[i] - p.weights[i]) <= 1e-10);
}

TEST_CASE("power iteration reports non-convergence with its best iterate") {
    const auto b = StochasticMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    try {
        power_iterate(b, {1.0, 0.0}, 1e-12, 50);
        FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
        CHECK(e.best().weights.size() == 2);
        CHECK(e.best().iterations == 50);
        CHECK(e.best().residual == doctest::Approx(2.0));
    }
}

TEST_CASE("solver parsing") {
    CHECK(SolverMethod::parse("auto").kind == SolverMethod::Kind::Auto);
    CHECK(SolverMethod::parse("direct").kind == SolverMethod::Kind::Direct);
    const auto p = SolverMethod::parse("power:1e-10");
    CHECK(p.kind == SolverMethod::Kind::Power);
    CHECK(p.tol == 1e-10);
    CHECK_THROWS_AS(SolverMethod::parse("power:abc"), ValidationError);
    CHECK_THROWS_AS(SolverMethod::parse("lu"), ValidationError);
}

TEST_CASE("stationary vector contract on the Gaussian chain") {
    const auto chain = gaussian_chain(0.5, 8.0, 0.05);
    for (auto method : {SolverMethod::direct(), SolverMethod::power(), SolverMethod::automatic()}) {
        SolveOptions o;
        o.method = method;
        const auto pi = stationary_vector(chain, o);
        CAPTURE(method.name());
        CHECK(pi.weights.size() == chain.q_max() + 1);
        CHECK(pi.weights.back() == 0.0);
        CHECK(std::abs(std::accumulate(pi.weights.begin(), pi.weights.end(), 0.0) - 1.0) <= 1e-12);
        for (double w : pi.weights) CHECK(w >= 0.0);
        CHECK(pi.residual <= 1e-12);
    }
}

TEST_CASE("property: direct and power agree on assembled chains") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> rho(-0.9, 0.9);
    for (int trial = 0; trial < 6; ++trial) {
        const auto chain = gaussian_chain(rho(rng), 6.0, 0.1);
        SolveOptions d, p;
        d.method = SolverMethod::direct();
        p.method = SolverMethod::power(1e-14);
        const auto a = stationary_vector(chain, d);
        const auto b = stationary_vector(chain, p);
        for (std::size_t i = 0; i < a.weights.size(); ++i) CHECK(std::abs(a.weights[i] - b.weights[i]) <= 1e-10);
    }
}

TEST_CASE("power residuals are nonincreasing after the first iterate") {
    const auto chain = gaussian_chain(0.5, 8.0, 0.05);
    SolveOptions o;
    o.method = SolverMethod::power();
    o.record_history = true;
    const auto pi = stationary_vector(chain, o);
    const auto& h = pi.residual_history;
    REQUIRE(h.size() > 2);
    for (std::size_t n = 2; n < h.size(); ++n) CHECK(h[n] <= h[n - 1] * (1.0 + 1e-12) + 1e-16);
}

TEST_CASE("mass repair toggle leaves the dense solution unchanged") {
    const auto model = KernelModel::ar1(0.5, InnovationDensity::gaussian(1.0));
    const auto p = build_partition(-8.0, 8.0, 0.05);
    AssemblyOptions on, off;
    on.storage = off.storage = AssemblyOptions::StorageChoice::Dense;
    off.repair_dropped_mass = false;
    const auto a = stationary_vector(assemble_matrix(model, p, on));
    const auto b = stationary_vector(assemble_matrix(model, p, off));
    for (std::size_t i = 0; i < a.weights.size(); ++i) CHECK(std::abs(a.weights[i] - b.weights[i]) <= 1e-12);
}

TEST_CASE("power iteration is reproducible at a fixed thread count") {
    const auto chain = gaussian_chain(0.7, 6.0, 0.05);
    SolveOptions o;
    o.method = SolverMethod::power();
    o.threads = 3;
    const auto a = stationary_vector(chain, o);
    const auto b = stationary_vector(chain, o);
    CHECK(a.weights == b.weights);
}

}
