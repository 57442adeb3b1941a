#include <doctest.h>

#include "stationary/errors.hpp"
#include "stationary/innovation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

using namespace stationary;

TEST_SUITE("innovation") {

TEST_CASE("closed-form densities evaluate at known points") {
    CHECK(eval_density(InnovationDensity::gaussian(1.0), 0.0) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(eval_density(InnovationDensity::uniform(0.0, 1.0), 2.0) == 0.0);
    CHECK(eval_density(InnovationDensity::uniform(0.0, 1.0), 1.0) == 0.0);
    CHECK(eval_density(InnovationDensity::uniform(0.0, 1.0), 0.0) == 1.0);
    CHECK(eval_density(InnovationDensity::exponential(1.0), -1e-300) == 0.0);
    CHECK(eval_density(InnovationDensity::exponential(1.0), -3.0) == 0.0);
    CHECK(eval_density(InnovationDensity::exponential(2.0), 0.5) == doctest::Approx(2.0 * std::exp(-1.0)));
}

TEST_CASE("factories reject out-of-domain parameters") {
    CHECK_THROWS_AS(InnovationDensity::gaussian(0.0), DomainError);
    CHECK_THROWS_AS(InnovationDensity::exponential(-1.0), DomainError);
    CHECK_THROWS_AS(InnovationDensity::uniform(1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(InnovationDensity::exponential3(1.0), DomainError);
}

TEST_CASE("exponential3 closed form") {
    CHECK(std::abs(eval_exponential3(0.5, 0.0)) <= 1e-15);
    CHECK(eval_exponential3(0.5, -1.0) == 0.0);
    CHECK(eval_exponential3(0.5, 1.0) == doctest::Approx(0.464092).epsilon(1e-6));
    CHECK(std::abs(eval_exponential3(0.5, 1e-8)) <= 1e-6);
    CHECK_THROWS_AS(eval_exponential3(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(eval_exponential3(1.2, 1.0), DomainError);
}

TEST_CASE("every closed-form density integrates to one") {
    for (const auto& d : {InnovationDensity::gaussian(0.7), InnovationDensity::exponential(1.5),
                          InnovationDensity::uniform(-2.0, 3.0), InnovationDensity::exponential3(0.5),
                          InnovationDensity::exponential3(0.9)}) {
        CAPTURE(d.name());
        CHECK(validate_density(d) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("validation catches a density with the wrong mass") {
    const auto d = InnovationDensity::custom([](double x) { return (x >= 0.0 && x < 1.0) ? 2.0 : 0.0; }, {0.0, 1.0});
    CHECK_THROWS_AS(validate_density(d), ValidationError);
}

TEST_CASE("mass agrees with adaptive quadrature") {
    using boost::math::quadrature::gauss_kronrod;
    for (const auto& d : {InnovationDensity::gaussian(1.3), InnovationDensity::exponential(0.8),
                          InnovationDensity::uniform(-1.0, 2.0), InnovationDensity::exponential3(0.7)}) {
        for (auto [a, b] : {std::pair{-0.5, 0.25}, std::pair{0.1, 3.0}, std::pair{-4.0, 4.0}}) {
            // integrate piecewise between the density's jump points
            std::vector<double> cuts{a, b};
            for (double c : {-1.0, 0.0, 2.0})
                if (a < c && c < b) cuts.push_back(c);
            std::sort(cuts.begin(), cuts.end());
            double oracle = 0.0;
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
                oracle += gauss_kronrod<double, 61>::integrate([&](double x) { return d(x); }, cuts[k], cuts[k + 1], 15,
                                                               1e-13);
            CAPTURE(d.name());
            CHECK(d.mass(a, b) == doctest::Approx(oracle).epsilon(1e-9));
        }
    }
}

TEST_CASE("tabulated density interpolates linearly and is zero outside") {
    TabulatedDensity t({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    CHECK(t(0.5) == doctest::Approx(0.5));
    CHECK(t(-0.1) == 0.0);
    CHECK(t(2.1) == 0.0);
    CHECK(t.trapezoid_mass() == doctest::Approx(1.0));
    CHECK(t.mass(0.0, 1.0) == doctest::Approx(0.5));
    CHECK(t.mass(0.5, 1.5) == doctest::Approx(0.75));
}

TEST_CASE("tabulated density renormalizes and records the factor") {
    TabulatedDensity t({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
    CHECK(t.trapezoid_mass() == doctest::Approx(1.0));
    CHECK(t.renormalization_factor() == doctest::Approx(0.5));
    TabulatedDensity raw({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, false);
    CHECK(raw.trapezoid_mass() == doctest::Approx(2.0));
}

TEST_CASE("tabulated density rejects bad grids") {
    CHECK_THROWS_AS(TabulatedDensity({0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(TabulatedDensity({0.0, 1.0}, {1.0, -1.0}), ValidationError);
    CHECK_THROWS_AS(TabulatedDensity({0.0, 1.0, 2.0}, {1.0, 1.0}), ValidationError);
}

TEST_CASE("tabulated csv export") {
    TabulatedDensity t({0.0, 1.0}, {1.0, 1.0});
    std::ostringstream out;
    t.write_csv(out);
    CHECK(out.str() == "x,value\n0,1\n1,1\n");
}

TEST_CASE("convolution of scaled gaussians matches the gaussian-sum closed form") {
    const double rho = 0.5;
    const std::vector<double> scales{rho * rho, rho, 1.0};
    const auto base = InnovationDensity::gaussian(1.0);
    const auto t = convolve_scaled(base, scales, 1e-3, scaled_sum_support(base, scales));
    const double var = 1.0 + 0.25 + 0.0625;
    CHECK(t(0.0) == doctest::Approx(0.34817).epsilon(1e-4));
    double sup = 0.0;
    for (double x = -6.0; x <= 6.0; x += 0.01)
        sup = std::max(sup, std::abs(t(x) - std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var)));
    CHECK(sup <= 1e-5);
    CHECK(t.trapezoid_mass() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("convolution of scaled exponentials matches exponential3") {
    const std::vector<double> scales{0.25, 0.5, 1.0};
    const auto base = InnovationDensity::exponential(1.0);
    const auto t = convolve_scaled(base, scales, 1e-3, scaled_sum_support(base, scales));
    double sup = 0.0;
    for (double x = 0.0; x <= 11.0; x += 0.0037) sup = std::max(sup, std::abs(t(x) - eval_exponential3(0.5, x)));
    CHECK(sup <= 1e-4);
    REQUIRE(t.truncation().has_value());
    CHECK(t.truncation()->lo >= -1e-9);
}

TEST_CASE("single-term convolution recovers the uniform density") {
    const std::vector<double> scales{1.0};
    const auto base = InnovationDensity::uniform(0.0, 1.0);
    const auto t = convolve_scaled(base, scales, 1e-3, {-0.5, 1.5});
    CHECK(t(0.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(t(0.25) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(t(1.2) == 0.0);
    CHECK(t.trapezoid_mass() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("convolution errors") {
    const std::vector<double> scales{0.5, 1.0};
    const auto base = InnovationDensity::gaussian(1.0);
    CHECK_THROWS_AS(convolve_scaled(base, scales, 1e-3, {-1.0, 1.0}), SupportTooSmall);
    CHECK_THROWS_AS(convolve_scaled(base, scales, 0.5, {-8.0, 8.0}), ValidationError);
    CHECK_THROWS_AS(convolve_scaled(base, std::vector<double>{}, 1e-3, {-8.0, 8.0}), ValidationError);
    CHECK_THROWS_AS(convolve_scaled(base, std::vector<double>{0.0}, 1e-3, {-8.0, 8.0}), ValidationError);
}

TEST_CASE("tail bounds bracket the requested mass") {
    const auto d = InnovationDensity::gaussian(1.0);
    const Interval b = tail_bounds(d, 1e-6);
    CHECK(d.mass(b.hi, INFINITY) <= 1.0000001e-6);
    CHECK(b.hi == doctest::Approx(4.753424).epsilon(1e-5));
    CHECK(b.lo == doctest::Approx(-b.hi));
}

}
