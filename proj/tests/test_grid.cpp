#include <doctest.h>

#include "stationary/errors.hpp"
#include "stationary/grid.hpp"

#include <random>

using namespace stationary;

TEST_SUITE("grid") {

TEST_CASE("cell counts") {
    CHECK(build_partition(-8.0, 8.0, 0.05).q_max() == 320);
    CHECK(build_partition(0.0, 13.0, 0.02).q_max() == 650);
    CHECK(build_partition(-40.0, 40.0, 0.005).q_max() == 16000);
}

TEST_CASE("partition errors") {
    CHECK_THROWS_AS(build_partition(-1.0, 1.0, 0.3), NonIntegralMesh);
    CHECK_THROWS_AS(build_partition(1.0, 1.0, 0.1), InvalidInterval);
    CHECK_THROWS_AS(build_partition(2.0, 1.0, 0.1), InvalidInterval);
    CHECK_THROWS_AS(build_partition(0.0, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(build_partition(0.0, 1.0, -0.5), ValidationError);
}

TEST_CASE("locate_cell") {
    const auto p = build_partition(-8.0, 8.0, 0.05);
    CHECK(locate_cell(p, -8.0) == 0u);
    CHECK_FALSE(locate_cell(p, 8.0).has_value());
    CHECK_FALSE(locate_cell(p, -8.0000001).has_value());
    CHECK(locate_cell(build_partition(0.0, 2.0, 0.5), 0.75) == 1u);
    CHECK(locate_cell(p, 0.0) == 160u);
}

TEST_CASE("property: points tile the interval and locate back") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lo(-20.0, 20.0);
    std::uniform_int_distribution<int> cells(1, 500);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = lo(rng);
        const int n = cells(rng);
        const double delta = 0.01 * cells(rng);
        const auto p = build_partition(a, a + n * delta, delta);
        REQUIRE(p.q_max() == static_cast<std::size_t>(n));
        CHECK(p.point(0) == a);
        CHECK(p.point(p.q_max()) == p.k_plus());
        double total = 0.0;
        for (std::size_t i = 0; i < p.q_max(); ++i) {
            CHECK(p.cell_hi(i) > p.cell_lo(i));
            total += p.cell_hi(i) - p.cell_lo(i);
            CHECK(locate_cell(p, p.point(i)) == i);
            CHECK(locate_cell(p, p.point(i + 1) - 1e-9 * delta) == i);
        }
        CHECK(total == doctest::Approx(p.k_plus() - p.k_minus()).epsilon(1e-12));
    }
}

}
