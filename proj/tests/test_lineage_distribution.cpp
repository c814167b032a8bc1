#include <doctest.h>

#include "bipcover/errors.hpp"
#include "bipcover/lineage_distribution.hpp"

using namespace bipcover;

TEST_SUITE("lineage_distribution") {
    TEST_CASE("construction validates the invariants") {
        CHECK_THROWS_AS(LineageDistribution(0, {1.0}), DomainError);
        CHECK_THROWS_AS(LineageDistribution(1, {}), DomainError);
        CHECK_THROWS_AS(LineageDistribution(1, {0.5, 0.6}), DomainError);
        CHECK_THROWS_AS(LineageDistribution(1, {-0.1, 1.1}), DomainError);
        CHECK_NOTHROW(LineageDistribution(3, {0.25, 0.75 + 5e-11}));
    }

    TEST_CASE("pmf, cdf and mean") {
        const LineageDistribution d(2, {0.2, 0.5, 0.3});
        CHECK(d.min_support() == 2);
        CHECK(d.max_support() == 4);
        CHECK(d.pmf(1) == 0.0);
        CHECK(d.pmf(3) == 0.5);
        CHECK(d.pmf(5) == 0.0);
        CHECK(d.cdf(1) == 0.0);
        CHECK(d.cdf(3) == doctest::Approx(0.7).epsilon(1e-15));
        CHECK(d.cdf(10) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(d.mean() == doctest::Approx(2 * 0.2 + 3 * 0.5 + 4 * 0.3).epsilon(1e-15));
        const auto p = LineageDistribution::point_mass(7);
        CHECK(p.pmf(7) == 1.0);
        CHECK(p.mean() == 7.0);
    }

    TEST_CASE("trimming drops negligible tails only") {
        const LineageDistribution d(1, {1e-17, 0.4, 0.6 - 2e-17, 1e-17});
        const auto t = d.trimmed();
        CHECK(t.min_support() == 2);
        CHECK(t.max_support() == 3);
        CHECK(t.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
        const LineageDistribution heavy(1, {6e-12, 6e-12, 1.0 - 1.2e-11});
        CHECK_THROWS_AS(heavy.trimmed(1e-11), DomainError);
    }

    TEST_CASE("first-order dominance") {
        const LineageDistribution low(1, {0.5, 0.5});
        const LineageDistribution high(1, {0.2, 0.5, 0.3});
        CHECK(stochastically_dominates(high, low));
        CHECK_FALSE(stochastically_dominates(low, high));
        CHECK(stochastically_dominates(low, low));
    }
}
