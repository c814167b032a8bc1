#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "bipcover/asymptotics.hpp"
#include "bipcover/bounds.hpp"
#include "bipcover/coalescent.hpp"
#include "bipcover/errors.hpp"
#include "bipcover/treegen.hpp"
#include "support.hpp"

using namespace bipcover;

namespace {

// Least n with sum (1-h)^n <= 1-q by direct scan.
std::uint64_t scan(const std::vector<double>& h, double q) {
    for (std::uint64_t n = 1;; ++n) {
        double s = 0.0;
        for (double x : h) s += std::pow(1.0 - x, static_cast<double>(n));
        if (s <= 1.0 - q) return n;
    }
}

// E g(Z_a + Z_b, 1, t) by summing over both outcomes.
double one_step_direct(int l, double t) {
    const int a = l / 2, b = l - a;
    double s = 0.0;
    for (int i = 1; i <= a; ++i)
        for (int j = 1; j <= b; ++j) s += g(a, i, t) * g(b, j, t) * g(i + j, 1, t);
    return s;
}

}  // namespace

TEST_SUITE("bounds") {
    TEST_CASE("spec validation") {
        CHECK_THROWS_AS(compute_bounds({3, 1.0, 0.9}), DomainError);
        CHECK_THROWS_AS(compute_bounds({513, 1.0, 0.9}), DomainError);
        CHECK_THROWS_AS(compute_bounds({8, 0.0, 0.9}), DomainError);
        CHECK_THROWS_AS(compute_bounds({8, INFINITY, 0.9}), DomainError);
        CHECK_THROWS_AS(compute_bounds({8, 1.0, 1.0}), DomainError);
        CHECK_THROWS_AS(compute_bounds({8, 1.0, 0.0}), DomainError);
        CHECK_THROWS_AS(compute_bounds({8, 1.0, NAN}), DomainError);
    }

    TEST_CASE("inversion") {
        CHECK(invert_sum_bound(std::vector<double>{1.0, 1.0, 1.0}, 0.99) == 1);
        CHECK(invert_sum_bound(std::vector<double>{0.5, 0.5}, 0.9) == 5);
        CHECK(invert_sum_bound(std::vector<double>{0.5}, 0.5) == 1);
        CHECK(invert_sum_bound(std::vector<double>{0.5}, 0.75) == 2);
        CHECK_THROWS_AS(invert_sum_bound(std::vector<double>{0.5, 0.0}, 0.9), NeverSatisfiable);
        CHECK_THROWS_AS(invert_sum_bound(std::vector<double>{1e-300}, 0.9), Overflow);
        const std::vector<double> h{0.01, 0.02, 0.3, 0.0005};
        for (double q : {0.5, 0.9, 0.99}) CHECK(invert_sum_bound(h, q) == scan(h, q));
    }

    TEST_CASE("four taxa: all bounds coincide") {
        for (double t : {0.05, 0.3, 1.0, 4.0})
            for (double q : {0.5, 0.9, 0.999}) {
                const auto r = compute_bounds({4, t, q});
                CHECK(r.m_o == r.m_c);
                CHECK(r.m_c == r.m_s);
                CHECK(r.m_s == r.m_b);
                const double exact = std::ceil(std::log(1.0 - q) / std::log1p(-g(2, 1, t)) - 1e-12);
                CHECK(static_cast<double>(r.m_o) == exact);
            }
        CHECK(compute_bounds({4, 1.0, 1e-12}).m_b == 1);
        const auto r = compute_bounds({4, 1.0, 0.9});
        CHECK(r.m_o == 3);
    }

    TEST_CASE("original bound reference values") {
        CHECK(original_bound_real({8, 0.5, 0.9}) == doctest::Approx(64.691775906813011964).epsilon(1e-9));
        CHECK(original_bound({8, 0.5, 0.9}) == 65);
        CHECK(original_bound_real({12, 0.2, 0.9}) == doctest::Approx(23468.85227024597366).epsilon(1e-9));
        CHECK(original_bound_real({20, 0.05, 0.99}) == doctest::Approx(25471841713158.706808).epsilon(1e-8));
        CHECK_THROWS_AS(original_bound({60, 0.01, 0.9}), Overflow);
    }

    TEST_CASE("caterpillar and one-step bounds by direct scan") {
        const BoundSpec cat{6, 0.5, 0.9};
        std::vector<double> hc;
        for (int l = 2; l <= 4; ++l) hc.push_back(g(l, 1, 0.5));
        CHECK(caterpillar_successes(cat) == hc);
        CHECK(caterpillar_bound(cat) == scan(hc, 0.9));

        const BoundSpec one{8, 0.2, 0.9};
        std::vector<double> hs;
        for (int l = 2; l <= 6; ++l) hs.push_back(one_step_direct(l, 0.2));
        const auto got = one_step_successes(one);
        REQUIRE(got.size() == hs.size());
        for (std::size_t i = 0; i < hs.size(); ++i) CHECK(got[i] == doctest::Approx(hs[i]).epsilon(1e-12));
        CHECK(one_step_bound(one) == scan(hs, 0.9));
    }

    TEST_CASE("one-step success closed forms") {
        for (double t : {0.1, 0.7, 2.0}) {
            CHECK(one_step_success(2, t) == doctest::Approx(g(2, 1, t)).epsilon(1e-14));
            const double q3 = g(2, 1, t) * g(2, 1, t) + g(2, 2, t) * g(3, 1, t);
            CHECK(one_step_success(3, t) == doctest::Approx(q3).epsilon(1e-13));
            for (int l = 2; l <= 40; ++l) CHECK(one_step_success(l, t) >= g(l, 1, t) - 1e-15);
        }
    }

    TEST_CASE("balanced distributions") {
        const double t = 0.4;
        const auto d = balanced_lineage_distributions(60, t);
        REQUIRE(d->l_max() >= 60);
        CHECK(d->x(1).pmf(1) == 1.0);
        CHECK(d->w(1).pmf(1) == 1.0);
        CHECK(d->x(2).pmf(2) == 1.0);
        for (int j = 1; j <= 2; ++j) CHECK(d->w(2).pmf(j) == doctest::Approx(g(2, j, t)).epsilon(1e-14));
        const double u = u_of_T(t);
        for (int l = 1; l <= 60; ++l) {
            CHECK(d->x(l).min_support() >= 1);
            CHECK(d->x(l).max_support() <= l);
            CHECK(d->w(l).max_support() <= l);
            CHECK(d->x(l).total_mass() == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(d->x(l).mean() <= u + 1e-9);
            if (l >= 2) {
                const double w = d->w(l).pmf(1);
                CHECK(w >= one_step_success(l, t) - 1e-12);
                CHECK(w <= d->w(l - 1).pmf(1) + 1e-12);
            }
        }
    }

    TEST_CASE("balanced distributions agree with simulation") {
        const double t = 0.4;
        const auto tree = balanced(5, t);
        const auto d = balanced_lineage_distributions(5, t);
        std::mt19937_64 eng(31337);
        const long n = 1'000'000;
        std::vector<long> x_counts(6, 0), w_counts(6, 0);
        for (long s = 0; s < n; ++s) {
            const int x = testsupport::entering_counts(tree, eng)[static_cast<std::size_t>(tree.root())];
            ++x_counts[static_cast<std::size_t>(x)];
            ++w_counts[static_cast<std::size_t>(testsupport::kingman_survivors(x, t, eng))];
        }
        std::vector<double> px(6, 0.0), pw(6, 0.0);
        for (int j = 1; j <= 5; ++j) {
            px[static_cast<std::size_t>(j)] = d->x(5).pmf(j);
            pw[static_cast<std::size_t>(j)] = d->w(5).pmf(j);
        }
        CHECK(testsupport::max_z(x_counts, px, n) <= 4.0);
        CHECK(testsupport::max_z(w_counts, pw, n) <= 4.0);
    }

    TEST_CASE("memoization") {
        const auto a = balanced_lineage_distributions(30, 0.25);
        const auto b = balanced_lineage_distributions(30, 0.25);
        CHECK(a.get() == b.get());
        const auto c = balanced_lineage_distributions(20, 0.25);
        CHECK(c->w(20).pmf(1) == a->w(20).pmf(1));

        std::vector<double> results(8, 0.0);
        std::vector<std::thread> pool;
        for (int i = 0; i < 8; ++i)
            pool.emplace_back([i, &results] {
                results[static_cast<std::size_t>(i)] = balanced_lineage_distributions(40 + 10 * i, 0.37)->w(40).pmf(1);
            });
        for (auto& th : pool) th.join();
        for (double r : results) CHECK(r == results[0]);
    }

    TEST_CASE("ordering of the bounds and envelope") {
        for (int k : {5, 8, 12, 20, 50})
            for (double t : {0.1, 0.5, 2.0})
                for (double q : {0.5, 0.9, 0.99}) {
                    CAPTURE(k);
                    CAPTURE(t);
                    CAPTURE(q);
                    BoundReport r;
                    try {
                        r = compute_bounds({k, t, q});
                    } catch (const Overflow&) {
                        continue;
                    }
                    CHECK(r.m_o >= r.m_c);
                    CHECK(r.m_c >= r.m_s);
                    CHECK(r.m_s >= r.m_b);
                    CHECK(r.m_b >= 1);
                    CHECK(balanced_envelope({k, t, q}) >= r.m_b);
                    CHECK(static_cast<int>(r.h_b.size()) == k - 3);
                }
    }

    TEST_CASE("bounds grow with q and shrink with t") {
        std::uint64_t prev = 0;
        for (double q : {0.1, 0.5, 0.9, 0.99, 0.999}) {
            const auto m = balanced_bound({10, 0.5, q});
            CHECK(m >= prev);
            prev = m;
        }
        prev = UINT64_MAX;
        for (double t : {0.1, 0.2, 0.5, 1.0, 3.0}) {
            const auto m = balanced_bound({10, t, 0.9});
            CHECK(m <= prev);
            prev = m;
        }
    }

    TEST_CASE("largest supported size") {
        const auto r = compute_bounds({512, 1.0, 0.9});
        CHECK(r.m_b >= 1);
        CHECK(r.m_b <= r.m_o);
    }
}
