#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bipcover/bounds.hpp"
#include "bipcover/coalescent.hpp"
#include "bipcover/errors.hpp"
#include "bipcover/mscsim.hpp"
#include "bipcover/newick.hpp"
#include "bipcover/treegen.hpp"
#include "support.hpp"

using namespace bipcover;

namespace {

// Exact pmf of the count entering node v, by recursion over the subtree.
LineageDistribution entering_exact(const SpeciesTree& t, int v) {
    const auto& n = t.node(v);
    if (n.left == -1) return LineageDistribution::point_mass(1);
    const auto l = evolve(entering_exact(t, n.left), t.node(n.left).branch_length);
    const auto r = evolve(entering_exact(t, n.right), t.node(n.right).branch_length);
    return convolve(l, r);
}

SpeciesTree with_unit_lengths(const SpeciesTree& t) {
    TreeBuilder b;
    std::vector<int> id(static_cast<std::size_t>(t.node_count()), -1);
    for (int v : t.postorder()) {
        const auto& n = t.node(v);
        id[static_cast<std::size_t>(v)] = n.left == -1
            ? b.add_leaf(1.0, t.label(v), v)
            : b.add_internal(id[static_cast<std::size_t>(n.left)], id[static_cast<std::size_t>(n.right)], 1.0);
    }
    return b.build(id[static_cast<std::size_t>(t.root())]);
}

}  // namespace

TEST_SUITE("mscsim") {
    TEST_CASE("kingman simulator matches the kernel") {
        Rng rng(5);
        const long n = 1'000'000;
        std::vector<long> counts(7, 0);
        for (long s = 0; s < n; ++s) ++counts[static_cast<std::size_t>(simulate_kingman(6, 0.5, rng))];
        std::vector<double> p(7, 0.0);
        for (int j = 1; j <= 6; ++j) p[static_cast<std::size_t>(j)] = g(6, j, 0.5);
        CHECK(testsupport::max_z(counts, p, n) <= 4.0);
        CHECK(simulate_kingman(1, 5.0, rng) == 1);
        CHECK(simulate_kingman(9, 0.0, rng) == 9);
    }

    TEST_CASE("gene tree bipartitions") {
        const auto four = balanced(4, 1e9);
        Rng rng(1);
        const auto species = nontrivial_bipartitions(four);
        for (int i = 0; i < 100; ++i) CHECK(simulate_gene_tree(four, rng) == species);
        for (int k : {5, 9, 30}) {
            const auto t = yule(k, 0.1, static_cast<std::uint64_t>(k));
            for (int i = 0; i < 200; ++i) {
                const auto b = simulate_gene_tree(t, rng);
                CHECK(static_cast<int>(b.size()) <= k - 3);
                CHECK(std::is_sorted(b.begin(), b.end()));
                CHECK(std::adjacent_find(b.begin(), b.end()) == b.end());
                for (const auto& x : b) CHECK(x.nontrivial());
            }
        }
    }

    TEST_CASE("lineage counts agree with exact distributions") {
        const auto t = parse_newick("((((a:0.3,b:0.7):0.2,c:0.4):0.5,(d:0.2,e:0.3):0.25):1,((f:0.6,g:0.1):0.35,h:0.8):0.45);");
        Rng rng(99);
        const long n = 400'000;
        for (int v = t.leaf_count(); v < t.node_count(); ++v) {
            const auto exact = entering_exact(t, v);
            std::vector<long> counts(static_cast<std::size_t>(t.subtree_size(v)) + 1, 0);
            std::vector<double> p(counts.size(), 0.0);
            for (int j = 1; j <= t.subtree_size(v); ++j) p[static_cast<std::size_t>(j)] = exact.pmf(j);
            Rng local(derive_seed(99, static_cast<std::uint64_t>(v)));
            for (long s = 0; s < n; ++s)
                ++counts[static_cast<std::size_t>(simulate_lineage_counts(t, local).entering[static_cast<std::size_t>(v)])];
            CAPTURE(v);
            CHECK(testsupport::max_z(counts, p, n) <= 4.5);
        }
        const auto c = simulate_lineage_counts(t, rng);
        CHECK(c.leaving[static_cast<std::size_t>(t.root())] == 1);
        for (int x = 0; x < t.leaf_count(); ++x) CHECK(c.entering[static_cast<std::size_t>(x)] == 1);
    }

    TEST_CASE("root counts of a balanced tree") {
        const auto t = balanced(5, 0.3);
        const auto d = balanced_lineage_distributions(5, 0.3);
        Rng rng(2024);
        const long n = 500'000;
        std::vector<long> counts(6, 0);
        for (long s = 0; s < n; ++s)
            ++counts[static_cast<std::size_t>(simulate_lineage_counts(t, rng).entering[static_cast<std::size_t>(t.root())])];
        std::vector<double> p(6, 0.0);
        for (int j = 1; j <= 5; ++j) p[static_cast<std::size_t>(j)] = d->x(5).pmf(j);
        CHECK(testsupport::max_z(counts, p, n) <= 4.0);
    }

    TEST_CASE("balanced root count dominates other topologies") {
        // One-sided Kolmogorov-Smirnov: P(sup (F_B - F_emp) > eps) <= exp(-2 N eps^2).
        const int N = 100'000;
        const double eps = std::sqrt(-std::log(0.001) / (2.0 * N));
        const auto bal = balanced_lineage_distributions(8, 1.0);
        const auto& xb = bal->x(8);
        const auto all = enumerate_topologies(8);
        for (std::size_t idx = 0; idx < all.size(); idx += all.size() / 20) {
            const auto& t = all[idx];
            Rng rng(derive_seed(4242, idx));
            std::vector<long> counts(9, 0);
            for (int s = 0; s < N; ++s)
                ++counts[static_cast<std::size_t>(simulate_lineage_counts(t, rng).entering[static_cast<std::size_t>(t.root())])];
            double D = 0.0;
            long cum = 0;
            for (int j = 1; j <= 8; ++j) {
                cum += counts[static_cast<std::size_t>(j)];
                D = std::max(D, xb.cdf(j) - static_cast<double>(cum) / N);
            }
            CAPTURE(idx);
            CHECK(D <= eps);
        }
    }

    TEST_CASE("cover detection") {
        const auto t = balanced(6, 1.0);
        const auto sp = nontrivial_bipartitions(t);
        CHECK(is_cover(sp, sp));
        CHECK(!is_cover(sp, std::span(sp).first(sp.size() - 1)));
        CHECK(is_cover(std::span<const Bipartition>{}, std::span<const Bipartition>{}));
    }

    TEST_CASE("genes to cover") {
        Rng rng(3);
        CHECK(genes_to_cover(balanced(4, 1e9), 10, rng) == 1);
        CHECK(genes_to_cover(caterpillar(7, 1e9), 10, rng) == 1);
        const auto hard = caterpillar(12, 0.001);
        try {
            genes_to_cover(hard, 3, rng);
            FAIL("expected CapExceeded");
        } catch (const CapExceeded& e) {
            CHECK(e.genes() == 3);
            CHECK(e.total() == 9);
            CHECK(e.covered() < 9);
        }
        Rng rng2(3);
        CHECK(!try_genes_to_cover(hard, 3, rng2).has_value());
    }

    TEST_CASE("order statistics") {
        using O = std::optional<std::uint64_t>;
        const std::vector<O> v{O{5}, O{1}, O{3}, O{2}, O{4}};
        CHECK(order_statistic(v, 0.2) == 1);
        CHECK(order_statistic(v, 0.21) == 2);
        CHECK(order_statistic(v, 0.9) == 5);
        CHECK(order_statistic(v, 0.99) == 5);
        CHECK_THROWS_AS(order_statistic(v, 1.0), DomainError);
        const std::vector<O> w{O{1}, std::nullopt, O{2}, O{7}};
        CHECK(order_statistic(w, 0.75) == 7);
        CHECK_THROWS_AS(order_statistic(w, 0.9), CapExceeded);
        CHECK_THROWS_AS(order_statistic(std::vector<O>{}, 0.5), DomainError);
    }

    TEST_CASE("determinism and thread invariance") {
        const auto t = yule(10, 0.3, 17);
        const auto a = cover_counts(t, 300, 11, kDefaultGeneCap, 1);
        const auto b = cover_counts(t, 300, 11, kDefaultGeneCap, 4);
        const auto c = cover_counts(t, 300, 12, kDefaultGeneCap, 1);
        CHECK(a == b);
        CHECK(a != c);
        // Trial i depends only on its own stream.
        Rng r5(derive_seed(11, 5));
        CHECK(a[5] == try_genes_to_cover(t, kDefaultGeneCap, r5));
    }

    TEST_CASE("empirical quantile is stable across seeds") {
        const auto t = balanced(8, 0.5);
        const int N = 10'000;
        const auto ref = cover_counts(t, N, 1000, kDefaultGeneCap, 4);
        std::vector<std::uint64_t> sorted;
        for (const auto& x : ref) sorted.push_back(*x);
        std::mt19937_64 eng(8);
        std::uniform_int_distribution<std::size_t> pick(0, sorted.size() - 1);
        std::vector<std::uint64_t> boot;
        std::vector<std::optional<std::uint64_t>> sample(sorted.size());
        for (int b = 0; b < 1000; ++b) {
            for (auto& s : sample) s = sorted[pick(eng)];
            boot.push_back(order_statistic(sample, 0.9));
        }
        std::sort(boot.begin(), boot.end());
        const auto lo = boot[4], hi = boot[995];
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const auto r = empirical_quantile(t, 0.9, N, seed, kDefaultGeneCap, 4);
            CAPTURE(seed);
            CHECK(r.value >= lo);
            CHECK(r.value <= hi);
            CHECK(r.capped == 0);
        }
        CHECK_THROWS_AS(empirical_quantile(t, 0.9, 50, 1), DomainError);
    }

    TEST_CASE("cover probability") {
        const auto t = yule(10, 0.4, 5);
        const auto huge = cover_probability(t, 100'000, 200, 1, 4);
        CHECK(huge.p == 1.0);
        const auto mb = balanced_bound({10, t.internal_min_branch(), 0.9});
        const auto at_bound = cover_probability(t, mb, 2000, 2, 4);
        CHECK(at_bound.p >= 0.9 - 3 * at_bound.se);
        double prev = 0.0;
        for (std::uint64_t n : {1, 3, 10, 30, 100}) {
            const auto e = cover_probability(t, n, 1000, 3, 4);
            CHECK(e.p >= prev);
            prev = e.p;
        }
    }

    TEST_CASE("overestimation experiment") {
        const auto t = caterpillar(8, 1.0);
        const BoundSpec spec{8, 1.0, 0.9};
        const auto r = overestimation_experiment(t, spec, 10'000, 7, kDefaultGeneCap, 4);
        CHECK(r.trials == 10'000);
        CHECK(r.capped == 0);
        CHECK(r.counts.size() == 10'000);
        CHECK(r.m_o == original_bound(spec));
        CHECK(r.m_b == balanced_bound(spec));
        CHECK(r.ratio_o == doctest::Approx(static_cast<double>(r.m_o) / static_cast<double>(r.n_e)));
        CHECK(r.m_b >= r.n_e);
        CHECK(r.ratio_o >= r.ratio_b);
        CHECK_THROWS_AS(overestimation_experiment(t, {9, 1.0, 0.9}, 200, 1), DomainError);
        CHECK_THROWS_AS(overestimation_experiment(t, {8, 0.5, 0.9}, 200, 1), DomainError);

        // Reproducible over many random trees.
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto y = yule(8, 0.5, s);
            const BoundSpec ys{8, y.internal_min_branch(), 0.9};
            const auto a = overestimation_experiment(y, ys, 100, s, kDefaultGeneCap, 1);
            const auto b = overestimation_experiment(y, ys, 100, s, kDefaultGeneCap, 3);
            CHECK(a.n_e == b.n_e);
            CHECK(a.counts == b.counts);
        }
    }
}
