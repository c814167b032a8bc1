#include "bipcover/mscsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "bipcover/coalescent.hpp"
#include "bipcover/errors.hpp"
#include "bipcover/parallel.hpp"
#include "bipcover/treegen.hpp"

namespace bipcover {
namespace {

using Lineages = std::vector<TaxonSet>;

// Kingman merges within one edge; on_merge sees each new clade.
template <typename OnMerge>
void coalesce(Lineages& here, double remaining, Rng& rng, OnMerge& on_merge) {
    while (here.size() >= 2) {
        const auto m = static_cast<int>(here.size());
        const double wait = rng.exponential(pair_rate(m));
        if (wait >= remaining) break;
        remaining -= wait;
        auto a = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(m)));
        auto b = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(m - 1)));
        if (b >= a) ++b;
        if (a > b) std::swap(a, b);
        here[a] |= here[b];
        on_merge(here[a]);
        here[b] = here.back();
        here.pop_back();
    }
}

class GeneTreeRunner {
public:
    explicit GeneTreeRunner(const SpeciesTree& tree) : tree_(tree), lineages_(static_cast<std::size_t>(tree.node_count())) {}

    template <typename OnMerge>
    void run(Rng& rng, OnMerge&& on_merge, LineageCounts* counts = nullptr) {
        const double inf = std::numeric_limits<double>::infinity();
        for (int id : tree_.postorder()) {
            Lineages& here = lineages_[static_cast<std::size_t>(id)];
            here.clear();
            const TreeNode& n = tree_.node(id);
            if (n.left == -1) {
                here.push_back(TaxonSet::single(id));
            } else {
                for (int c : {n.left, n.right}) {
                    const Lineages& child = lineages_[static_cast<std::size_t>(c)];
                    here.insert(here.end(), child.begin(), child.end());
                }
            }
            if (counts) counts->entering[static_cast<std::size_t>(id)] = static_cast<int>(here.size());
            coalesce(here, id == tree_.root() ? inf : n.branch_length, rng, on_merge);
            if (counts) counts->leaving[static_cast<std::size_t>(id)] = static_cast<int>(here.size());
        }
    }

private:
    const SpeciesTree& tree_;
    std::vector<Lineages> lineages_;
};

void require_k4(const SpeciesTree& tree) {
    if (tree.leaf_count() < 4) throw DomainError("bipartition covers need at least 4 species");
}

}  // namespace

int simulate_kingman(int i, double T, Rng& rng) {
    if (i < 1) throw DomainError("lineage count must be positive");
    if (!(T >= 0.0)) throw DomainError("time must be nonnegative");
    int m = i;
    double t = 0.0;
    while (m >= 2) {
        t += rng.exponential(pair_rate(m));
        if (t >= T) break;
        --m;
    }
    return m;
}

std::vector<Bipartition> simulate_gene_tree(const SpeciesTree& tree, Rng& rng) {
    require_k4(tree);
    const int k = tree.leaf_count();
    std::vector<Bipartition> out;
    GeneTreeRunner runner(tree);
    runner.run(rng, [&](const TaxonSet& clade) {
        Bipartition bip(clade, k);
        if (bip.nontrivial()) out.push_back(bip);
    });
    // The two clades under the gene-tree root give the same split.
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

LineageCounts simulate_lineage_counts(const SpeciesTree& tree, Rng& rng) {
    LineageCounts counts;
    counts.entering.assign(static_cast<std::size_t>(tree.node_count()), 0);
    counts.leaving.assign(static_cast<std::size_t>(tree.node_count()), 0);
    GeneTreeRunner runner(tree);
    runner.run(rng, [](const TaxonSet&) {}, &counts);
    return counts;
}

bool is_cover(std::span<const Bipartition> species, std::span<const Bipartition> seen) {
    const std::unordered_set<Bipartition, BipartitionHash> have(seen.begin(), seen.end());
    return std::all_of(species.begin(), species.end(), [&](const Bipartition& b) { return have.count(b) != 0; });
}

namespace {

struct CoverSearch {
    std::optional<std::uint64_t> genes;
    std::size_t covered = 0;
    std::size_t total = 0;
};

CoverSearch search_cover(const SpeciesTree& tree, std::uint64_t cap, Rng& rng) {
    require_k4(tree);
    if (cap < 1) throw DomainError("gene cap must be at least 1");
    const int k = tree.leaf_count();
    std::unordered_map<Bipartition, std::size_t, BipartitionHash> index;
    for (const Bipartition& b : nontrivial_bipartitions(tree)) index.emplace(b, index.size());
    std::vector<char> seen(index.size(), 0);
    CoverSearch out;
    out.total = index.size();

    GeneTreeRunner runner(tree);
    auto on_merge = [&](const TaxonSet& clade) {
        const int size = clade.count();
        if (size < 2 || size > k - 2) return;
        auto it = index.find(Bipartition(clade, k));
        if (it != index.end() && !seen[it->second]) {
            seen[it->second] = 1;
            ++out.covered;
        }
    };
    for (std::uint64_t genes = 1; genes <= cap; ++genes) {
        runner.run(rng, on_merge);
        if (out.covered == out.total) {
            out.genes = genes;
            break;
        }
    }
    return out;
}

}  // namespace

std::optional<std::uint64_t> try_genes_to_cover(const SpeciesTree& tree, std::uint64_t cap, Rng& rng) {
    return search_cover(tree, cap, rng).genes;
}

std::uint64_t genes_to_cover(const SpeciesTree& tree, std::uint64_t cap, Rng& rng) {
    const CoverSearch r = search_cover(tree, cap, rng);
    if (!r.genes)
        throw CapExceeded("no bipartition cover within " + std::to_string(cap) + " gene trees", cap, r.covered,
                          r.total);
    return *r.genes;
}

std::vector<std::optional<std::uint64_t>> cover_counts(const SpeciesTree& tree, int trials, std::uint64_t seed,
                                                       std::uint64_t cap, unsigned threads) {
    require_k4(tree);
    if (trials < 1) throw DomainError("trials must be positive");
    std::vector<std::optional<std::uint64_t>> out(static_cast<std::size_t>(trials));
    parallel_for(out.size(), threads, [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        out[i] = try_genes_to_cover(tree, cap, rng);
    });
    return out;
}

std::uint64_t order_statistic(std::span<const std::optional<std::uint64_t>> counts, double q) {
    if (counts.empty()) throw DomainError("no counts");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    const auto n = counts.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::vector<std::uint64_t> finite;
    for (const auto& c : counts)
        if (c) finite.push_back(*c);
    if (rank > finite.size())
        throw CapExceeded("quantile falls among capped trials", 0, finite.size(), n);
    std::nth_element(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(rank - 1), finite.end());
    return finite[rank - 1];
}

QuantileResult empirical_quantile(const SpeciesTree& tree, double q, int trials, std::uint64_t seed,
                                  std::uint64_t cap, unsigned threads) {
    if (trials < 100) throw DomainError("empirical quantile needs at least 100 trials");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    const auto counts = cover_counts(tree, trials, seed, cap, threads);
    QuantileResult r;
    r.trials = trials;
    r.capped = static_cast<int>(std::count(counts.begin(), counts.end(), std::nullopt));
    r.value = order_statistic(counts, q);
    return r;
}

CoverEstimate cover_probability(const SpeciesTree& tree, std::uint64_t n, int trials, std::uint64_t seed,
                                unsigned threads) {
    if (n < 1) throw DomainError("gene count must be at least 1");
    if (trials < 100) throw DomainError("cover probability needs at least 100 trials");
    // Covering with n genes is the same event as needing at most n.
    const auto counts = cover_counts(tree, trials, seed, n, threads);
    CoverEstimate e;
    e.trials = trials;
    e.p = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](const auto& c) { return c.has_value(); })) /
          trials;
    e.se = std::sqrt(e.p * (1.0 - e.p) / trials);
    return e;
}

CoverExperimentResult overestimation_experiment(const SpeciesTree& tree, const BoundSpec& spec, int trials,
                                                std::uint64_t seed, std::uint64_t cap, unsigned threads) {
    spec.validate();
    if (spec.k != tree.leaf_count()) throw DomainError("spec.k does not match the tree's leaf count");
    const double t = tree.internal_min_branch();
    if (std::abs(t - spec.t_min) > 1e-12 * t) throw DomainError("spec.t_min does not match the tree's internal minimum");
    if (trials < 100) throw DomainError("overestimation experiment needs at least 100 trials");

    CoverExperimentResult r;
    r.trials = trials;
    r.seed = seed;
    r.m_o = original_bound(spec);
    r.m_b = balanced_bound(spec);
    r.counts = cover_counts(tree, trials, seed, cap, threads);
    r.capped = static_cast<int>(std::count(r.counts.begin(), r.counts.end(), std::nullopt));
    r.n_e = order_statistic(r.counts, spec.q);
    r.ratio_o = static_cast<double>(r.m_o) / static_cast<double>(r.n_e);
    r.ratio_b = static_cast<double>(r.m_b) / static_cast<double>(r.n_e);
    return r;
}

}  // namespace bipcover
