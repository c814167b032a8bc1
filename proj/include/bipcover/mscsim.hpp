#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bipcover/bounds.hpp"
#include "bipcover/rng.hpp"
#include "bipcover/species_tree.hpp"

namespace bipcover {

inline constexpr std::uint64_t kDefaultGeneCap = 10'000'000;

// Number of lineages left after running Kingman's coalescent on i lineages for time T.
int simulate_kingman(int i, double T, Rng& rng);

// Nontrivial bipartitions (unrooted sense) of one gene tree drawn from the
// multispecies coalescent on `tree`, one lineage per species; sorted.
std::vector<Bipartition> simulate_gene_tree(const SpeciesTree& tree, Rng& rng);

// Lineage counts of one gene-tree draw, indexed by species-tree node:
// entering[v] is the count at the bottom of v's edge (1 at leaves), leaving[v]
// the count that survives to its top. At the root, leaving is always 1.
struct LineageCounts {
    std::vector<int> entering;
    std::vector<int> leaving;
};
LineageCounts simulate_lineage_counts(const SpeciesTree& tree, Rng& rng);

// True iff every species bipartition appears in `seen`.
bool is_cover(std::span<const Bipartition> species, std::span<const Bipartition> seen);

// Gene trees drawn until their bipartitions cover the species tree. Throws
// CapExceeded after `cap` genes.
std::uint64_t genes_to_cover(const SpeciesTree& tree, std::uint64_t cap, Rng& rng);
// Same, but returns nullopt instead of throwing.
std::optional<std::uint64_t> try_genes_to_cover(const SpeciesTree& tree, std::uint64_t cap, Rng& rng);

// genes_to_cover for trials 0..trials-1, trial i using stream derive_seed(seed, i).
// Capped trials are nullopt. Output does not depend on `threads`.
std::vector<std::optional<std::uint64_t>> cover_counts(const SpeciesTree& tree, int trials, std::uint64_t seed,
                                                       std::uint64_t cap = kDefaultGeneCap, unsigned threads = 1);

// The ceil(q n)-th smallest value, capped entries counting as +infinity.
// Throws CapExceeded if that order statistic is capped.
std::uint64_t order_statistic(std::span<const std::optional<std::uint64_t>> counts, double q);

struct QuantileResult {
    std::uint64_t value = 0;
    int trials = 0;
    int capped = 0;
};
QuantileResult empirical_quantile(const SpeciesTree& tree, double q, int trials, std::uint64_t seed,
                                  std::uint64_t cap = kDefaultGeneCap, unsigned threads = 1);

struct CoverEstimate {
    double p = 0.0;
    double se = 0.0;  // binomial standard error sqrt(p(1-p)/trials)
    int trials = 0;
};
// Fraction of trials in which n gene trees form a cover.
CoverEstimate cover_probability(const SpeciesTree& tree, std::uint64_t n, int trials, std::uint64_t seed,
                                unsigned threads = 1);

struct CoverExperimentResult {
    std::uint64_t n_e = 0;  // empirical q-quantile of genes_to_cover
    std::uint64_t m_o = 0;
    std::uint64_t m_b = 0;
    double ratio_o = 0.0;  // m_o / n_e
    double ratio_b = 0.0;  // m_b / n_e
    int trials = 0;
    int capped = 0;
    std::uint64_t seed = 0;
    // Raw per-trial counts, kept for resampling.
    std::vector<std::optional<std::uint64_t>> counts;
};
// spec.k must equal the leaf count and spec.t_min the tree's internal minimum (relative 1e-12).
CoverExperimentResult overestimation_experiment(const SpeciesTree& tree, const BoundSpec& spec, int trials,
                                                std::uint64_t seed, std::uint64_t cap = kDefaultGeneCap,
                                                unsigned threads = 1);

}  // namespace bipcover
