#pragma once

// Reference simulators for tests. They use the standard library's engine and
// distributions directly, so they share no sampling code with the library.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bipcover/species_tree.hpp"

namespace testsupport {

inline int kingman_survivors(int i, double T, std::mt19937_64& eng) {
    int m = i;
    double t = 0.0;
    while (m > 1) {
        std::exponential_distribution<double> wait(m * (m - 1) / 2.0);
        t += wait(eng);
        if (t > T) break;
        --m;
    }
    return m;
}

// Lineage count entering each node (after its children's lineages merge),
// for one multispecies-coalescent draw on `tree`.
inline std::vector<int> entering_counts(const bipcover::SpeciesTree& tree, std::mt19937_64& eng) {
    std::vector<int> enter(static_cast<std::size_t>(tree.node_count()), 0);
    std::vector<int> leave(enter.size(), 0);
    for (int id : tree.postorder()) {
        const auto& n = tree.node(id);
        const int in = n.left == -1 ? 1 : leave[static_cast<std::size_t>(n.left)] + leave[static_cast<std::size_t>(n.right)];
        enter[static_cast<std::size_t>(id)] = in;
        leave[static_cast<std::size_t>(id)] = id == tree.root() ? 1 : kingman_survivors(in, n.branch_length, eng);
    }
    return enter;
}

// |observed - expected| / binomial SE over bins with expected count >= 10.
inline double max_z(const std::vector<long>& counts, const std::vector<double>& probs, long n) {
    double worst = 0.0;
    for (std::size_t b = 0; b < probs.size() && b < counts.size(); ++b) {
        const double p = probs[b];
        if (p * n < 10.0) continue;
        const double se = std::sqrt(n * p * (1.0 - p));
        worst = std::max(worst, std::abs(counts[b] - p * n) / se);
    }
    return worst;
}

}  // namespace testsupport
