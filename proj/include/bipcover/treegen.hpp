#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bipcover/species_tree.hpp"

namespace bipcover {

// (((t0,t1),t2),...,t{k-1}); every edge has length T.
SpeciesTree caterpillar(int k, double T);

// Recursive ceil(k/2) / floor(k/2) split, larger side on the left; every edge has length T.
SpeciesTree balanced(int k, double T);

// Pure-birth tree grown from a root split until k tips exist, then every
// branch scaled so that internal_min_branch() == t_min. Tips are extended by
// one further waiting time so pendant edges are never zero.
SpeciesTree yule(int k, double t_min, std::uint64_t seed);

// One count per nontrivial bipartition, sorted ascending. The two root edges
// contribute once, with the smaller of the two subtree sizes. Requires k >= 4.
std::vector<int> descendant_counts(const SpeciesTree& tree);

// Leaf counts below every non-root node (2k-2 values), sorted ascending.
std::vector<int> all_edge_descendant_counts(const SpeciesTree& tree);

// The k-3 nontrivial bipartitions, sorted. Requires k >= 4.
std::vector<Bipartition> nontrivial_bipartitions(const SpeciesTree& tree);

// Every internal node has subtree sizes differing by at most one.
bool is_balanced(const SpeciesTree& tree);

// First unbalanced internal node in breadth-first order from the root, or -1.
int topmost_unbalanced(const SpeciesTree& tree);

// Moves one leaf of a cherry from the larger side of the topmost unbalanced
// vertex onto a leaf of its smaller side. The imbalance there drops by 2 and
// the multiset of branch lengths is unchanged. Throws AlreadyBalanced.
SpeciesTree rebalance_step(const SpeciesTree& tree);

// Calls fn once for every rooted binary tree on leaves 0..k-1 ((2k-3)!! of
// them), all edges of length 1. Requires 3 <= k <= 9.
void for_each_topology(int k, const std::function<void(const SpeciesTree&)>& fn);
std::vector<SpeciesTree> enumerate_topologies(int k);

}  // namespace bipcover
