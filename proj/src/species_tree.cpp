#include "bipcover/species_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bipcover/errors.hpp"

namespace bipcover {

TaxonSet TaxonSet::complement(int n_taxa) const {
    TaxonSet out;
    for (int t = 0; t < n_taxa; ++t)
        if (!test(t)) out.set(t);
    return out;
}

Bipartition::Bipartition(const TaxonSet& one_side, int n_taxa) : n_taxa_(n_taxa) {
    if (n_taxa < 1 || n_taxa > kMaxTaxa) throw DomainError("bipartition taxon count out of range");
    side_ = one_side.test(0) ? one_side.complement(n_taxa) : one_side;
}

std::size_t BipartitionHash::operator()(const Bipartition& b) const noexcept {
    std::size_t h = static_cast<std::size_t>(b.n_taxa());
    for (auto w : b.side().words()) h = h * 0x9e3779b97f4a7c15ULL ^ (w + (h << 6) + (h >> 2));
    return h;
}

SpeciesTree::SpeciesTree(std::vector<TreeNode> nodes, int root, std::vector<std::string> labels)
    : nodes_(std::move(nodes)), root_(root), labels_(std::move(labels)) {
    const int k = leaf_count();
    if (k < 2 || k > kMaxTaxa) throw DomainError("species tree needs between 2 and 256 leaves");
    if (node_count() != 2 * k - 1) throw DomainError("binary tree with k leaves needs 2k-1 nodes");
    if (root_ < k || root_ >= node_count()) throw DomainError("root must be an internal node");
    if (nodes_[static_cast<std::size_t>(root_)].parent != -1) throw DomainError("root has a parent");

    for (int id = 0; id < node_count(); ++id) {
        const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
        const bool leaf = id < k;
        if (leaf != (n.left == -1) || (n.left == -1) != (n.right == -1))
            throw DomainError("leaves must be nodes 0..k-1 and internal nodes must have two children");
        if (!leaf) {
            for (int c : {n.left, n.right}) {
                if (c < 0 || c >= node_count() || nodes_[static_cast<std::size_t>(c)].parent != id)
                    throw DomainError("inconsistent parent/child links");
            }
        }
        if (id != root_ && !(n.branch_length > 0.0 && std::isfinite(n.branch_length)))
            throw DomainError("branch lengths must be positive and finite");
    }

    // Iterative postorder from the root; also detects disconnected nodes.
    postorder_.reserve(nodes_.size());
    std::vector<std::pair<int, bool>> stack{{root_, false}};
    while (!stack.empty()) {
        auto [id, expanded] = stack.back();
        stack.pop_back();
        const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
        if (expanded || n.left == -1) {
            postorder_.push_back(id);
            continue;
        }
        stack.emplace_back(id, true);
        stack.emplace_back(n.right, false);
        stack.emplace_back(n.left, false);
    }
    if (postorder_.size() != nodes_.size()) throw DomainError("tree is not connected");

    sizes_.assign(nodes_.size(), 0);
    for (int id : postorder_) {
        const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
        sizes_[static_cast<std::size_t>(id)] =
            n.left == -1 ? 1 : sizes_[static_cast<std::size_t>(n.left)] + sizes_[static_cast<std::size_t>(n.right)];
    }
}

TaxonSet SpeciesTree::clade(int id) const {
    TaxonSet out;
    std::vector<int> stack{id};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const TreeNode& n = node(cur);
        if (n.left == -1) {
            out.set(cur);
        } else {
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
    }
    return out;
}

double SpeciesTree::internal_min_branch() const {
    if (leaf_count() < 3) throw DomainError("internal edges need at least 3 leaves");
    double best = std::numeric_limits<double>::infinity();
    for (int id = leaf_count(); id < node_count(); ++id)
        if (id != root_) best = std::min(best, nodes_[static_cast<std::size_t>(id)].branch_length);
    return best;
}

SpeciesTree SpeciesTree::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("scale factor must be positive");
    std::vector<TreeNode> nodes = nodes_;
    for (auto& n : nodes) n.branch_length *= factor;
    return SpeciesTree(std::move(nodes), root_, labels_);
}

int TreeBuilder::add_leaf(double branch_length, std::string label, int taxon) {
    nodes_.push_back(Node{-1, -1, branch_length, taxon, std::move(label)});
    return static_cast<int>(nodes_.size()) - 1;
}

int TreeBuilder::add_internal(int left, int right, double branch_length) {
    const int n = static_cast<int>(nodes_.size());
    if (left < 0 || left >= n || right < 0 || right >= n || left == right)
        throw DomainError("internal node children must be existing distinct nodes");
    nodes_.push_back(Node{left, right, branch_length, -1, {}});
    return n;
}

void TreeBuilder::set_branch_length(int id, double branch_length) {
    nodes_.at(static_cast<std::size_t>(id)).length = branch_length;
}

SpeciesTree TreeBuilder::build(int root) const {
    if (root < 0 || root >= static_cast<int>(nodes_.size())) throw DomainError("unknown root node");

    // Left-to-right traversal fixes the default leaf order.
    std::vector<int> leaves;
    std::vector<int> internals;
    std::vector<int> stack{root};
    std::vector<char> seen(nodes_.size(), 0);
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(id)]) throw DomainError("node reachable twice; not a tree");
        seen[static_cast<std::size_t>(id)] = 1;
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.left == -1) {
            leaves.push_back(id);
        } else {
            internals.push_back(id);
            stack.push_back(n.right);
            stack.push_back(n.left);
        }
    }
    const int k = static_cast<int>(leaves.size());

    std::vector<int> taxon_of(nodes_.size(), -1);
    const bool explicit_taxa = nodes_[static_cast<std::size_t>(leaves.front())].taxon >= 0;
    std::vector<char> used(static_cast<std::size_t>(k), 0);
    for (int pos = 0; pos < k; ++pos) {
        const Node& n = nodes_[static_cast<std::size_t>(leaves[static_cast<std::size_t>(pos)])];
        if ((n.taxon >= 0) != explicit_taxa) throw DomainError("either all or no leaves carry taxon ids");
        const int t = explicit_taxa ? n.taxon : pos;
        if (t >= k || used[static_cast<std::size_t>(t)]) throw DomainError("taxon ids must be a permutation of 0..k-1");
        used[static_cast<std::size_t>(t)] = 1;
        taxon_of[static_cast<std::size_t>(leaves[static_cast<std::size_t>(pos)])] = t;
    }

    std::vector<int> new_id(nodes_.size(), -1);
    for (int leaf : leaves) new_id[static_cast<std::size_t>(leaf)] = taxon_of[static_cast<std::size_t>(leaf)];
    for (std::size_t pos = 0; pos < internals.size(); ++pos)
        new_id[static_cast<std::size_t>(internals[pos])] = k + static_cast<int>(pos);

    std::vector<TreeNode> out(static_cast<std::size_t>(2 * k - 1));
    std::vector<std::string> labels(static_cast<std::size_t>(k));
    for (int leaf : leaves) {
        const Node& n = nodes_[static_cast<std::size_t>(leaf)];
        const int id = new_id[static_cast<std::size_t>(leaf)];
        out[static_cast<std::size_t>(id)].branch_length = n.length;
        labels[static_cast<std::size_t>(id)] = n.label.empty() ? "t" + std::to_string(id) : n.label;
    }
    for (int old : internals) {
        const Node& n = nodes_[static_cast<std::size_t>(old)];
        const int id = new_id[static_cast<std::size_t>(old)];
        TreeNode& t = out[static_cast<std::size_t>(id)];
        t.left = new_id[static_cast<std::size_t>(n.left)];
        t.right = new_id[static_cast<std::size_t>(n.right)];
        t.branch_length = old == root ? 0.0 : n.length;
        out[static_cast<std::size_t>(t.left)].parent = id;
        out[static_cast<std::size_t>(t.right)].parent = id;
    }
    if (static_cast<int>(internals.size()) != k - 1) throw DomainError("tree is not binary");
    return SpeciesTree(std::move(out), new_id[static_cast<std::size_t>(root)], std::move(labels));
}

}  // namespace bipcover
