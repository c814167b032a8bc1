#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bipcover {

// Upper limit on taxa for tree-level operations.
inline constexpr int kMaxTaxa = 256;

// Fixed-capacity bitset over taxon indices 0..kMaxTaxa-1.
class TaxonSet {
public:
    static constexpr int kWords = kMaxTaxa / 64;

    constexpr TaxonSet() = default;

    static TaxonSet single(int taxon) {
        TaxonSet s;
        s.set(taxon);
        return s;
    }

    void set(int taxon) { words_[word(taxon)] |= bit(taxon); }
    bool test(int taxon) const { return (words_[word(taxon)] & bit(taxon)) != 0; }

    int count() const {
        int c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    // Complement restricted to taxa 0..n_taxa-1.
    TaxonSet complement(int n_taxa) const;

    TaxonSet& operator|=(const TaxonSet& o) {
        for (int i = 0; i < kWords; ++i) words_[i] |= o.words_[i];
        return *this;
    }
    friend TaxonSet operator|(TaxonSet a, const TaxonSet& b) { return a |= b; }

    friend bool operator==(const TaxonSet&, const TaxonSet&) = default;
    friend auto operator<=>(const TaxonSet&, const TaxonSet&) = default;

    const std::array<std::uint64_t, kWords>& words() const { return words_; }

private:
    static constexpr int word(int taxon) { return taxon >> 6; }
    static constexpr std::uint64_t bit(int taxon) { return std::uint64_t{1} << (taxon & 63); }

    std::array<std::uint64_t, kWords> words_{};
};

// A split of the taxon set, stored as the side that does not contain taxon 0.
class Bipartition {
public:
    Bipartition(const TaxonSet& one_side, int n_taxa);

    const TaxonSet& side() const noexcept { return side_; }
    int n_taxa() const noexcept { return n_taxa_; }
    int side_size() const noexcept { return side_.count(); }
    // Both sides hold at least two taxa.
    bool nontrivial() const noexcept {
        const int s = side_size();
        return s >= 2 && n_taxa_ - s >= 2;
    }

    friend bool operator==(const Bipartition&, const Bipartition&) = default;
    friend auto operator<=>(const Bipartition&, const Bipartition&) = default;

private:
    TaxonSet side_;
    int n_taxa_;
};

struct BipartitionHash {
    std::size_t operator()(const Bipartition& b) const noexcept;
};

struct TreeNode {
    int parent = -1;
    int left = -1;   // -1 for leaves
    int right = -1;
    double branch_length = 0.0;  // length of the edge to the parent; unused at the root
};

// Rooted binary species tree. Nodes 0..k-1 are the leaves, node i carrying
// taxon i; internal nodes follow. Immutable once built.
class SpeciesTree {
public:
    SpeciesTree(std::vector<TreeNode> nodes, int root, std::vector<std::string> labels);

    int leaf_count() const noexcept { return static_cast<int>(labels_.size()); }
    int node_count() const noexcept { return static_cast<int>(nodes_.size()); }
    int root() const noexcept { return root_; }
    const TreeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    bool is_leaf(int id) const noexcept { return id < leaf_count(); }
    const std::string& label(int taxon) const { return labels_.at(static_cast<std::size_t>(taxon)); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    // Children before parents; the root comes last.
    const std::vector<int>& postorder() const noexcept { return postorder_; }
    // Number of leaves below each node.
    const std::vector<int>& subtree_sizes() const noexcept { return sizes_; }
    int subtree_size(int id) const { return sizes_.at(static_cast<std::size_t>(id)); }
    TaxonSet clade(int id) const;

    // Minimum length over edges whose child is internal (and not the root).
    // Requires k >= 3.
    double internal_min_branch() const;

    // Copy with every branch length multiplied by `factor`.
    SpeciesTree scaled(double factor) const;

private:
    std::vector<TreeNode> nodes_;
    int root_;
    std::vector<std::string> labels_;
    std::vector<int> postorder_;
    std::vector<int> sizes_;
};

// Incremental construction of a SpeciesTree from arbitrary node ids.
class TreeBuilder {
public:
    // taxon < 0 means "number leaves in left-to-right order".
    int add_leaf(double branch_length, std::string label = {}, int taxon = -1);
    int add_internal(int left, int right, double branch_length);
    void set_branch_length(int id, double branch_length);

    // Renumbers leaves to their taxon indices; labels default to "t<taxon>".
    SpeciesTree build(int root) const;

private:
    struct Node {
        int left = -1;
        int right = -1;
        double length = 0.0;
        int taxon = -1;
        std::string label;
    };
    std::vector<Node> nodes_;
};

}  // namespace bipcover
