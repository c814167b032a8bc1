#include "bipcover/treegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <set>
#include <string>

#include "bipcover/errors.hpp"
#include "bipcover/rng.hpp"

namespace bipcover {
namespace {

void check_positive_length(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("branch length must be positive and finite");
}

int build_balanced(TreeBuilder& b, int k, double T) {
    if (k == 1) return b.add_leaf(T);
    const int left = build_balanced(b, (k + 1) / 2, T);
    const int right = build_balanced(b, k / 2, T);
    return b.add_internal(left, right, T);
}

int sibling_of(const std::vector<TreeNode>& nodes, int id) {
    const TreeNode& p = nodes[static_cast<std::size_t>(nodes[static_cast<std::size_t>(id)].parent)];
    return p.left == id ? p.right : p.left;
}

void replace_child(std::vector<TreeNode>& nodes, int parent, int old_child, int new_child) {
    TreeNode& p = nodes[static_cast<std::size_t>(parent)];
    (p.left == old_child ? p.left : p.right) = new_child;
    nodes[static_cast<std::size_t>(new_child)].parent = parent;
}

}  // namespace

SpeciesTree caterpillar(int k, double T) {
    if (k < 3 || k > kMaxTaxa) throw DomainError("caterpillar needs 3 <= k <= 256");
    check_positive_length(T);
    TreeBuilder b;
    int spine = b.add_leaf(T);
    for (int i = 1; i < k; ++i) spine = b.add_internal(spine, b.add_leaf(T), T);
    return b.build(spine);
}

SpeciesTree balanced(int k, double T) {
    if (k < 2 || k > kMaxTaxa) throw DomainError("balanced tree needs 2 <= k <= 256");
    check_positive_length(T);
    TreeBuilder b;
    const int root = build_balanced(b, k, T);
    return b.build(root);
}

SpeciesTree yule(int k, double t_min, std::uint64_t seed) {
    if (k < 4 || k > kMaxTaxa) throw DomainError("yule tree needs 4 <= k <= 256");
    check_positive_length(t_min);
    Rng rng(seed);

    struct Lineage {
        int node;
        double born;
    };
    TreeBuilder b;
    std::vector<int> left(static_cast<std::size_t>(2 * k), -1), right(left);
    std::vector<double> length(left.size(), 0.0);
    std::vector<char> is_tip(left.size(), 0);

    // Nodes are numbered as they are created; the builder is filled afterwards.
    int next = 0;
    const int root = next++;
    std::vector<Lineage> tips{{next++, 0.0}, {next++, 0.0}};
    left[static_cast<std::size_t>(root)] = tips[0].node;
    right[static_cast<std::size_t>(root)] = tips[1].node;

    double t = 0.0;
    for (;;) {
        const int n = static_cast<int>(tips.size());
        t += rng.exponential(static_cast<double>(n));
        if (n == k) break;
        const auto pick = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
        const Lineage parent = tips[pick];
        length[static_cast<std::size_t>(parent.node)] = t - parent.born;
        const int a = next++;
        const int c = next++;
        left[static_cast<std::size_t>(parent.node)] = a;
        right[static_cast<std::size_t>(parent.node)] = c;
        tips[pick] = {a, t};
        tips.push_back({c, t});
    }
    for (const Lineage& tip : tips) {
        length[static_cast<std::size_t>(tip.node)] = t - tip.born;
        is_tip[static_cast<std::size_t>(tip.node)] = 1;
    }

    // Children are always created after their parent, so reverse creation
    // order visits children first.
    std::vector<int> built(static_cast<std::size_t>(next), -1);
    for (int id = next - 1; id >= 0; --id) {
        const auto u = static_cast<std::size_t>(id);
        built[u] = is_tip[u] ? b.add_leaf(length[u])
                             : b.add_internal(built[static_cast<std::size_t>(left[u])],
                                              built[static_cast<std::size_t>(right[u])], length[u]);
    }
    const SpeciesTree raw = b.build(built[static_cast<std::size_t>(root)]);
    return raw.scaled(t_min / raw.internal_min_branch());
}

std::vector<int> descendant_counts(const SpeciesTree& tree) {
    const int k = tree.leaf_count();
    if (k < 4) throw DomainError("descendant counts need k >= 4");
    const int root = tree.root();
    const TreeNode& r = tree.node(root);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k - 3));
    for (int id = k; id < tree.node_count(); ++id) {
        if (id == root || id == r.left || id == r.right) continue;
        out.push_back(tree.subtree_size(id));
    }
    if (!tree.is_leaf(r.left) && !tree.is_leaf(r.right))
        out.push_back(std::min(tree.subtree_size(r.left), tree.subtree_size(r.right)));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> all_edge_descendant_counts(const SpeciesTree& tree) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(tree.node_count() - 1));
    for (int id = 0; id < tree.node_count(); ++id)
        if (id != tree.root()) out.push_back(tree.subtree_size(id));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Bipartition> nontrivial_bipartitions(const SpeciesTree& tree) {
    const int k = tree.leaf_count();
    if (k < 4) throw DomainError("nontrivial bipartitions need k >= 4");
    std::vector<TaxonSet> clades(static_cast<std::size_t>(tree.node_count()));
    std::set<Bipartition> out;
    for (int id : tree.postorder()) {
        const TreeNode& n = tree.node(id);
        auto& c = clades[static_cast<std::size_t>(id)];
        if (n.left == -1) {
            c = TaxonSet::single(id);
            continue;
        }
        c = clades[static_cast<std::size_t>(n.left)] | clades[static_cast<std::size_t>(n.right)];
        if (id == tree.root()) continue;
        Bipartition bip(c, k);
        if (bip.nontrivial()) out.insert(bip);
    }
    return {out.begin(), out.end()};
}

bool is_balanced(const SpeciesTree& tree) { return topmost_unbalanced(tree) == -1; }

int topmost_unbalanced(const SpeciesTree& tree) {
    std::deque<int> queue{tree.root()};
    while (!queue.empty()) {
        const int id = queue.front();
        queue.pop_front();
        const TreeNode& n = tree.node(id);
        if (n.left == -1) continue;
        if (std::abs(tree.subtree_size(n.left) - tree.subtree_size(n.right)) > 1) return id;
        queue.push_back(n.left);
        queue.push_back(n.right);
    }
    return -1;
}

SpeciesTree rebalance_step(const SpeciesTree& tree) {
    const int v = topmost_unbalanced(tree);
    if (v == -1) throw AlreadyBalanced("tree is already balanced");

    auto descend = [&](int start, bool toward_larger) {
        int id = start;
        while (!tree.is_leaf(id)) {
            const TreeNode& n = tree.node(id);
            const int a = tree.subtree_size(n.left);
            const int b = tree.subtree_size(n.right);
            if (a == b) {
                id = n.left;
            } else {
                id = ((a > b) == toward_larger) ? n.left : n.right;
            }
        }
        return id;
    };
    const int pruned = descend(v, true);
    const int anchor = descend(v, false);

    std::vector<TreeNode> nodes;
    nodes.reserve(static_cast<std::size_t>(tree.node_count()));
    for (int id = 0; id < tree.node_count(); ++id) nodes.push_back(tree.node(id));

    // Splice out the cherry's parent; its sibling takes its place.
    const int p = nodes[static_cast<std::size_t>(pruned)].parent;
    const int sib = sibling_of(nodes, pruned);
    replace_child(nodes, nodes[static_cast<std::size_t>(p)].parent, p, sib);

    // Reuse p as the new cherry above the anchor leaf, keeping p's edge length.
    const int anchor_parent = nodes[static_cast<std::size_t>(anchor)].parent;
    replace_child(nodes, anchor_parent, anchor, p);
    TreeNode& c = nodes[static_cast<std::size_t>(p)];
    c.left = anchor;
    c.right = pruned;
    nodes[static_cast<std::size_t>(anchor)].parent = p;
    nodes[static_cast<std::size_t>(pruned)].parent = p;

    return SpeciesTree(std::move(nodes), tree.root(), tree.labels());
}

void for_each_topology(int k, const std::function<void(const SpeciesTree&)>& fn) {
    if (k < 3 || k > 9) throw DomainError("topology enumeration supports 3 <= k <= 9");
    const auto n_nodes = static_cast<std::size_t>(2 * k - 1);
    std::vector<TreeNode> nodes(n_nodes);
    std::vector<std::string> labels;
    for (int t = 0; t < k; ++t) labels.push_back("t" + std::to_string(t));

    nodes[0].parent = nodes[1].parent = k;
    nodes[static_cast<std::size_t>(k)].left = 0;
    nodes[static_cast<std::size_t>(k)].right = 1;
    int root = k;

    // Leaf i joins by splitting any existing edge, including the one above the root.
    std::function<void(int)> add = [&](int leaf) {
        if (leaf == k) {
            std::vector<TreeNode> copy(nodes);
            for (std::size_t id = 0; id < n_nodes; ++id)
                copy[id].branch_length = static_cast<int>(id) == root ? 0.0 : 1.0;
            fn(SpeciesTree(std::move(copy), root, labels));
            return;
        }
        const int fresh = k + leaf - 1;
        std::vector<int> present;
        for (int id = 0; id < leaf; ++id) present.push_back(id);
        for (int id = k; id < fresh; ++id) present.push_back(id);
        for (int e : present) {
            const int above = nodes[static_cast<std::size_t>(e)].parent;
            TreeNode& f = nodes[static_cast<std::size_t>(fresh)];
            f = TreeNode{above, e, leaf, 0.0};
            nodes[static_cast<std::size_t>(e)].parent = fresh;
            nodes[static_cast<std::size_t>(leaf)].parent = fresh;
            const int saved_root = root;
            if (above == -1) {
                root = fresh;
            } else {
                TreeNode& a = nodes[static_cast<std::size_t>(above)];
                (a.left == e ? a.left : a.right) = fresh;
            }
            add(leaf + 1);
            // Undo.
            if (above != -1) {
                TreeNode& a = nodes[static_cast<std::size_t>(above)];
                (a.left == fresh ? a.left : a.right) = e;
            }
            root = saved_root;
            nodes[static_cast<std::size_t>(e)].parent = above;
            nodes[static_cast<std::size_t>(leaf)].parent = -1;
            nodes[static_cast<std::size_t>(fresh)] = TreeNode{};
        }
    };
    add(2);
}

std::vector<SpeciesTree> enumerate_topologies(int k) {
    std::vector<SpeciesTree> out;
    for_each_topology(k, [&](const SpeciesTree& t) { out.push_back(t); });
    return out;
}

}  // namespace bipcover
