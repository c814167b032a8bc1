#include "bipcover/newick.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <vector>

#include "bipcover/errors.hpp"

namespace bipcover {
namespace {

std::string format_length(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write(const SpeciesTree& tree, int id, std::string& out) {
    const TreeNode& n = tree.node(id);
    if (n.left == -1) {
        out += tree.label(id);
    } else {
        out += '(';
        write(tree, n.left, out);
        out += ',';
        write(tree, n.right, out);
        out += ')';
    }
    if (id != tree.root()) {
        out += ':';
        out += format_length(n.branch_length);
    }
}

bool is_delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',' || c == ':' || c == ';';
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    SpeciesTree parse() {
        const int root = subtree(true);
        skip_space();
        expect(';');
        skip_space();
        if (pos_ != s_.size()) fail("trailing characters after ';'");
        assign_taxa();

        // Children always precede their parent in pending_.
        TreeBuilder builder;
        std::vector<int> id(pending_.size(), -1);
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            const Pending& p = pending_[i];
            id[i] = p.left == -1 ? builder.add_leaf(p.length, p.label, p.taxon)
                                 : builder.add_internal(id[static_cast<std::size_t>(p.left)],
                                                        id[static_cast<std::size_t>(p.right)], p.length);
        }
        try {
            return builder.build(id[static_cast<std::size_t>(root)]);
        } catch (const DomainError& e) {
            throw ParseError(std::string("newick: ") + e.what());
        }
    }

private:
    struct Pending {
        int left = -1;
        int right = -1;
        double length = 0.0;
        std::string label;
        int taxon = -1;
    };

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("newick: " + msg + " at offset " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    void expect(char c) {
        if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    double length(bool is_root) {
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ':') {
            ++pos_;
            skip_space();
            double x = 0.0;
            auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), x);
            if (ec != std::errc{}) fail("bad branch length");
            pos_ = static_cast<std::size_t>(p - s_.data());
            return x;
        }
        if (!is_root) fail("missing branch length");
        return 0.0;
    }

    int subtree(bool is_root) {
        skip_space();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        Pending node;
        if (s_[pos_] == '(') {
            ++pos_;
            node.left = subtree(false);
            skip_space();
            expect(',');
            node.right = subtree(false);
            skip_space();
            if (pos_ < s_.size() && s_[pos_] == ',') fail("only binary trees are supported");
            expect(')');
            // Internal node labels are ignored.
            while (pos_ < s_.size() && !is_delimiter(s_[pos_])) ++pos_;
        } else {
            if (is_root) fail("tree needs at least two leaves");
            const std::size_t start = pos_;
            while (pos_ < s_.size() && !is_delimiter(s_[pos_])) ++pos_;
            if (pos_ == start) fail("empty leaf label");
            node.label = std::string(s_.substr(start, pos_ - start));
            leaves_.push_back(static_cast<int>(pending_.size()));
        }
        node.length = length(is_root);
        if (leaves_.size() > static_cast<std::size_t>(kMaxTaxa)) fail("too many leaves");
        pending_.push_back(std::move(node));
        return static_cast<int>(pending_.size()) - 1;
    }

    void assign_taxa() {
        const int k = static_cast<int>(leaves_.size());
        std::set<std::string_view> names;
        for (int leaf : leaves_)
            if (!names.insert(pending_[static_cast<std::size_t>(leaf)].label).second)
                fail("duplicate leaf label '" + pending_[static_cast<std::size_t>(leaf)].label + "'");
        std::vector<int> taxa(leaves_.size(), -1);
        std::vector<char> used(leaves_.size(), 0);
        bool numbered = true;
        for (std::size_t i = 0; i < leaves_.size() && numbered; ++i) {
            const std::string& lab = pending_[static_cast<std::size_t>(leaves_[i])].label;
            int t = -1;
            if (lab.size() >= 2 && lab[0] == 't' && (lab.size() == 2 || lab[1] != '0')) {
                auto [p, ec] = std::from_chars(lab.data() + 1, lab.data() + lab.size(), t);
                if (ec != std::errc{} || p != lab.data() + lab.size()) t = -1;
            }
            if (t < 0 || t >= k || used[static_cast<std::size_t>(t)]) {
                numbered = false;
            } else {
                used[static_cast<std::size_t>(t)] = 1;
                taxa[i] = t;
            }
        }
        for (std::size_t i = 0; i < leaves_.size(); ++i)
            pending_[static_cast<std::size_t>(leaves_[i])].taxon = numbered ? taxa[i] : static_cast<int>(i);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::vector<Pending> pending_;
    std::vector<int> leaves_;  // indices into pending_, in order of appearance
};

}  // namespace

std::string to_newick(const SpeciesTree& tree) {
    std::string out;
    write(tree, tree.root(), out);
    out += ';';
    return out;
}

SpeciesTree parse_newick(std::string_view text) {
    return Parser(text).parse();
}

}  // namespace bipcover
