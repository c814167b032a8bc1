#pragma once

#include <string>
#include <string_view>

#include "bipcover/species_tree.hpp"

namespace bipcover {

// Branch lengths at 17 significant digits; no length on the root.
std::string to_newick(const SpeciesTree& tree);

// Rooted binary Newick with lengths on every non-root edge. Labels may be any
// run of characters other than whitespace and "(),:;". If the labels are
// exactly t0..t{k-1} in some order, leaf t<i> becomes taxon i; otherwise
// taxa follow order of appearance. Throws ParseError.
SpeciesTree parse_newick(std::string_view text);

}  // namespace bipcover
