#pragma once

#include <string>

#include "irw/term.hpp"

namespace irw {

// Canonical text form. Cycles fold back to μ-notation deterministically:
// binders are introduced at back-edge targets in DFS preorder (leftmost
// back-edge first) and named x, y, z, u, v, w, x1, ... avoiding names that
// already occur in the term. ⊥ prints as _|_.
std::string to_string(const PartialTerm& t);

}  // namespace irw
