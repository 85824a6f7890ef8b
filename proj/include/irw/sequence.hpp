#pragma once

#include <optional>
#include <vector>

#include "irw/term.hpp"

namespace irw {

// A sequence of terms of length n (no tail) or ω (non-empty periodic tail).
struct TermSequence {
  std::vector<PartialTerm> prefix;
  std::vector<PartialTerm> tail;  // repeated forever when non-empty

  bool open() const { return !tail.empty(); }
  bool empty() const { return prefix.empty() && tail.empty(); }
};

// lub over n of the glb of all elements from index n on. For a closed
// sequence this is the last element; for a periodic tail it stabilises to
// the glb of the repeated block.
PartialTerm liminf(const TermSequence& seq);

// Metric limit; nullopt = diverges (the ω-sequence is not Cauchy).
std::optional<PartialTerm> metric_limit(const TermSequence& seq);

}  // namespace irw
