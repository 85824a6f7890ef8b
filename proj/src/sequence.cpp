#include "irw/sequence.hpp"

namespace irw {

PartialTerm liminf(const TermSequence& seq) {
  if (seq.empty()) fail("empty-sequence", "liminf of empty sequence");
  if (!seq.open()) return canonicalize(seq.prefix.back());
  // From any index inside the tail the suffix runs through the whole block,
  // so glb-of-suffix equals glb(block) there; the lub over all suffixes is
  // reached once the prefix is consumed.
  return glb(seq.tail);
}

std::optional<PartialTerm> metric_limit(const TermSequence& seq) {
  if (seq.empty()) fail("empty-sequence", "metric limit of empty sequence");
  if (!seq.open()) return canonicalize(seq.prefix.back());
  PartialTerm first = canonicalize(seq.tail.front());
  for (size_t i = 1; i < seq.tail.size(); ++i)
    if (!(canonicalize(seq.tail[i]) == first)) return std::nullopt;
  return first;
}

}  // namespace irw
