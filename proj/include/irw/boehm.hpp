#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irw/reduction.hpp"
#include "irw/term.hpp"
#include "irw/trs.hpp"

namespace irw {

// Root-activeness is undecidable in general; verdicts carry explicit
// certificates and acceptance only trusts certified ones.
struct RaVerdict {
  enum Answer { Yes, No, Unknown } verdict = Unknown;
  enum Cert {
    FiniteStateGraph,  // full reduct exploration, every state reaches a root redex
    RootLoop,          // syntactic rhs-instance chain or concrete root-contraction loop
    RootStable,        // a reachable state whose root symbol heads no lhs
    DeadEnd,           // full exploration with a state reaching no root redex
    FuelExhausted
  } certificate = FuelExhausted;
  std::string detail;
  size_t states = 0;
};

// Explores the reduction state graph of canonical terms up to `fuel` states.
RaVerdict root_active(const Trs& trs, const PartialTerm& t, size_t fuel);

// Searches for a destructive reduction by repeatedly finding finite
// reductions to root redexes (Compression Lemma for destructive
// reductions); must agree with root_active on total terms.
RaVerdict fragile(const Trs& trs, const PartialTerm& t, size_t fuel);

// Membership of t in RA⊥: each ⊥ stands for a designated root-active
// witness (the choice is immaterial). For ⊥-free t this is root_active;
// t = ⊥ itself is excluded by definition.
RaVerdict in_ra_bot(const Trs& trs, const PartialTerm& t, size_t fuel,
                    const std::optional<PartialTerm>& witness = std::nullopt);

// First certified root-active term, synthesised from looping rules or found
// among the subterms of t. Deterministic order.
std::optional<PartialTerm> find_ra_witness(const Trs& trs, const PartialTerm& t,
                                           size_t fuel);

// One →⊥ step: the leftmost-outermost subterm certified in RA⊥ \ {⊥}
// becomes ⊥; nullopt if no certified occurrence exists within fuel.
std::optional<PartialTerm> boehm_step(
    const Trs& trs, const PartialTerm& t, size_t fuel,
    const std::optional<PartialTerm>& witness = std::nullopt);

struct BoehmResult {
  PartialTerm tree;
  uint32_t depth = 0;
  std::vector<Position> positions_unknown;
  size_t fuel_used = 0;
  bool fully_certified() const { return positions_unknown.empty(); }
};

// The unique Böhm-extension normal form to the given depth: alternate
// outermost R-normalisation (via certified limits) with collapse of
// certified RA⊥ subterms.
BoehmResult boehm_tree(const Trs& trs, const PartialTerm& t, uint32_t depth,
                       size_t fuel,
                       const std::optional<PartialTerm>& witness = std::nullopt);

struct PrsEqBohmReport {
  enum Status { Pass, Fail, Inconclusive } status = Inconclusive;
  std::string detail;
  PartialTerm p_limit;
  PartialTerm bohm;
};

// Runs strong_p_limit under `strat` (continuing with outermost stages while
// the limit is reducible) and independently boehm_tree; asserts truncation
// equality at `depth` when both sides are certified.
PrsEqBohmReport check_prs_eq_bohm(const Trs& trs, const PartialTerm& t,
                                  const StrategyDesc& strat, size_t budget,
                                  uint32_t depth, size_t fuel);

}  // namespace irw
