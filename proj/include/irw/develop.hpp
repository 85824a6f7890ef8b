#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irw/reduction.hpp"
#include "irw/term.hpp"
#include "irw/trs.hpp"

namespace irw {

// Occurrence sets: explicit positions plus node-closed designators
// ("@node:f" = every occurrence of every node labelled f). Node-closed sets
// may denote infinitely many positions on rational hosts; they are carried
// through reductions as labelled symbols (node marks).
struct OccurrenceSet {
  std::vector<Position> positions;
  std::vector<std::string> node_symbols;

  static OccurrenceSet parse(const std::string& text);
  std::string to_string() const;
  bool empty() const { return positions.empty() && node_symbols.empty(); }
};

// Marks the occurrences of u in t. Explicit positions are unrolled so each
// designates its own node. errors: occurrence-not-in-term, occurrence-at-⊥
// (and at variables: only function symbols can carry a label).
PartialTerm mark_occurrences(const PartialTerm& t, const OccurrenceSet& u,
                             uint8_t mark);
PartialTerm clear_marks(const PartialTerm& t, uint8_t mask);
bool has_marks(const PartialTerm& t, uint8_t mask);
// Occurrences of marked nodes up to depth_cap (node-closed sets can be
// infinite on cyclic hosts).
std::vector<Position> marked_positions(const PartialTerm& t, uint8_t mask,
                                       uint32_t depth_cap);

// ---------------------------------------------------------------------------
// Descendants / residuals

// Positional descendants through one recorded step.
std::vector<Position> descendants_step(const Trs& trs, const Step& step,
                                       const std::vector<Position>& u);

// Descendants through a recorded reduction; for certified open runs a
// position survives only if no step of the certified tail hits a prefix.
std::vector<Position> descendants(const Trs& trs, const Reduction& red,
                                  const std::vector<Position>& u);

// Labelling characterisation: lift the run to the labelled system and read
// the labelled positions of the final term. Must agree with descendants.
std::vector<Position> descendants_via_labels(const Trs& trs,
                                             const Reduction& red,
                                             const std::vector<Position>& u,
                                             uint32_t depth_cap = 64);

// Replay a recorded run on a marked origin (labelled lifting); returns the
// marked final term.
PartialTerm transport_marks(const Trs& trs, const Reduction& red,
                            const PartialTerm& marked_origin);

// No two occurrences overlap at a pattern position.
bool non_conflicting(const Trs& trs, const PartialTerm& t,
                     const OccurrenceSet& u);

// ---------------------------------------------------------------------------
// Paths, traces, matching terms

// Finite automaton presenting the U,R-paths of a rational host. States are
// host nodes (⊤-nodes) and rule rhs graph nodes tagged with their source
// redex node. Unlabelled states have exactly one outgoing silent edge;
// infinite silent walks are collapsing towers and denote ⊥.
struct PathAutomaton {
  struct State {
    bool top = true;
    uint32_t node = 0;   // host node (top) or rhs node (rhs states)
    size_t rule = 0;     // rhs states
    uint32_t source = 0; // rhs states: redex host node
    friend bool operator==(const State&, const State&) = default;
    friend auto operator<=>(const State&, const State&) = default;
  };
  // Per state: either a labelled node with indexed successors, a silent
  // state with one successor, or a leaf (⊥ / variable).
  struct Entry {
    State state;
    bool silent = false;
    std::string label;          // symbol or variable name; "_|_" for ⊥
    NodeKind label_kind = NodeKind::Bottom;
    uint8_t marks = 0;          // surviving marks (tracked sets minus developed)
    std::vector<size_t> next;   // indexed successors (labelled symbol states)
    size_t silent_next = 0;     // silent successor
  };
  std::vector<Entry> entries;
  size_t start = 0;

  std::string to_dot() const;
};

// The label projection of a path: node labels and edge indices, silent
// steps dropped.
using Trace = std::vector<std::pair<char, std::string>>;  // 'n' label / 'e' edge
std::string trace_to_string(const Trace& t);

PathAutomaton build_paths(const Trs& trs, const PartialTerm& t,
                          const OccurrenceSet& u);
// Traces of paths ending in a labelled node or silently cycling, up to the
// given count; maximal = not a proper prefix of another reported trace.
std::vector<Trace> automaton_traces(const PathAutomaton& a, size_t max_count);
std::vector<Trace> maximal_traces(const PathAutomaton& a, size_t max_count);

// The unique term matching the trace set (automaton quotient). Marks other
// than the developed set survive; the developed occurrences are consumed.
PartialTerm matching_term(const Trs& trs, const PartialTerm& t,
                          const OccurrenceSet& u);
// Marked variant: develops the kMarkA set of an already-marked host.
PartialTerm matching_term_marked(const Trs& trs, const PartialTerm& marked,
                                 uint8_t developed_mark);

// ---------------------------------------------------------------------------
// Complete developments

struct DevelopmentResult {
  Reduction reduction;
  LimitOutcome outcome;       // strong-p limit of the development
  PartialTerm final_term;     // outcome.limit (marks cleared)
};

// Parallel-outermost, left-to-right development of U; residual tracking via
// labels. The certified limit must equal matching_term(t, U).
DevelopmentResult complete_development(const Trs& trs, const PartialTerm& t,
                                       const OccurrenceSet& u, uint32_t depth,
                                       size_t budget = kDefaultBudget);

struct DiamondResult {
  PartialTerm t1, t2, join;
};
// t →U t1, t →V t2, then t1 →V/U join ←U/V t2.
DiamondResult diamond_join(const Trs& trs, const PartialTerm& t,
                           const OccurrenceSet& u, const OccurrenceSet& v,
                           uint32_t depth, size_t budget = kDefaultBudget);

struct StripResult {
  Reduction projection;            // S/T: the bottom row
  std::vector<Position> residuals; // U/S in the final term of S
  PartialTerm corner;              // final term of the projection
};
// Projects S over a complete development of the pairwise disjoint redex
// occurrences U (Infinitary Strip Lemma construction).
StripResult strip_project(const Trs& trs, const Reduction& s,
                          const OccurrenceSet& u, uint32_t depth_cap = 64);

}  // namespace irw
