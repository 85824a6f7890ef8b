#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irw/term.hpp"
#include "irw/trs.hpp"

namespace irw {

// ---------------------------------------------------------------------------
// Recorded reductions

struct Step {
  PartialTerm before;
  Position position;
  size_t rule = 0;
  PartialTerm after;
  PartialTerm context;  // before[⊥]position
};

Step make_step(const Trs& trs, const PartialTerm& before, const Position& p,
               size_t rule);

struct StrategyDesc {
  enum Kind {
    OutermostLeftmost,
    InnermostLeftmost,
    ParallelOutermost,
    Alternating,
    Script,        // finite list of (position, rule)
    ScriptLoop,    // the list repeated forever
    DevelopMarked  // parallel-outermost rounds over kMarkA-marked redexes
  } kind = OutermostLeftmost;
  std::vector<Position> spine;  // Alternating: cycle through these cones
  std::vector<std::pair<Position, std::string>> script;

  static StrategyDesc parse(const std::string& text);
  std::string to_string() const;
};

struct CycleInfo {
  size_t start = 0;
  size_t period = 0;
};

struct Reduction {
  PartialTerm origin;
  std::vector<Step> steps;
  StrategyDesc strategy;
  size_t budget = 0;
  bool closed = false;  // the strategy yielded no further step
  std::optional<CycleInfo> cycle;
  std::vector<std::string> cursor_keys;  // cursor before each step
  std::string final_cursor;

  const PartialTerm& state(size_t i) const {
    return i < steps.size() ? steps[i].before
                            : (steps.empty() ? origin : steps.back().after);
  }
  const PartialTerm& final_term() const { return state(steps.size()); }
};

// Executes up to budget steps; stops early on normal form (w.r.t. the
// strategy). A recurrence of the canonical pair (term, cursor) is recorded
// as cycle (k, p); the run continues long enough for tail analysis. With
// stop_certified set, the run also stops as soon as the recorded prefix
// carries a periodic tail certificate (the ω-continuation is determined).
Reduction run(const Trs& trs, const PartialTerm& t, const StrategyDesc& strat,
              size_t budget, bool stop_certified = true);

// Continue the same strategy from the final state of a run.
Reduction continue_run(const Trs& trs, const Reduction& red,
                       const StrategyDesc& strat, size_t budget);

// Splice two runs; the first must be closed at the origin of the second.
Reduction concat_reductions(const Reduction& a, const Reduction& b);

// ---------------------------------------------------------------------------
// Tail certificates
//
// A finite engine must say what it established about the ω-tail of an open
// run. The periodic-tail certificate generalises a state cycle: the step
// (position, rule) pattern repeats with period p, where step positions are
// either fixed (certified volatile) or descend along a growing region
// ("hole track") whose per-period wrap is verified constant. Fixed holes
// and state cycles are the degenerate cases. The certificate is checked
// over three recorded blocks and re-verified by simulating one more.

struct HoleTrack {
  Position at;         // splice position in the final recorded state
  PartialTerm limit;   // wrap^ω when exact
  bool exact = false;
};

struct TailCertificate {
  enum Kind { Closed, Periodic, None } kind = None;
  size_t period = 0;
  size_t window_start = 0;  // first step index of the verified window
  std::vector<Position> volatile_positions;  // certified (fixed step positions)
  std::vector<HoleTrack> holes;
  bool all_exact = true;
  std::vector<Position> suspected;  // kind == None: recurring, uncertified
  // Descending step chains of the certified tail: (first future position,
  // per-period displacement). Every future step lies on one of these chains
  // or at a fixed volatile position.
  std::vector<std::pair<Position, Position>> future_chains;

  // A position is rewritten at or above by some step of the certified tail.
  bool tail_touches(const Position& p) const;
};

TailCertificate analyze_tail(const Trs& trs, const Reduction& red);

// ---------------------------------------------------------------------------
// Limits

enum class Certificate { ExactRational, DepthCertified, BudgetExhausted };
enum class Verdict { Certified, Suspected };
enum class LimitMode { StrongP, WeakP, StrongM, WeakM };

struct LimitOutcome {
  LimitMode mode = LimitMode::StrongP;
  bool defined = true;  // m-limits may diverge
  PartialTerm limit;
  Certificate certificate = Certificate::BudgetExhausted;
  uint32_t certified_depth = 0;  // meaningful for DepthCertified
  std::vector<std::pair<Position, Verdict>> volatile_positions;
  bool destructive = false;
};

LimitOutcome strong_p_limit(const Trs& trs, const Reduction& red, uint32_t depth);
LimitOutcome weak_p_limit(const Trs& trs, const Reduction& red, uint32_t depth);
LimitOutcome strong_m_limit(const Trs& trs, const Reduction& red, uint32_t depth);
LimitOutcome weak_m_limit(const Trs& trs, const Reduction& red, uint32_t depth);

std::vector<std::pair<Position, Verdict>> detect_volatile(const Trs& trs,
                                                          const Reduction& red);
std::vector<Position> outermost_volatile(
    const std::vector<std::pair<Position, Verdict>>& vol);

struct DestructiveVerdict {
  bool destructive = false;
  bool certified = false;
};
DestructiveVerdict is_destructive(const Trs& trs, const Reduction& red);

// ---------------------------------------------------------------------------
// Utilities

// Minimal positions at which s and t disagree; nullopt when that set is
// infinite (a disagreement sits under a product cycle).
std::optional<std::vector<Position>> min_diff(const PartialTerm& s,
                                              const PartialTerm& t);

// Guess-and-verify μ-folding: truncations[d] must be the depth-d truncation
// of the result for every provided d.
std::optional<PartialTerm> fold_rational(
    const std::vector<PartialTerm>& truncations);

// Search for a ≤ω reduction with the given strong-p limit (compression
// witness). Refuses on non-orthogonal systems.
struct CompressionResult {
  enum Status { Witness, Refused, Inconclusive } status = Inconclusive;
  std::string reason;
  std::optional<Reduction> witness;
};
CompressionResult compression_witness(const Trs& trs, const PartialTerm& origin,
                                      const PartialTerm& target, uint32_t depth,
                                      size_t budget);

// Suspicion threshold: a position stepped at least this often in the
// analysis window without a certificate is reported as suspected volatile.
constexpr size_t kSuspectThreshold = 16;

constexpr size_t kDefaultBudget = 1000;
constexpr uint32_t kDefaultDepth = 10;
constexpr size_t kDefaultFuel = 2000;

}  // namespace irw
