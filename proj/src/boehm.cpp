#include "irw/boehm.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "irw/develop.hpp"
#include "irw/print.hpp"

namespace irw {

namespace {

void require_orthogonal(const Trs& trs) {
  if (!trs.orthogonal())
    fail("not-orthogonal", "root-activeness machinery needs orthogonality");
}

bool is_root_redex(const Trs& trs, const PartialTerm& t, size_t* rule = nullptr) {
  return is_redex_node(trs, t, t.root, rule);
}

bool root_stable_by_signature(const Trs& trs, const PartialTerm& t) {
  const Node& r = t.nodes[t.root];
  if (r.kind != NodeKind::Sym) return true;  // ⊥ and variables head no rule
  return !trs.lhs_heads().count(r.name);
}

PartialTerm contract_root(const Trs& trs, const PartialTerm& t, size_t rule) {
  return rewrite_step(trs, t, {}, trs.rule(rule));
}

// Exploration is bounded: states larger than this are not expanded (the
// exploration is then incomplete and cannot certify Yes).
constexpr size_t kStateSizeCap = 192;
constexpr size_t kOccurrenceCap = 64;

// Occurrences of a node up to a depth cap; complete=false when a cap was
// hit (the node may have infinitely many occurrences through a cycle).
// Walks only through nodes that reach the target.
std::vector<Position> node_occurrences(const PartialTerm& t, uint32_t target,
                                       uint32_t depth_cap, bool* complete) {
  std::vector<char> reach(t.nodes.size(), 0);
  reach[target] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (uint32_t i = 0; i < t.nodes.size(); ++i) {
      if (reach[i]) continue;
      for (uint32_t k : t.nodes[i].kids)
        if (reach[k]) {
          reach[i] = 1;
          changed = true;
          break;
        }
    }
  }
  std::vector<Position> out;
  bool truncated = false;
  std::function<void(uint32_t, Position&)> go = [&](uint32_t n, Position& p) {
    if (p.size() > depth_cap || out.size() > kOccurrenceCap) {
      truncated = true;
      return;
    }
    if (n == target) out.push_back(p);
    for (uint32_t i = 0; i < t.nodes[n].kids.size(); ++i) {
      if (!reach[t.nodes[n].kids[i]]) continue;
      p.push_back(i);
      go(t.nodes[n].kids[i], p);
      p.pop_back();
    }
  };
  Position p;
  if (reach[t.root]) go(t.root, p);
  if (complete) *complete = !truncated;
  return out;
}

// All one-step reducts; complete=false if any enumeration was capped.
std::vector<PartialTerm> all_reducts(const Trs& trs, const PartialTerm& t,
                                     bool* complete) {
  std::vector<PartialTerm> out;
  bool all_complete = true;
  if (t.nodes.size() > kStateSizeCap) {
    if (complete) *complete = false;
    return out;
  }
  const uint32_t cap = static_cast<uint32_t>(2 * t.nodes.size() + 2);
  for (auto& [node, rule] : node_redexes(trs, t)) {
    bool c = true;
    for (const Position& p : node_occurrences(t, node, cap, &c))
      out.push_back(rewrite_step(trs, t, p, trs.rule(rule)));
    all_complete = all_complete && c;
  }
  if (complete) *complete = all_complete;
  return out;
}

// Yes-certificate: the concrete root-contraction orbit revisits a state
// while every element is a root redex. Sound for orthogonal systems: inner
// steps cannot destroy the root pattern, so every reduct of an orbit
// element is root-reducible again.
bool orbit_recurrence(const Trs& trs, const PartialTerm& t, size_t fuel) {
  std::unordered_set<std::string> seen;
  PartialTerm cur = t;
  for (size_t i = 0; i < fuel; ++i) {
    size_t rule;
    if (!is_root_redex(trs, cur, &rule)) return false;
    if (!seen.insert(to_string(cur)).second) return true;
    cur = contract_root(trs, cur, rule);
  }
  return false;
}

// Syntactic root-loop: t is a redex of a rule from which an infinite
// rhs-instance chain starts.
bool syntactic_root_loop(const Trs& trs, const PartialTerm& t) {
  for (size_t i = 0; i < trs.rules().size(); ++i)
    if (trs.on_root_loop(i) && match_at(trs.rule(i).lhs, t, t.root))
      return true;
  return false;
}

}  // namespace

RaVerdict root_active(const Trs& trs, const PartialTerm& t, size_t fuel) {
  require_orthogonal(trs);
  RaVerdict v;
  PartialTerm start = canonicalize(t);

  if (syntactic_root_loop(trs, start)) {
    v.verdict = RaVerdict::Yes;
    v.certificate = RaVerdict::RootLoop;
    v.detail = "rhs re-matches a lhs along a rule cycle";
    return v;
  }
  if (orbit_recurrence(trs, start, std::min<size_t>(fuel, 256))) {
    v.verdict = RaVerdict::Yes;
    v.certificate = RaVerdict::RootLoop;
    v.detail = "root-contraction orbit recurs";
    return v;
  }

  // Breadth-first exploration of the reduct state graph.
  std::unordered_map<std::string, size_t> index;
  std::vector<PartialTerm> states{start};
  std::vector<std::vector<size_t>> succ;
  index[to_string(start)] = 0;
  bool complete = true;
  for (size_t i = 0; i < states.size(); ++i) {
    if (states.size() > fuel || (!complete && states.size() > 64)) {
      complete = false;
      break;
    }
    if (root_stable_by_signature(trs, states[i])) {
      v.verdict = RaVerdict::No;
      v.certificate = RaVerdict::RootStable;
      v.detail = "reachable root-stable state " + to_string(states[i]);
      v.states = states.size();
      return v;
    }
    succ.emplace_back();
    bool c = true;
    for (PartialTerm& r : all_reducts(trs, states[i], &c)) {
      const std::string key = to_string(r);
      auto [it, inserted] = index.emplace(key, states.size());
      if (inserted) states.push_back(std::move(r));
      succ[i].push_back(it->second);
    }
    complete = complete && c;
  }
  v.states = states.size();
  if (complete && succ.size() == states.size()) {
    // every state must reach a root redex
    std::vector<char> good(states.size(), 0);
    for (size_t i = 0; i < states.size(); ++i)
      if (is_root_redex(trs, states[i])) good[i] = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < states.size(); ++i) {
        if (good[i]) continue;
        for (size_t j : succ[i])
          if (good[j]) {
            good[i] = 1;
            changed = true;
            break;
          }
      }
    }
    if (std::all_of(good.begin(), good.end(), [](char c) { return c != 0; })) {
      v.verdict = RaVerdict::Yes;
      v.certificate = RaVerdict::FiniteStateGraph;
      v.detail = std::to_string(states.size()) + " states, all root-reducible";
      return v;
    }
    for (size_t i = 0; i < states.size(); ++i)
      if (!good[i]) {
        v.verdict = RaVerdict::No;
        v.certificate = RaVerdict::DeadEnd;
        v.detail = "state " + to_string(states[i]) + " reaches no root redex";
        return v;
      }
  }
  v.verdict = RaVerdict::Unknown;
  v.certificate = RaVerdict::FuelExhausted;
  return v;
}

RaVerdict fragile(const Trs& trs, const PartialTerm& t, size_t fuel) {
  require_orthogonal(trs);
  RaVerdict v;
  PartialTerm start = canonicalize(t);

  if (syntactic_root_loop(trs, start)) {
    v.verdict = RaVerdict::Yes;
    v.certificate = RaVerdict::RootLoop;
    v.detail = "rhs re-matches a lhs along a rule cycle";
    return v;
  }

  // Repeatedly find a finite reduction to a root redex, contract it, and
  // look for a state recurrence; the recurrence witnesses a destructive
  // reduction of length ω.
  std::unordered_set<std::string> stage_seen;
  PartialTerm cur = start;
  size_t remaining = fuel;
  for (size_t round = 0; round < 64; ++round) {
    if (!stage_seen.insert(to_string(cur)).second) {
      v.verdict = RaVerdict::Yes;
      v.certificate = RaVerdict::RootLoop;
      v.detail = "stage recurrence after " + std::to_string(round) + " root steps";
      return v;
    }
    // BFS for a reachable root redex.
    std::unordered_map<std::string, size_t> index;
    std::vector<PartialTerm> states{cur};
    index[to_string(cur)] = 0;
    std::optional<size_t> found;
    bool complete = true;
    for (size_t i = 0; i < states.size() && !found; ++i) {
      if (states.size() > remaining || i > remaining ||
          (!complete && states.size() > 64)) {
        complete = false;
        break;
      }
      size_t rule;
      if (is_root_redex(trs, states[i], &rule)) {
        found = i;
        break;
      }
      if (root_stable_by_signature(trs, states[i])) {
        v.verdict = RaVerdict::No;
        v.certificate = RaVerdict::RootStable;
        v.detail = "reachable root-stable state " + to_string(states[i]);
        return v;
      }
      bool c = true;
      for (PartialTerm& r : all_reducts(trs, states[i], &c)) {
        const std::string key = to_string(r);
        auto [it, inserted] = index.emplace(key, states.size());
        (void)it;
        if (inserted) states.push_back(std::move(r));
      }
      complete = complete && c;
    }
    if (!found) {
      if (complete) {
        v.verdict = RaVerdict::No;
        v.certificate = RaVerdict::DeadEnd;
        v.detail = "no root redex reachable";
      } else {
        v.verdict = RaVerdict::Unknown;
        v.certificate = RaVerdict::FuelExhausted;
      }
      return v;
    }
    remaining = remaining > states.size() ? remaining - states.size() : 0;
    if (remaining == 0) break;
    size_t rule;
    is_root_redex(trs, states[*found], &rule);
    cur = contract_root(trs, states[*found], rule);
  }
  v.verdict = RaVerdict::Unknown;
  v.certificate = RaVerdict::FuelExhausted;
  return v;
}

std::optional<PartialTerm> find_ra_witness(const Trs& trs, const PartialTerm& t,
                                           size_t fuel) {
  // Candidates synthesised from rules: μx. l[x/vars] for each rule on a
  // rhs-instance cycle or with a collapsing chain; then subterms of t.
  std::vector<PartialTerm> candidates;
  for (size_t i = 0; i < trs.rules().size(); ++i) {
    const Rule& r = trs.rule(i);
    TermBuilder b;
    const uint32_t self = b.reserve();
    std::function<uint32_t(uint32_t)> copy = [&](uint32_t n) -> uint32_t {
      const Node& node = r.lhs.nodes[n];
      if (node.kind == NodeKind::Var) return self;
      std::vector<uint32_t> kids;
      for (uint32_t k : node.kids) kids.push_back(copy(k));
      return b.sym(node.name, std::move(kids));
    };
    const uint32_t root = copy(r.lhs.root);
    b.redirect(self, root);
    candidates.push_back(b.finish(root));
  }
  PartialTerm ct = canonicalize(t);
  for (uint32_t n = 0; n < ct.nodes.size(); ++n) {
    if (ct.nodes[n].kind != NodeKind::Sym) continue;
    PartialTerm sub = ct;
    sub.root = n;
    candidates.push_back(canonicalize(sub));
  }
  for (const PartialTerm& c : candidates) {
    if (!is_total(c)) continue;
    if (root_active(trs, c, fuel).verdict == RaVerdict::Yes) return c;
  }
  return std::nullopt;
}

RaVerdict in_ra_bot(const Trs& trs, const PartialTerm& t, size_t fuel,
                    const std::optional<PartialTerm>& witness) {
  require_orthogonal(trs);
  PartialTerm ct = canonicalize(t);
  RaVerdict v;
  if (ct.nodes[ct.root].kind == NodeKind::Bottom) {
    // ⊥ itself is excluded from RA⊥ \ {⊥}.
    v.verdict = RaVerdict::No;
    v.certificate = RaVerdict::RootStable;
    v.detail = "_|_ is excluded by definition";
    return v;
  }
  if (is_total(ct)) return root_active(trs, ct, fuel);
  std::optional<PartialTerm> w = witness;
  if (!w) w = find_ra_witness(trs, ct, fuel);
  if (!w) {
    v.verdict = RaVerdict::Unknown;
    v.certificate = RaVerdict::FuelExhausted;
    v.detail = "no root-active witness found for _|_ instantiation";
    return v;
  }
  // Substitute every ⊥ with the witness; the choice is immaterial.
  TermBuilder b;
  const uint32_t base = b.import(ct);
  const uint32_t off = base - ct.root;
  const uint32_t wroot = b.import(*w);
  for (uint32_t i = 0; i < ct.nodes.size(); ++i)
    if (ct.nodes[i].kind == NodeKind::Bottom) b.redirect(off + i, wroot);
  return root_active(trs, b.finish(base), fuel);
}

std::optional<PartialTerm> boehm_step(const Trs& trs, const PartialTerm& t,
                                      size_t fuel,
                                      const std::optional<PartialTerm>& witness) {
  require_orthogonal(trs);
  PartialTerm ct = canonicalize(t);
  // Node-level verdicts memoized; the first (depth, leftmost) certified
  // occurrence is collapsed (outer occurrences absorb inner ones).
  std::map<uint32_t, bool> yes;
  auto certified = [&](uint32_t n) {
    auto it = yes.find(n);
    if (it != yes.end()) return it->second;
    PartialTerm sub = ct;
    sub.root = n;
    bool ok =
        in_ra_bot(trs, canonicalize(sub), fuel, witness).verdict == RaVerdict::Yes;
    yes[n] = ok;
    return ok;
  };
  std::deque<std::pair<uint32_t, Position>> queue{{ct.root, {}}};
  std::set<uint32_t> visited{ct.root};
  while (!queue.empty()) {
    auto [n, p] = queue.front();
    queue.pop_front();
    if (ct.nodes[n].kind == NodeKind::Sym && certified(n))
      return replace_at(ct, p, mk_bottom());
    for (uint32_t i = 0; i < ct.nodes[n].kids.size(); ++i) {
      const uint32_t k = ct.nodes[n].kids[i];
      if (visited.insert(k).second) {
        Position q = p;
        q.push_back(i);
        queue.emplace_back(k, std::move(q));
      }
    }
  }
  return std::nullopt;
}

BoehmResult boehm_tree(const Trs& trs, const PartialTerm& t, uint32_t depth,
                       size_t fuel, const std::optional<PartialTerm>& witness) {
  require_orthogonal(trs);
  BoehmResult res;
  res.depth = depth;
  PartialTerm cur = canonicalize(t);
  StrategyDesc outer;
  outer.kind = StrategyDesc::OutermostLeftmost;

  constexpr size_t kMaxRounds = 8;
  for (size_t round = 0; round < kMaxRounds; ++round) {
    bool changed = false;
    // collapse pass: →⊥-steps at certified RA⊥ occurrences
    for (size_t i = 0; i < 64; ++i) {
      auto next = boehm_step(trs, cur, fuel, witness);
      if (!next) break;
      cur = *next;
      changed = true;
    }
    // R pass: outermost normalisation via certified limits
    Reduction red = run(trs, cur, outer, kDefaultBudget);
    res.fuel_used += red.steps.size();
    LimitOutcome out = strong_p_limit(trs, red, depth);
    if (out.certificate == Certificate::BudgetExhausted) {
      for (auto& [p, verdict] : out.volatile_positions)
        if (verdict == Verdict::Suspected) res.positions_unknown.push_back(p);
      if (res.positions_unknown.empty()) res.positions_unknown.push_back({});
      res.tree = out.limit;
      return res;
    }
    if (!(out.limit == cur)) changed = true;
    cur = out.limit;
    if (!changed) break;
  }
  res.tree = cur;
  return res;
}

PrsEqBohmReport check_prs_eq_bohm(const Trs& trs, const PartialTerm& t,
                                  const StrategyDesc& strat, size_t budget,
                                  uint32_t depth, size_t fuel) {
  PrsEqBohmReport rep;
  BoehmResult bt = boehm_tree(trs, t, depth, fuel);
  rep.bohm = bt.tree;

  PartialTerm cur = canonicalize(t);
  StrategyDesc stage = strat;
  constexpr size_t kMaxStages = 8;
  LimitOutcome out;
  for (size_t stage_i = 0; stage_i < kMaxStages; ++stage_i) {
    Reduction red = run(trs, cur, stage, budget);
    out = strong_p_limit(trs, red, depth);
    if (out.certificate == Certificate::BudgetExhausted) {
      rep.status = PrsEqBohmReport::Inconclusive;
      rep.detail = "p-limit budget exhausted";
      rep.p_limit = out.limit;
      return rep;
    }
    cur = out.limit;
    if (!has_redex(trs, cur)) break;  // normal form reached
    stage.kind = StrategyDesc::OutermostLeftmost;  // continue ω·k stages
    stage.spine.clear();
    stage.script.clear();
  }
  rep.p_limit = cur;
  if (has_redex(trs, cur)) {
    rep.status = PrsEqBohmReport::Inconclusive;
    rep.detail = "p-limit is not a normal form within the stage budget";
    return rep;
  }
  if (!bt.fully_certified()) {
    rep.status = PrsEqBohmReport::Inconclusive;
    rep.detail = "Böhm tree has unknown positions";
    return rep;
  }
  if (truncate(cur, depth) == truncate(bt.tree, depth)) {
    rep.status = PrsEqBohmReport::Pass;
    rep.detail = "p-limit normal form matches the Böhm tree at depth " +
                 std::to_string(depth);
  } else {
    rep.status = PrsEqBohmReport::Fail;
    rep.detail = "p-limit " + to_string(cur) + " differs from Böhm tree " +
                 to_string(bt.tree);
  }
  return rep;
}

}  // namespace irw
