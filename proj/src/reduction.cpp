#include "irw/reduction.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "irw/print.hpp"

namespace irw {

Step make_step(const Trs& trs, const PartialTerm& before, const Position& p,
               size_t rule) {
  Step s;
  s.before = before;
  s.position = p;
  s.rule = rule;
  s.after = rewrite_step(trs, before, p, trs.rule(rule));
  s.context = replace_at(before, p, mk_bottom());
  return s;
}

// ---------------------------------------------------------------------------
// Strategy descriptors

StrategyDesc StrategyDesc::parse(const std::string& text) {
  StrategyDesc d;
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i <= s.size()) {
      size_t j = s.find(sep, i);
      if (j == std::string::npos) j = s.size();
      out.push_back(s.substr(i, j - i));
      i = j + 1;
    }
    return out;
  };
  std::string head = text, args;
  if (size_t c = text.find(':'); c != std::string::npos) {
    head = text.substr(0, c);
    args = text.substr(c + 1);
  }
  if (head == "outermost" || head == "outermost-leftmost") {
    d.kind = OutermostLeftmost;
  } else if (head == "innermost" || head == "innermost-leftmost") {
    d.kind = InnermostLeftmost;
  } else if (head == "parallel-outermost" || head == "parallel") {
    d.kind = ParallelOutermost;
  } else if (head == "develop") {
    d.kind = DevelopMarked;
  } else if (head == "alternating") {
    d.kind = Alternating;
    if (args.empty()) fail("bad-strategy", "alternating needs positions");
    for (const std::string& p : split(args, ','))
      d.spine.push_back(position_from_string(p));
  } else if (head == "script" || head == "script-loop") {
    d.kind = head == "script" ? Script : ScriptLoop;
    if (args.empty()) fail("bad-strategy", "script needs steps");
    for (const std::string& item : split(args, ',')) {
      size_t at = item.find('@');
      if (at == std::string::npos)
        fail("bad-strategy", "script items are <position>@<rule>");
      d.script.emplace_back(position_from_string(item.substr(0, at)),
                            item.substr(at + 1));
    }
  } else {
    fail("bad-strategy", "unknown strategy '" + text + "'");
  }
  return d;
}

std::string StrategyDesc::to_string() const {
  switch (kind) {
    case OutermostLeftmost: return "outermost";
    case InnermostLeftmost: return "innermost";
    case ParallelOutermost: return "parallel-outermost";
    case DevelopMarked: return "develop";
    case Alternating: {
      std::string s = "alternating:";
      for (size_t i = 0; i < spine.size(); ++i) {
        if (i) s += ',';
        s += position_to_string(spine[i]);
      }
      return s;
    }
    case Script:
    case ScriptLoop: {
      std::string s = kind == Script ? "script:" : "script-loop:";
      for (size_t i = 0; i < script.size(); ++i) {
        if (i) s += ',';
        s += position_to_string(script[i].first) + "@" + script[i].second;
      }
      return s;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Strategy execution

namespace {

struct RedexInfo {
  std::vector<std::optional<size_t>> rule_of;  // first matching rule per node
  std::vector<char> reach;                     // node reaches a redex
  std::vector<char> kid_reach;                 // some kid subgraph reaches one
};

RedexInfo redex_info(const Trs& trs, const PartialTerm& t,
                     bool marked_only = false) {
  RedexInfo info;
  const size_t n = t.nodes.size();
  info.rule_of.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    if (marked_only && !(t.nodes[i].marks & kMarkA)) continue;
    size_t r;
    if (is_redex_node(trs, t, i, &r)) info.rule_of[i] = r;
  }
  info.reach.assign(n, 0);
  for (uint32_t i = 0; i < n; ++i)
    if (info.rule_of[i]) info.reach[i] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (uint32_t i = 0; i < n; ++i) {
      if (info.reach[i]) continue;
      for (uint32_t k : t.nodes[i].kids)
        if (info.reach[k]) {
          info.reach[i] = 1;
          changed = true;
          break;
        }
    }
  }
  info.kid_reach.assign(n, 0);
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t k : t.nodes[i].kids)
      if (info.reach[k]) info.kid_reach[i] = 1;
  return info;
}

constexpr size_t kSearchCap = 1u << 16;

// First (depth, then leftmost) redex at or below `cone`. BFS with a
// visited-node set: the first visit of a node happens along its
// (depth, leftmost)-minimal path, so the first redex node dequeued gives
// the minimal redex occurrence — linear in the graph even when sharing
// makes the position set exponential.
std::optional<std::pair<Position, size_t>> first_redex(const PartialTerm& t,
                                                       const RedexInfo& info,
                                                       const Position& cone,
                                                       bool innermost) {
  if (!in_domain(t, cone)) return std::nullopt;
  const uint32_t start = node_at(t, cone);
  if (!info.reach[start]) return std::nullopt;
  std::deque<std::pair<uint32_t, Position>> queue{{start, cone}};
  std::vector<char> seen(t.nodes.size(), 0);
  seen[start] = 1;
  std::optional<std::pair<Position, size_t>> fallback;
  while (!queue.empty()) {
    auto [n, p] = queue.front();
    queue.pop_front();
    if (info.rule_of[n]) {
      if (!innermost) return std::make_pair(p, *info.rule_of[n]);
      if (!info.kid_reach[n]) return std::make_pair(p, *info.rule_of[n]);
      if (!fallback) fallback = std::make_pair(p, *info.rule_of[n]);
    }
    const Node& node = t.nodes[n];
    for (uint32_t i = 0; i < node.kids.size(); ++i) {
      const uint32_t k = node.kids[i];
      if (!info.reach[k] || seen[k]) continue;
      seen[k] = 1;
      Position q = p;
      q.push_back(i);
      queue.emplace_back(k, std::move(q));
    }
  }
  // Cyclic self-containment can leave no innermost redex; fall back to the
  // shallowest occurrence.
  return fallback;
}

// Outermost redex positions (no redex above them), (depth, leftmost) order.
// Both the round size and the search are capped: on heavily shared graphs
// the full occurrence set can be exponential, so a round contracts at most
// `cap` of its leftmost members.
std::vector<std::pair<Position, size_t>> outermost_set(const PartialTerm& t,
                                                       const RedexInfo& info,
                                                       size_t cap) {
  std::vector<std::pair<Position, size_t>> out;
  if (!info.reach[t.root]) return out;
  std::deque<std::pair<uint32_t, Position>> queue{{t.root, {}}};
  size_t visited = 0;
  while (!queue.empty() && out.size() < cap) {
    auto [n, p] = queue.front();
    queue.pop_front();
    if (++visited > kSearchCap) break;  // partial round on pathological DAGs
    if (info.rule_of[n]) {
      out.emplace_back(p, *info.rule_of[n]);
      continue;  // outermost: do not descend into a redex
    }
    const Node& node = t.nodes[n];
    for (uint32_t i = 0; i < node.kids.size(); ++i) {
      if (!info.reach[node.kids[i]]) continue;
      Position q = p;
      q.push_back(i);
      queue.emplace_back(node.kids[i], std::move(q));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Runner {
  const Trs& trs;
  StrategyDesc strat;
  PartialTerm state;
  size_t cursor = 0;                  // alternating / script position
  std::vector<Position> pending;      // parallel-outermost round

  Runner(const Trs& t, StrategyDesc s, PartialTerm st)
      : trs(t), strat(std::move(s)), state(std::move(st)) {}

  std::string cursor_key() const {
    switch (strat.kind) {
      case StrategyDesc::Alternating:
      case StrategyDesc::Script:
      case StrategyDesc::ScriptLoop:
        return std::to_string(cursor);
      case StrategyDesc::ParallelOutermost:
      case StrategyDesc::DevelopMarked: {
        std::string s;
        for (const Position& p : pending) s += position_to_string(p) + ";";
        return s;
      }
      default:
        return "";
    }
  }

  // Chooses the next contraction and advances cursor state (not the term).
  std::optional<std::pair<Position, size_t>> choose() {
    RedexInfo info =
        redex_info(trs, state, strat.kind == StrategyDesc::DevelopMarked);
    switch (strat.kind) {
      case StrategyDesc::OutermostLeftmost:
        return first_redex(state, info, {}, false);
      case StrategyDesc::InnermostLeftmost:
        return first_redex(state, info, {}, true);
      case StrategyDesc::DevelopMarked:
      case StrategyDesc::ParallelOutermost: {
        const bool marked = strat.kind == StrategyDesc::DevelopMarked;
        while (true) {
          if (pending.empty()) {
            auto set = outermost_set(state, info, 64);
            if (set.empty()) return std::nullopt;
            for (auto& [p, r] : set) pending.push_back(p);
          }
          Position p = pending.front();
          pending.erase(pending.begin());
          if (!in_domain(state, p)) continue;
          const uint32_t n = node_at(state, p);
          if (marked && !(state.nodes[n].marks & kMarkA)) continue;
          size_t r;
          if (is_redex_node(trs, state, n, &r)) return std::make_pair(p, r);
        }
      }
      case StrategyDesc::Alternating: {
        for (size_t k = 0; k < strat.spine.size(); ++k) {
          const size_t idx = (cursor + k) % strat.spine.size();
          auto found = first_redex(state, info, strat.spine[idx], false);
          if (found) {
            cursor = (idx + 1) % strat.spine.size();
            return found;
          }
        }
        return std::nullopt;
      }
      case StrategyDesc::Script:
      case StrategyDesc::ScriptLoop: {
        if (cursor >= strat.script.size()) {
          if (strat.kind == StrategyDesc::Script) return std::nullopt;
          cursor = 0;
        }
        const auto& [p, rule_id] = strat.script[cursor];
        auto idx = trs.rule_index(rule_id);
        if (!idx)
          fail("not-a-redex", "script: unknown rule '" + rule_id + "'");
        if (!in_domain(state, p) ||
            !match_at(trs.rule(*idx).lhs, state, node_at(state, p)))
          fail("not-a-redex", "script step " + std::to_string(cursor) +
                                  ": no " + rule_id + "-redex at " +
                                  position_to_string(p));
        if (strat.kind == StrategyDesc::ScriptLoop)
          cursor = (cursor + 1) % strat.script.size();
        else
          ++cursor;
        return std::make_pair(p, *idx);
      }
    }
    return std::nullopt;
  }
};

std::string state_key(const PartialTerm& t, const std::string& cursor) {
  return to_string(t) + "|" + cursor;
}

bool has_periodic_certificate(const Trs& trs, const Reduction& red);

}  // namespace

Reduction run(const Trs& trs, const PartialTerm& t, const StrategyDesc& strat,
              size_t budget, bool stop_certified) {
  Reduction red;
  red.origin = canonicalize(t);
  red.strategy = strat;
  red.budget = budget;

  Runner r(trs, strat, red.origin);
  std::unordered_map<std::string, size_t> seen;
  seen[state_key(r.state, r.cursor_key())] = 0;
  size_t stop_at = budget;
  for (size_t i = 0; i < stop_at; ++i) {
    const std::string key_before = r.cursor_key();
    auto choice = r.choose();
    if (!choice) {
      red.closed = true;
      break;
    }
    Step s = make_step(trs, r.state, choice->first, choice->second);
    r.state = s.after;
    red.cursor_keys.push_back(key_before);
    red.steps.push_back(std::move(s));
    // Engine resource bound alongside the step budget: duplicating rules
    // can grow states without bound.
    if (r.state.nodes.size() > 20000) break;
    const std::string key = state_key(r.state, r.cursor_key());
    auto [it, inserted] = seen.emplace(key, i + 1);
    if (!inserted && !red.cycle) {
      red.cycle = CycleInfo{it->second, i + 1 - it->second};
      // Keep enough of the tail recorded for certificate analysis.
      stop_at = std::min(budget, red.cycle->start + 4 * red.cycle->period + 2);
    }
    // Stop as soon as the tail is determined: everything after this point
    // is implied by the certificate.
    if (stop_certified && (i + 1) % 16 == 0 && i + 1 < stop_at) {
      red.final_cursor = r.cursor_key();
      if (has_periodic_certificate(trs, red)) break;
    }
  }
  red.final_cursor = r.cursor_key();
  return red;
}

Reduction continue_run(const Trs& trs, const Reduction& red,
                       const StrategyDesc& strat, size_t budget) {
  return run(trs, red.final_term(), strat, budget);
}

Reduction concat_reductions(const Reduction& a, const Reduction& b) {
  if (!a.closed) fail("not-closed", "concat: first reduction is open");
  if (!(a.final_term() == b.origin))
    fail("not-composable", "concat: end term differs from next origin");
  Reduction out = a;
  out.closed = b.closed;
  out.strategy = b.strategy;
  out.cycle = b.cycle;
  if (out.cycle) out.cycle->start += a.steps.size();
  out.steps.insert(out.steps.end(), b.steps.begin(), b.steps.end());
  out.cursor_keys.insert(out.cursor_keys.end(), b.cursor_keys.begin(),
                         b.cursor_keys.end());
  out.final_cursor = b.final_cursor;
  out.budget = a.budget + b.budget;
  return out;
}

// ---------------------------------------------------------------------------
// Minimal disagreement positions

std::optional<std::vector<Position>> min_diff(const PartialTerm& s,
                                              const PartialTerm& t) {
  using Pair = std::pair<uint32_t, uint32_t>;
  if (s.nodes.size() * t.nodes.size() > 300000)
    fail("diff-explosion", "disagreement analysis too large");
  std::map<Pair, std::vector<Pair>> kids;
  std::set<Pair> diff;
  {
    std::deque<Pair> queue{{s.root, t.root}};
    std::set<Pair> seen{{s.root, t.root}};
    while (!queue.empty()) {
      Pair pr = queue.front();
      queue.pop_front();
      const Node& a = s.nodes[pr.first];
      const Node& b = t.nodes[pr.second];
      if (!same_node_label(a, b)) {
        diff.insert(pr);
        continue;
      }
      auto& ks = kids[pr];
      for (size_t i = 0; i < a.kids.size(); ++i) {
        Pair c{a.kids[i], b.kids[i]};
        ks.push_back(c);
        if (seen.insert(c).second) queue.push_back(c);
      }
    }
  }
  // dirty = pairs from which a disagreement is reachable
  std::set<Pair> dirty = diff;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [pr, ks] : kids) {
      if (dirty.count(pr)) continue;
      for (Pair c : ks)
        if (dirty.count(c)) {
          dirty.insert(pr);
          changed = true;
          break;
        }
    }
  }
  Pair root{s.root, t.root};
  if (!dirty.count(root)) return std::vector<Position>{};
  // A cycle within the dirty region means infinitely many disagreement
  // positions.
  {
    std::map<Pair, int> color;  // 0 white, 1 grey, 2 black
    bool cyclic = false;
    std::function<void(Pair)> dfs = [&](Pair pr) {
      color[pr] = 1;
      auto it = kids.find(pr);
      if (it != kids.end())
        for (Pair c : it->second) {
          if (!dirty.count(c)) continue;
          int col = color.count(c) ? color[c] : 0;
          if (col == 1) cyclic = true;
          if (col == 0) dfs(c);
        }
      color[pr] = 2;
    };
    dfs(root);
    if (cyclic) return std::nullopt;
  }
  // Positional enumeration through the (acyclic) dirty region.
  std::vector<Position> out;
  constexpr size_t kCap = 4096;
  std::function<void(Pair, Position&)> walk = [&](Pair pr, Position& p) {
    if (out.size() > kCap) fail("diff-explosion", "too many disagreements");
    if (diff.count(pr)) {
      out.push_back(p);
      return;
    }
    auto it = kids.find(pr);
    if (it == kids.end()) return;
    for (size_t i = 0; i < it->second.size(); ++i) {
      if (!dirty.count(it->second[i])) continue;
      p.push_back(static_cast<uint32_t>(i));
      walk(it->second[i], p);
      p.pop_back();
    }
  };
  Position p;
  walk(root, p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Periodic tail certificate

namespace {

// wrap^ω: `wrap` with the subterm at `hole` looped back to the root.
PartialTerm fold_loop(const PartialTerm& wrap, const Position& hole) {
  if (hole.empty()) fail("internal", "fold_loop: empty hole");
  TermBuilder b;
  const uint32_t base = b.import(wrap);
  const uint32_t off = base - wrap.root;
  std::vector<uint32_t> spine;
  uint32_t cur = wrap.root;
  for (uint32_t i : hole) {
    spine.push_back(cur);
    cur = wrap.nodes[cur].kids[i];
  }
  std::vector<uint32_t> fresh(hole.size());
  for (size_t i = 0; i < hole.size(); ++i) fresh[i] = b.reserve();
  for (size_t i = 0; i < hole.size(); ++i) {
    const Node& orig = wrap.nodes[spine[i]];
    std::vector<uint32_t> ks;
    for (uint32_t j = 0; j < orig.kids.size(); ++j) {
      if (j == hole[i])
        ks.push_back(i + 1 < hole.size() ? fresh[i + 1] : fresh[0]);
      else
        ks.push_back(off + orig.kids[j]);
    }
    b.fill_sym(fresh[i], orig.name, std::move(ks), orig.marks);
  }
  return b.finish(fresh[0]);
}

PartialTerm mask_at(const PartialTerm& t, const Position& p) {
  return replace_at(t, p, mk_sym("\001hole", {}));
}

struct Track {
  Position u0, u1, u2;  // hole positions across the three transitions
  Position delta;       // per-period displacement (empty = fixed position)
  PartialTerm limit;    // wrap^ω
};

// Find q ≠ ε with mid|q == old and new_|q == mid (content grows by a
// constant top wrap); the limit is then wrap^ω. The search walks only
// branches that reach a node whose subterm equals old.
std::optional<Position> growth_occurrence(const PartialTerm& old_,
                                          const PartialTerm& mid,
                                          const PartialTerm& new_) {
  std::vector<char> is_old(mid.nodes.size(), 0);
  for (uint32_t n = 0; n < mid.nodes.size(); ++n) {
    PartialTerm sub = mid;
    sub.root = n;
    if (canonicalize(sub) == old_) is_old[n] = 1;
  }
  std::vector<char> reach = is_old;
  bool changed = true;
  while (changed) {
    changed = false;
    for (uint32_t n = 0; n < mid.nodes.size(); ++n) {
      if (reach[n]) continue;
      for (uint32_t k : mid.nodes[n].kids)
        if (reach[k]) {
          reach[n] = 1;
          changed = true;
          break;
        }
    }
  }
  if (!reach[mid.root]) return std::nullopt;
  std::deque<std::pair<uint32_t, Position>> queue{{mid.root, {}}};
  size_t visited = 0;
  while (!queue.empty()) {
    auto [n, p] = queue.front();
    queue.pop_front();
    if (++visited > 4096 || p.size() > 64) break;
    if (!p.empty() && is_old[n]) {
      if (in_domain(new_, p) && subterm_at(new_, p) == mid) return p;
    }
    const Node& node = mid.nodes[n];
    for (uint32_t i = 0; i < node.kids.size(); ++i) {
      if (!reach[node.kids[i]]) continue;
      Position q = p;
      q.push_back(i);
      queue.emplace_back(node.kids[i], std::move(q));
    }
  }
  return std::nullopt;
}

struct PeriodicAnalysis {
  size_t period;
  size_t window_start;
  std::vector<Position> volatile_positions;
  std::vector<Track> tracks;
  std::vector<Position> slot_delta;  // per-slot displacement
  std::vector<std::pair<Position, Position>> future_chains;
};

std::optional<PeriodicAnalysis> try_period(const Trs& trs, const Reduction& red,
                                           size_t p) {
  const size_t M = red.steps.size();
  if (3 * p > M) return std::nullopt;
  const size_t A = M - 3 * p, B = M - 2 * p, C = M - p;

  // 1. step pattern: rules repeat; positions repeat with a constant
  //    per-slot displacement.
  std::vector<Position> delta(p);
  for (size_t j = 0; j < p; ++j) {
    const Step& s0 = red.steps[A + j];
    const Step& s1 = red.steps[B + j];
    const Step& s2 = red.steps[C + j];
    if (s0.rule != s1.rule || s1.rule != s2.rule) return std::nullopt;
    if (!is_prefix(s0.position, s1.position)) return std::nullopt;
    delta[j] = strip_prefix(s0.position, s1.position);
    if (!(s2.position == concat(s1.position, delta[j]))) return std::nullopt;
  }
  if (red.cursor_keys[A] != red.cursor_keys[B] ||
      red.cursor_keys[B] != red.cursor_keys[C])
    return std::nullopt;

  const PartialTerm& T0 = red.state(A);
  const PartialTerm& T1 = red.state(B);
  const PartialTerm& T2 = red.state(C);
  const PartialTerm& T3 = red.state(M);

  auto d1 = min_diff(T0, T1);
  auto d2 = min_diff(T1, T2);
  auto d3 = min_diff(T2, T3);
  if (!d1 || !d2 || !d3) return std::nullopt;
  if (d1->size() != d2->size() || d2->size() != d3->size()) return std::nullopt;

  // 2. pair the disagreement positions into tracks with constant
  //    displacement.
  std::vector<Track> tracks;
  {
    std::vector<bool> used(d2->size(), false);
    for (const Position& u0 : *d1) {
      int found = -1;
      for (size_t i = 0; i < d2->size(); ++i) {
        if (!used[i] && is_prefix(u0, (*d2)[i])) {
          if (found >= 0) return std::nullopt;  // ambiguous pairing
          found = static_cast<int>(i);
        }
      }
      if (found < 0) return std::nullopt;
      used[found] = true;
      Track tr;
      tr.u0 = u0;
      tr.u1 = (*d2)[found];
      tr.delta = strip_prefix(u0, tr.u1);
      tr.u2 = concat(tr.u1, tr.delta);
      if (!std::count(d3->begin(), d3->end(), tr.u2)) return std::nullopt;
      tracks.push_back(std::move(tr));
    }
    if (tracks.size() != d3->size()) return std::nullopt;
  }

  // 3. per-track growth verification.
  for (Track& tr : tracks) {
    try {
      if (tr.delta.empty()) {
        // Content at a fixed position must grow by a constant top wrap.
        PartialTerm z1 = subterm_at(T1, tr.u0);
        PartialTerm z2 = subterm_at(T2, tr.u0);
        PartialTerm z3 = subterm_at(T3, tr.u0);
        auto q = growth_occurrence(z1, z2, z3);
        if (!q) return std::nullopt;
        tr.limit = fold_loop(z3, *q);
      } else {
        PartialTerm w1 = subterm_at(T1, tr.u0);
        PartialTerm w2 = subterm_at(T2, tr.u1);
        PartialTerm w3 = subterm_at(T3, tr.u2);
        if (!(mask_at(w1, tr.delta) == mask_at(w2, tr.delta)) ||
            !(mask_at(w2, tr.delta) == mask_at(w3, tr.delta)))
          return std::nullopt;
        // The receding core must be literally stable.
        PartialTerm z1 = subterm_at(T1, tr.u1);
        PartialTerm z2 = subterm_at(T2, tr.u2);
        PartialTerm z3 = subterm_at(T3, concat(tr.u2, tr.delta));
        if (!(z1 == z2) || !(z2 == z3)) return std::nullopt;
        tr.limit = fold_loop(w3, tr.delta);
      }
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  // 4. step/track interaction: fixed steps never inspect a growing region;
  //    moving steps ride one.
  for (size_t i = A; i < M; ++i) {
    const size_t j = (i - A) % p;
    const Step& st = red.steps[i];
    if (delta[j].empty()) {
      for (const Position& q : trs.rule(st.rule).pattern_positions) {
        const Position probe = concat(st.position, q);
        for (const Track& tr : tracks)
          if (is_prefix(tr.u0, probe)) return std::nullopt;
      }
    } else {
      bool riding = false;
      for (const Track& tr : tracks)
        if (is_prefix(tr.u0, st.position)) riding = true;
      if (!riding) return std::nullopt;
    }
  }

  // 5. volatile positions: the fixed step positions of a block.
  std::set<Position> vol;
  for (size_t j = 0; j < p; ++j)
    if (delta[j].empty()) vol.insert(red.steps[C + j].position);

  // 6. predictive verification: one more block must replay the pattern and
  //    extend every track by exactly its displacement.
  {
    // A finite script does not determine an ω-continuation.
    if (red.strategy.kind == StrategyDesc::Script) return std::nullopt;
    Runner r(trs, red.strategy, T3);
    if (red.strategy.kind == StrategyDesc::Alternating ||
        red.strategy.kind == StrategyDesc::ScriptLoop) {
      if (red.final_cursor.empty() ||
          red.final_cursor.find_first_not_of("0123456789") != std::string::npos)
        return std::nullopt;
      r.cursor = static_cast<size_t>(std::stoul(red.final_cursor));
    } else if (red.strategy.kind == StrategyDesc::ParallelOutermost ||
               red.strategy.kind == StrategyDesc::DevelopMarked) {
      r.pending.clear();
      std::string key = red.final_cursor;
      size_t pos = 0;
      while ((pos = key.find(';')) != std::string::npos) {
        if (pos > 0) r.pending.push_back(position_from_string(key.substr(0, pos)));
        key.erase(0, pos + 1);
      }
    }
    PartialTerm cur = T3;
    for (size_t j = 0; j < p; ++j) {
      auto choice = r.choose();
      if (!choice) return std::nullopt;
      if (choice->second != red.steps[C + j].rule) return std::nullopt;
      const Position expect = concat(red.steps[C + j].position, delta[j]);
      if (!(choice->first == expect)) return std::nullopt;
      Step s = make_step(trs, r.state, choice->first, choice->second);
      r.state = s.after;
      cur = s.after;
    }
    auto d4 = min_diff(T3, cur);
    if (!d4) return std::nullopt;
    std::vector<Position> expect;
    for (const Track& tr : tracks)
      expect.push_back(tr.delta.empty() ? tr.u0 : concat(tr.u2, tr.delta));
    std::sort(expect.begin(), expect.end());
    if (!(*d4 == expect)) return std::nullopt;
  }

  PeriodicAnalysis out;
  out.period = p;
  out.window_start = A;
  out.volatile_positions.assign(vol.begin(), vol.end());
  out.tracks = std::move(tracks);
  for (size_t j = 0; j < p; ++j)
    if (!delta[j].empty())
      out.future_chains.emplace_back(concat(red.steps[C + j].position, delta[j]),
                                     delta[j]);
  out.slot_delta = std::move(delta);
  return out;
}

constexpr size_t kMaxPeriod = 24;

std::optional<PeriodicAnalysis> periodic_analysis(const Trs& trs,
                                                  const Reduction& red) {
  for (size_t p = 1; p <= kMaxPeriod && 3 * p <= red.steps.size(); ++p) {
    try {
      auto res = try_period(trs, red, p);
      if (res) return res;
    } catch (const std::exception&) {
      // oversized diff/search or malformed cursor: try the next period
    }
  }
  return std::nullopt;
}

bool has_periodic_certificate(const Trs& trs, const Reduction& red) {
  return periodic_analysis(trs, red).has_value();
}

std::vector<Position> suspected_positions(const Reduction& red) {
  std::map<Position, size_t> count;
  const size_t M = red.steps.size();
  for (size_t i = M / 2; i < M; ++i) ++count[red.steps[i].position];
  std::vector<Position> out;
  for (auto& [p, c] : count)
    if (c >= kSuspectThreshold) out.push_back(p);
  return out;
}

}  // namespace

bool TailCertificate::tail_touches(const Position& p) const {
  for (const Position& v : volatile_positions)
    if (is_prefix(v, p)) return true;
  for (const auto& [w0, delta] : future_chains) {
    Position w = w0;
    while (w.size() <= p.size()) {
      if (is_prefix(w, p)) return true;
      w = concat(w, delta);
    }
  }
  return false;
}

TailCertificate analyze_tail(const Trs& trs, const Reduction& red) {
  TailCertificate cert;
  if (red.closed) {
    cert.kind = TailCertificate::Closed;
    return cert;
  }
  if (auto pa = periodic_analysis(trs, red)) {
    cert.kind = TailCertificate::Periodic;
    cert.period = pa->period;
    cert.window_start = pa->window_start;
    cert.volatile_positions = pa->volatile_positions;
    for (const Track& tr : pa->tracks)
      cert.holes.push_back(HoleTrack{tr.u2, tr.limit, true});
    cert.all_exact = true;
    cert.future_chains = pa->future_chains;
    return cert;
  }
  cert.kind = TailCertificate::None;
  cert.suspected = suspected_positions(red);
  return cert;
}

// ---------------------------------------------------------------------------
// Frontier certificate: all future contraction depths provably stay below
// `depth`, without requiring periodicity. Sound conditions: starting from
// the fireable-rule closure F of the final state, every rule in F is
// non-collapsing with a contractum root that can never head a redex, and
// every position of the final state at depth <= `depth` carries a symbol
// that heads no rule in F and is above every current redex.

namespace {

bool frontier_certified(const Trs& trs, const PartialTerm& t, uint32_t depth) {
  std::set<std::string> symbols;
  for (const Node& n : t.nodes)
    if (n.kind == NodeKind::Sym) symbols.insert(n.name);
  bool grown = true;
  std::set<size_t> fireable;
  while (grown) {
    grown = false;
    for (size_t i = 0; i < trs.rules().size(); ++i) {
      if (fireable.count(i)) continue;
      const Rule& r = trs.rule(i);
      if (!symbols.count(r.lhs.nodes[r.lhs.root].name)) continue;
      fireable.insert(i);
      grown = true;
      for (const Node& n : r.rhs.nodes)
        if (n.kind == NodeKind::Sym) symbols.insert(n.name);
    }
  }
  std::set<std::string> fire_heads;
  for (size_t i : fireable)
    fire_heads.insert(trs.rule(i).lhs.nodes[trs.rule(i).lhs.root].name);
  for (size_t i : fireable) {
    const Rule& r = trs.rule(i);
    if (r.collapsing) return false;
    if (fire_heads.count(r.rhs.nodes[r.rhs.root].name)) return false;
  }
  // Every node occurring at depth <= `depth` must be dead (its symbol heads
  // no fireable rule). Min occurrence depth per node by BFS.
  std::vector<uint32_t> min_depth(t.nodes.size(), kDepthInf);
  std::deque<std::pair<uint32_t, uint32_t>> queue{{t.root, 0}};
  min_depth[t.root] = 0;
  while (!queue.empty()) {
    auto [n, d] = queue.front();
    queue.pop_front();
    if (d >= depth) continue;
    for (uint32_t k : t.nodes[n].kids)
      if (min_depth[k] == kDepthInf) {
        min_depth[k] = d + 1;
        queue.emplace_back(k, d + 1);
      }
  }
  for (uint32_t n = 0; n < t.nodes.size(); ++n) {
    if (min_depth[n] > depth) continue;
    const Node& node = t.nodes[n];
    if (node.kind == NodeKind::Sym && fire_heads.count(node.name)) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Limits

namespace {

std::vector<Position> minimal_positions(std::vector<Position> v) {
  std::sort(v.begin(), v.end());
  std::vector<Position> out;
  for (const Position& p : v) {
    bool covered = false;
    for (const Position& q : out)
      if (is_prefix(q, p)) covered = true;
    if (!covered) out.push_back(p);
  }
  return out;
}

// Exact strong-p limit for a periodic tail: final state, growing regions
// replaced by their wrap^ω limits, outermost-volatile positions by ⊥.
PartialTerm assemble_strong_p(const Reduction& red, const TailCertificate& cert) {
  PartialTerm limit = red.final_term();
  for (const HoleTrack& h : cert.holes)
    if (in_domain(limit, h.at)) limit = replace_at(limit, h.at, h.limit);
  for (const Position& v : minimal_positions(cert.volatile_positions))
    limit = replace_at(limit, v, mk_bottom());
  return limit;
}

// Phase states of the last block with growing regions replaced by their
// limits; the weak p-limit is their glb, and the weak m-limit is defined
// iff they are all equal.
std::vector<PartialTerm> assemble_phases(const Reduction& red,
                                         const TailCertificate& cert) {
  const size_t M = red.steps.size();
  const size_t p = cert.period;
  std::vector<PartialTerm> phases;
  for (size_t j = 0; j < p; ++j) {
    PartialTerm s = red.state(M - p + j);
    const PartialTerm& prev = red.state(M - 2 * p + j);
    auto dj = min_diff(prev, s);
    if (dj) {
      for (const Position& d : *dj) {
        for (const HoleTrack& h : cert.holes) {
          // A phase disagreement inside a track is a frontier position of
          // that track; the tail limit there is the self-similar wrap^ω.
          Position anchor = h.at;
          // earliest track anchor = h.at minus two displacements is not
          // stored; prefix match against the track's splice position or any
          // of its ancestors on the same chain is approximated by testing
          // both directions.
          if (is_prefix(anchor, d) || is_prefix(d, anchor)) {
            if (in_domain(s, d)) s = replace_at(s, d, h.limit);
            break;
          }
        }
      }
    }
    phases.push_back(s);
  }
  return phases;
}

LimitOutcome budget_outcome(LimitMode mode, const Trs& trs, const Reduction& red,
                            uint32_t depth) {
  LimitOutcome out;
  out.mode = mode;
  out.defined = true;
  if (frontier_certified(trs, red.final_term(), depth) &&
      (mode == LimitMode::StrongP || mode == LimitMode::WeakP ||
       mode == LimitMode::WeakM)) {
    out.limit = truncate(red.final_term(), depth);
    out.certificate = Certificate::DepthCertified;
    out.certified_depth = depth;
    return out;
  }
  out.limit = truncate(red.final_term(), depth);
  out.certificate = Certificate::BudgetExhausted;
  out.certified_depth = 0;
  for (const Position& p : suspected_positions(red))
    out.volatile_positions.emplace_back(p, Verdict::Suspected);
  return out;
}

}  // namespace

std::vector<std::pair<Position, Verdict>> detect_volatile(const Trs& trs,
                                                          const Reduction& red) {
  TailCertificate cert = analyze_tail(trs, red);
  std::vector<std::pair<Position, Verdict>> out;
  if (cert.kind == TailCertificate::Periodic) {
    for (const Position& p : cert.volatile_positions)
      out.emplace_back(p, Verdict::Certified);
  } else if (cert.kind == TailCertificate::None) {
    for (const Position& p : cert.suspected)
      out.emplace_back(p, Verdict::Suspected);
  }
  return out;
}

std::vector<Position> outermost_volatile(
    const std::vector<std::pair<Position, Verdict>>& vol) {
  std::vector<Position> certified;
  for (const auto& [p, v] : vol)
    if (v == Verdict::Certified) certified.push_back(p);
  return minimal_positions(std::move(certified));
}

LimitOutcome strong_p_limit(const Trs& trs, const Reduction& red, uint32_t depth) {
  LimitOutcome out;
  out.mode = LimitMode::StrongP;
  TailCertificate cert = analyze_tail(trs, red);
  switch (cert.kind) {
    case TailCertificate::Closed:
      out.limit = red.final_term();
      out.certificate = Certificate::ExactRational;
      return out;
    case TailCertificate::Periodic: {
      out.limit = assemble_strong_p(red, cert);
      out.certificate = Certificate::ExactRational;
      for (const Position& p : cert.volatile_positions)
        out.volatile_positions.emplace_back(p, Verdict::Certified);
      for (const Position& p : outermost_volatile(out.volatile_positions))
        if (p.empty()) out.destructive = true;
      return out;
    }
    case TailCertificate::None:
      return budget_outcome(LimitMode::StrongP, trs, red, depth);
  }
  return out;
}

LimitOutcome weak_p_limit(const Trs& trs, const Reduction& red, uint32_t depth) {
  LimitOutcome out;
  out.mode = LimitMode::WeakP;
  TailCertificate cert = analyze_tail(trs, red);
  switch (cert.kind) {
    case TailCertificate::Closed:
      out.limit = red.final_term();
      out.certificate = Certificate::ExactRational;
      return out;
    case TailCertificate::Periodic: {
      out.limit = glb(assemble_phases(red, cert));
      out.certificate = Certificate::ExactRational;
      for (const Position& p : cert.volatile_positions)
        out.volatile_positions.emplace_back(p, Verdict::Certified);
      return out;
    }
    case TailCertificate::None:
      return budget_outcome(LimitMode::WeakP, trs, red, depth);
  }
  return out;
}

LimitOutcome weak_m_limit(const Trs& trs, const Reduction& red, uint32_t depth) {
  LimitOutcome out;
  out.mode = LimitMode::WeakM;
  TailCertificate cert = analyze_tail(trs, red);
  switch (cert.kind) {
    case TailCertificate::Closed:
      out.limit = red.final_term();
      out.certificate = Certificate::ExactRational;
      return out;
    case TailCertificate::Periodic: {
      std::vector<PartialTerm> phases = assemble_phases(red, cert);
      bool all_equal = true;
      for (size_t i = 1; i < phases.size(); ++i)
        if (!(phases[i] == phases[0])) all_equal = false;
      out.certificate = Certificate::ExactRational;
      if (all_equal) {
        out.limit = phases[0];
      } else {
        out.defined = false;  // truncations keep alternating: not Cauchy
        out.limit = glb(phases);
      }
      return out;
    }
    case TailCertificate::None:
      return budget_outcome(LimitMode::WeakM, trs, red, depth);
  }
  return out;
}

LimitOutcome strong_m_limit(const Trs& trs, const Reduction& red, uint32_t depth) {
  LimitOutcome out;
  out.mode = LimitMode::StrongM;
  TailCertificate cert = analyze_tail(trs, red);
  switch (cert.kind) {
    case TailCertificate::Closed:
      out.limit = red.final_term();
      out.certificate = Certificate::ExactRational;
      return out;
    case TailCertificate::Periodic: {
      out.certificate = Certificate::ExactRational;
      if (!cert.volatile_positions.empty()) {
        // Contractions recur at a fixed position: depths do not tend to ∞.
        out.defined = false;
        out.limit = assemble_strong_p(red, cert);
        for (const Position& p : cert.volatile_positions)
          out.volatile_positions.emplace_back(p, Verdict::Certified);
        return out;
      }
      LimitOutcome sp = strong_p_limit(trs, red, depth);
      out.limit = sp.limit;
      return out;
    }
    case TailCertificate::None: {
      LimitOutcome b = budget_outcome(LimitMode::StrongM, trs, red, depth);
      b.certificate = Certificate::BudgetExhausted;  // depth→∞ not certified
      return b;
    }
  }
  return out;
}

DestructiveVerdict is_destructive(const Trs& trs, const Reduction& red) {
  TailCertificate cert = analyze_tail(trs, red);
  if (cert.kind == TailCertificate::Closed) return {false, true};
  if (cert.kind == TailCertificate::Periodic) {
    for (const Position& p : cert.volatile_positions)
      if (p.empty()) return {true, true};
    return {false, true};
  }
  for (const Position& p : cert.suspected)
    if (p.empty()) return {true, false};
  return {false, false};
}

// ---------------------------------------------------------------------------
// fold_rational

namespace {

// Fully unshared copy of a finite term; node i's parent edge recorded.
struct RawTree {
  std::vector<Node> nodes;
  std::vector<int64_t> parent;      // -1 for root
  std::vector<uint32_t> parent_arg; // which kid slot of the parent
  std::vector<uint32_t> depth;
};

RawTree tree_expand(const PartialTerm& t) {
  RawTree out;
  std::function<uint32_t(uint32_t, int64_t, uint32_t, uint32_t)> go =
      [&](uint32_t n, int64_t par, uint32_t arg, uint32_t d) -> uint32_t {
    const uint32_t id = static_cast<uint32_t>(out.nodes.size());
    out.nodes.push_back(t.nodes[n]);
    out.parent.push_back(par);
    out.parent_arg.push_back(arg);
    out.depth.push_back(d);
    for (uint32_t i = 0; i < t.nodes[n].kids.size(); ++i) {
      const uint32_t kid = go(t.nodes[n].kids[i], id, i, d + 1);
      out.nodes[id].kids[i] = kid;
    }
    return id;
  };
  go(t.root, -1, 0, 0);
  return out;
}

}  // namespace

std::optional<PartialTerm> fold_rational(
    const std::vector<PartialTerm>& truncations) {
  if (truncations.empty()) return std::nullopt;
  for (size_t i = 0; i + 1 < truncations.size(); ++i)
    if (!(truncate(truncations[i + 1], static_cast<uint32_t>(i)) ==
          truncations[i]))
      return std::nullopt;  // inconsistent
  const PartialTerm deepest = canonicalize(truncations.back());
  const uint32_t boundary = static_cast<uint32_t>(truncations.size() - 1);
  auto verify = [&](const PartialTerm& cand) {
    for (size_t d = 0; d < truncations.size(); ++d)
      if (!(truncate(cand, static_cast<uint32_t>(d)) == truncations[d]))
        return false;
    return true;
  };
  // Every ⊥ of a guess must be confirmed strictly above the truncation
  // boundary; boundary-⊥ is a cut artifact, not evidence.
  auto bots_confirmed = [&](const PartialTerm& cand) {
    std::vector<uint32_t> mind(cand.nodes.size(), kDepthInf);
    std::deque<std::pair<uint32_t, uint32_t>> q{{cand.root, 0}};
    mind[cand.root] = 0;
    while (!q.empty()) {
      auto [n, d] = q.front();
      q.pop_front();
      for (uint32_t k : cand.nodes[n].kids)
        if (mind[k] == kDepthInf) {
          mind[k] = d + 1;
          q.emplace_back(k, d + 1);
        }
    }
    for (uint32_t n = 0; n < cand.nodes.size(); ++n)
      if (cand.nodes[n].kind == NodeKind::Bottom &&
          mind[n] != kDepthInf && mind[n] >= boundary)
        return false;
    return true;
  };
  if (is_total(deepest) && verify(deepest)) return deepest;

  // Single back-edge guess: redirect one subtree edge to an ancestor node,
  // then verify against every truncation. The loop must be visible for two
  // full periods below its anchor, else the data is too short to witness.
  RawTree tree = tree_expand(deepest);
  const uint32_t n = static_cast<uint32_t>(tree.nodes.size());
  std::vector<std::pair<uint32_t, uint32_t>> cands;  // (anchor, back)
  for (uint32_t back = 1; back < n; ++back) {
    for (int64_t a = tree.parent[back]; a >= 0; a = tree.parent[a]) {
      const uint32_t period = tree.depth[back] - tree.depth[a];
      if (tree.depth[a] + 2 * period <= boundary)
        cands.emplace_back(static_cast<uint32_t>(a), back);
    }
  }
  std::sort(cands.begin(), cands.end(),
            [&](const auto& x, const auto& y) {
              return std::make_tuple(tree.depth[x.first], x.first,
                                     tree.depth[x.second], x.second) <
                     std::make_tuple(tree.depth[y.first], y.first,
                                     tree.depth[y.second], y.second);
            });
  for (auto [anchor, back] : cands) {
    PartialTerm cand;
    cand.nodes = tree.nodes;
    cand.root = 0;
    const int64_t par = tree.parent[back];
    cand.nodes[static_cast<uint32_t>(par)].kids[tree.parent_arg[back]] = anchor;
    cand = canonicalize(cand);
    if (verify(cand) && bots_confirmed(cand)) return cand;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Compression witness

CompressionResult compression_witness(const Trs& trs, const PartialTerm& origin,
                                      const PartialTerm& target, uint32_t depth,
                                      size_t budget) {
  CompressionResult res;
  if (!trs.orthogonal()) {
    res.status = CompressionResult::Refused;
    res.reason = trs.left_linear() ? "not-orthogonal" : "not-left-linear";
    return res;
  }
  for (StrategyDesc::Kind kind :
       {StrategyDesc::OutermostLeftmost, StrategyDesc::ParallelOutermost}) {
    StrategyDesc strat;
    strat.kind = kind;
    Reduction red = run(trs, origin, strat, budget);
    LimitOutcome out = strong_p_limit(trs, red, depth);
    if (out.certificate == Certificate::BudgetExhausted) continue;
    if (truncate(out.limit, depth) == truncate(target, depth)) {
      res.status = CompressionResult::Witness;
      res.witness = std::move(red);
      return res;
    }
  }
  res.status = CompressionResult::Inconclusive;
  res.reason = "no ≤ω witness found within budget";
  return res;
}

}  // namespace irw
