#include "irw/develop.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>

#include "irw/print.hpp"

namespace irw {

// ---------------------------------------------------------------------------
// Occurrence sets and marking

OccurrenceSet OccurrenceSet::parse(const std::string& text) {
  OccurrenceSet u;
  std::string s = text;
  auto trim = [](std::string& x) {
    x.erase(0, x.find_first_not_of(" \t"));
    x.erase(x.find_last_not_of(" \t") + 1);
  };
  trim(s);
  if (s.empty()) return u;
  if (s.rfind("@node:", 0) == 0 && s.find(',') == std::string::npos) {
    u.node_symbols.push_back(s.substr(6));
    return u;
  }
  if (s.front() == '{') {
    if (s.back() != '}') fail("bad-occurrences", "expected closing '}'");
    s = s.substr(1, s.size() - 2);
  }
  size_t i = 0;
  while (i <= s.size()) {
    size_t j = s.find(',', i);
    if (j == std::string::npos) j = s.size();
    std::string item = s.substr(i, j - i);
    trim(item);
    if (!item.empty()) {
      if (item.rfind("@node:", 0) == 0)
        u.node_symbols.push_back(item.substr(6));
      else
        u.positions.push_back(position_from_string(item));
    }
    i = j + 1;
  }
  return u;
}

std::string OccurrenceSet::to_string() const {
  std::string s = "{";
  bool first = true;
  for (const Position& p : positions) {
    if (!first) s += ", ";
    s += position_to_string(p);
    first = false;
  }
  for (const std::string& n : node_symbols) {
    if (!first) s += ", ";
    s += "@node:" + n;
    first = false;
  }
  return s + "}";
}

namespace {

// Copy of t with every position of length < d expanded into its own node;
// deeper structure shares the original graph.
PartialTerm unshare_to_depth(const PartialTerm& t, uint32_t d) {
  PartialTerm out;
  out.nodes = t.nodes;  // shared tail
  std::function<uint32_t(uint32_t, uint32_t)> go = [&](uint32_t n,
                                                       uint32_t rest) -> uint32_t {
    if (rest == 0) return n;
    Node copy = t.nodes[n];
    for (size_t i = 0; i < copy.kids.size(); ++i)
      copy.kids[i] = go(t.nodes[n].kids[i], rest - 1);
    out.nodes.push_back(copy);
    return static_cast<uint32_t>(out.nodes.size() - 1);
  };
  out.root = go(t.root, d);
  return out;  // intentionally not canonicalized
}

uint32_t walk_raw(const PartialTerm& t, const Position& p) {
  uint32_t cur = t.root;
  for (uint32_t i : p) {
    if (i >= t.nodes[cur].kids.size())
      fail("occurrence-not-in-term",
           "position " + position_to_string(p) + " not in term");
    cur = t.nodes[cur].kids[i];
  }
  return cur;
}

}  // namespace

PartialTerm mark_occurrences(const PartialTerm& t, const OccurrenceSet& u,
                             uint8_t mark) {
  uint32_t maxd = 0;
  for (const Position& p : u.positions)
    maxd = std::max<uint32_t>(maxd, static_cast<uint32_t>(p.size()) + 1);
  PartialTerm raw = unshare_to_depth(t, maxd);
  for (const Position& p : u.positions) {
    const uint32_t n = walk_raw(raw, p);
    Node& node = raw.nodes[n];
    if (node.kind == NodeKind::Bottom)
      fail("occurrence-at-bottom",
           "occurrence " + position_to_string(p) + " is a _|_ position");
    if (node.kind == NodeKind::Var)
      fail("occurrence-at-variable",
           "occurrence " + position_to_string(p) + " is a variable");
    node.marks |= mark;
  }
  for (const std::string& sym : u.node_symbols) {
    bool found = false;
    for (Node& node : raw.nodes)
      if (node.kind == NodeKind::Sym && node.name == sym) {
        node.marks |= mark;
        found = true;
      }
    if (!found)
      fail("occurrence-not-in-term", "no node labelled '" + sym + "'");
  }
  return canonicalize(raw);
}

PartialTerm clear_marks(const PartialTerm& t, uint8_t mask) {
  PartialTerm r = t;
  for (Node& n : r.nodes) n.marks &= static_cast<uint8_t>(~mask);
  return canonicalize(r);
}

bool has_marks(const PartialTerm& t, uint8_t mask) {
  for (const Node& n : t.nodes)
    if (n.marks & mask) return true;
  return false;
}

std::vector<Position> marked_positions(const PartialTerm& t, uint8_t mask,
                                       uint32_t depth_cap) {
  std::vector<Position> out;
  for (const Position& p : positions_to_depth(t, depth_cap)) {
    const Node& n = t.nodes[node_at(t, p)];
    if (n.marks & mask) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Descendants

std::vector<Position> descendants_step(const Trs& trs, const Step& step,
                                       const std::vector<Position>& u) {
  const Rule& rule = trs.rule(step.rule);
  const Position& pi = step.position;
  std::set<Position> out;
  // Variable occurrences of the rhs; a rational rhs with a variable under a
  // cycle has infinitely many and is not representable positionally.
  std::vector<std::pair<Position, std::string>> rhs_vars;
  {
    // Enumerate rhs variable occurrences, walking only branches that reach
    // a variable. A variable under a cycle has infinitely many occurrences
    // and is not representable positionally.
    std::vector<char> reach(rule.rhs.nodes.size(), 0);
    for (uint32_t i = 0; i < rule.rhs.nodes.size(); ++i)
      if (rule.rhs.nodes[i].kind == NodeKind::Var) reach[i] = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (uint32_t i = 0; i < rule.rhs.nodes.size(); ++i) {
        if (reach[i]) continue;
        for (uint32_t k : rule.rhs.nodes[i].kids)
          if (reach[k]) {
            reach[i] = 1;
            changed = true;
            break;
          }
      }
    }
    std::function<void(uint32_t, Position&, uint32_t)> go =
        [&](uint32_t n, Position& p, uint32_t depth) {
          if (depth > 64 || rhs_vars.size() > 512)
            fail("rhs-cyclic-variable",
                 "variable occurrences of rule '" + rule.id +
                     "' are not finitely enumerable");
          const Node& node = rule.rhs.nodes[n];
          if (node.kind == NodeKind::Var) {
            rhs_vars.emplace_back(p, node.name);
            return;
          }
          for (uint32_t i = 0; i < node.kids.size(); ++i) {
            if (!reach[node.kids[i]]) continue;
            p.push_back(i);
            go(node.kids[i], p, depth + 1);
            p.pop_back();
          }
        };
    Position p;
    go(rule.rhs.root, p, 0);
  }
  for (const Position& occ : u) {
    if (!is_prefix(pi, occ)) {
      out.insert(occ);
      continue;
    }
    const Position rest = strip_prefix(pi, occ);
    // Walk the lhs along `rest`: either we stay inside the pattern (the
    // occurrence is erased) or we pass through a variable.
    uint32_t cur = rule.lhs.root;
    size_t k = 0;
    bool in_pattern = true;
    std::string var;
    for (; k < rest.size(); ++k) {
      const Node& n = rule.lhs.nodes[cur];
      if (n.kind == NodeKind::Var) {
        in_pattern = false;
        var = n.name;
        break;
      }
      if (rest[k] >= n.kids.size()) break;  // outside lhs: impossible on redexes
      cur = n.kids[rest[k]];
    }
    if (in_pattern && k == rest.size()) {
      const Node& n = rule.lhs.nodes[cur];
      if (n.kind == NodeKind::Var) {
        in_pattern = false;
        var = n.name;
      }
    }
    if (in_pattern) continue;  // pattern position: no descendants
    const Position below(rest.begin() + k, rest.end());
    for (const auto& [rp, rv] : rhs_vars)
      if (rv == var) out.insert(concat(concat(pi, rp), below));
  }
  return {out.begin(), out.end()};
}

namespace {

std::vector<Position> filter_tail(const TailCertificate& cert,
                                  std::vector<Position> v) {
  if (cert.kind != TailCertificate::Periodic) return v;
  std::vector<Position> out;
  for (Position& p : v)
    if (!cert.tail_touches(p)) out.push_back(std::move(p));
  return out;
}

}  // namespace

std::vector<Position> descendants(const Trs& trs, const Reduction& red,
                                  const std::vector<Position>& u) {
  for (const Position& p : u) {
    if (!in_domain(red.origin, p))
      fail("occurrence-not-in-term",
           "occurrence " + position_to_string(p) + " not in origin");
    if (label_at(red.origin, p).kind == NodeKind::Bottom)
      fail("occurrence-at-bottom",
           "occurrence " + position_to_string(p) + " is a _|_ position");
  }
  std::vector<Position> cur = u;
  for (const Step& s : red.steps) cur = descendants_step(trs, s, cur);
  if (!red.closed) cur = filter_tail(analyze_tail(trs, red), std::move(cur));
  return cur;
}

PartialTerm transport_marks(const Trs& trs, const Reduction& red,
                            const PartialTerm& marked_origin) {
  PartialTerm cur = marked_origin;
  for (const Step& s : red.steps)
    cur = rewrite_step(trs, cur, s.position, trs.rule(s.rule));
  return cur;
}

std::vector<Position> descendants_via_labels(const Trs& trs,
                                             const Reduction& red,
                                             const std::vector<Position>& u,
                                             uint32_t depth_cap) {
  OccurrenceSet set;
  set.positions = u;
  PartialTerm marked = mark_occurrences(red.origin, set, kMarkB);
  PartialTerm fin = transport_marks(trs, red, marked);
  std::vector<Position> out = marked_positions(fin, kMarkB, depth_cap);
  if (!red.closed) out = filter_tail(analyze_tail(trs, red), std::move(out));
  return out;
}

// ---------------------------------------------------------------------------
// Conflicts

bool non_conflicting(const Trs& trs, const PartialTerm& t,
                     const OccurrenceSet& u) {
  if (trs.orthogonal()) return true;
  PartialTerm marked = mark_occurrences(t, u, kMarkA);
  std::vector<Position> occ = marked_positions(marked, kMarkA, 32);
  for (const Position& a : occ) {
    size_t rule;
    if (!is_redex_node(trs, marked, node_at(marked, a), &rule)) continue;
    for (const Position& b : occ) {
      if (a == b || !is_strict_prefix(a, b)) continue;
      const Position rel = strip_prefix(a, b);
      for (const Position& pat : trs.rule(rule).pattern_positions)
        if (pat == rel && !pat.empty()) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Path automaton

namespace {

struct StateKey {
  bool top;
  uint32_t node;
  size_t rule;
  uint32_t rhs_node;
  friend auto operator<=>(const StateKey&, const StateKey&) = default;
};

}  // namespace

PathAutomaton build_paths_marked(const Trs& trs, const PartialTerm& t,
                                 uint8_t developed_mark) {
  if (!trs.left_linear())
    fail("not-left-linear", "paths need a left-linear system");
  PathAutomaton a;
  std::map<StateKey, size_t> index;

  std::function<size_t(StateKey)> intern = [&](StateKey key) -> size_t {
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const size_t id = a.entries.size();
    index.emplace(key, id);
    a.entries.push_back({});
    PathAutomaton::Entry e;
    e.state = PathAutomaton::State{key.top, key.top ? key.node : key.rhs_node,
                                   key.rule, key.top ? 0 : key.node};
    if (key.top) {
      const Node& n = t.nodes[key.node];
      if ((n.marks & developed_mark) && n.kind == NodeKind::Sym) {
        size_t rule = 0;
        if (!is_redex_node(trs, t, key.node, &rule))
          fail("occurrence-not-a-redex",
               "marked node '" + n.name + "' is not a redex");
        e.silent = true;
        e.silent_next = intern(
            StateKey{false, key.node, rule, trs.rule(rule).rhs.root});
      } else {
        e.label_kind = n.kind;
        e.label = n.kind == NodeKind::Bottom ? "_|_" : n.name;
        e.marks = static_cast<uint8_t>(n.marks & ~developed_mark);
        for (uint32_t k : n.kids)
          e.next.push_back(intern(StateKey{true, k, 0, 0}));
      }
    } else {
      const Rule& rule = trs.rule(key.rule);
      const Node& rn = rule.rhs.nodes[key.rhs_node];
      if (rn.kind == NodeKind::Var) {
        // jump back through the unique lhs occurrence of the variable
        Position where;
        bool found = false;
        for (const auto& [p, v] : variable_occurrences(rule.lhs))
          if (v == rn.name) {
            where = p;
            found = true;
            break;
          }
        if (!found) fail("internal", "rhs variable missing from lhs");
        uint32_t back = key.node;  // redex host node
        for (uint32_t i : where) back = t.nodes[back].kids[i];
        e.silent = true;
        e.silent_next = intern(StateKey{true, back, 0, 0});
      } else {
        e.label_kind = rn.kind;
        e.label = rn.kind == NodeKind::Bottom ? "_|_" : rn.name;
        e.marks = 0;  // contracta are unlabelled
        for (uint32_t k : rn.kids)
          e.next.push_back(intern(StateKey{false, key.node, key.rule, k}));
      }
    }
    a.entries[id] = std::move(e);
    return id;
  };

  a.start = intern(StateKey{true, t.root, 0, 0});
  return a;
}

PathAutomaton build_paths(const Trs& trs, const PartialTerm& t,
                          const OccurrenceSet& u) {
  PartialTerm marked = mark_occurrences(canonicalize(t), u, kMarkA);
  return build_paths_marked(trs, marked, kMarkA);
}

std::string PathAutomaton::to_dot() const {
  std::string s = "digraph paths {\n  rankdir=TB;\n";
  for (size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    std::string name = e.state.top
                           ? "T" + std::to_string(e.state.node)
                           : "r" + std::to_string(e.state.rule) + "_" +
                                 std::to_string(e.state.node) + "_" +
                                 std::to_string(e.state.source);
    s += "  n" + std::to_string(i) + " [label=\"" + name +
         (e.silent ? "" : " : " + e.label) + "\"];\n";
    if (e.silent) {
      s += "  n" + std::to_string(i) + " -> n" + std::to_string(e.silent_next) +
           " [style=dashed];\n";
    } else {
      for (size_t k = 0; k < e.next.size(); ++k)
        s += "  n" + std::to_string(i) + " -> n" + std::to_string(e.next[k]) +
             " [label=\"" + std::to_string(k) + "\"];\n";
    }
  }
  s += "}\n";
  return s;
}

std::string trace_to_string(const Trace& t) {
  std::string s = "<";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) s += ",";
    s += t[i].second;
  }
  return s + ">";
}

std::vector<Trace> automaton_traces(const PathAutomaton& a, size_t max_count) {
  // Every state resolves silently to a unique labelled state, a leaf, or a
  // silent cycle; traces follow labelled states downwards.
  std::vector<Trace> out;
  struct Item {
    size_t state;
    Trace trace;
  };
  std::deque<Item> queue{{a.start, {}}};
  while (!queue.empty() && out.size() < max_count) {
    Item it = queue.front();
    queue.pop_front();
    // silent resolution
    size_t cur = it.state;
    std::set<size_t> seen;
    bool cycle = false;
    while (a.entries[cur].silent) {
      if (!seen.insert(cur).second) {
        cycle = true;
        break;
      }
      cur = a.entries[cur].silent_next;
    }
    if (cycle) {
      out.push_back(it.trace);  // infinite path, finite trace
      continue;
    }
    const auto& e = a.entries[cur];
    if (e.label_kind == NodeKind::Bottom) {
      out.push_back(it.trace);  // ⊥ label is dropped from the trace
      continue;
    }
    Trace t = it.trace;
    t.emplace_back('n', e.label);
    out.push_back(t);
    for (size_t k = 0; k < e.next.size(); ++k) {
      Trace t2 = t;
      t2.emplace_back('e', std::to_string(k));
      queue.push_back({e.next[k], std::move(t2)});
    }
  }
  return out;
}

std::vector<Trace> maximal_traces(const PathAutomaton& a, size_t max_count) {
  std::vector<Trace> all = automaton_traces(a, max_count);
  std::vector<Trace> out;
  for (const Trace& t : all) {
    bool prefix = false;
    for (const Trace& o : all) {
      if (&o == &t || o.size() <= t.size()) continue;
      if (std::equal(t.begin(), t.end(), o.begin())) prefix = true;
    }
    if (!prefix) out.push_back(t);
  }
  return out;
}

PartialTerm matching_term_marked(const Trs& trs, const PartialTerm& marked,
                                 uint8_t developed_mark) {
  PathAutomaton a = build_paths_marked(trs, marked, developed_mark);

  // Resolve each state through silent edges; a silent cycle denotes ⊥.
  std::vector<int64_t> resolved(a.entries.size(), -1);
  std::function<int64_t(size_t)> resolve = [&](size_t s) -> int64_t {
    if (resolved[s] >= 0 || resolved[s] == -2) return resolved[s];
    std::vector<size_t> chain;
    std::set<size_t> seen;
    size_t cur = s;
    while (a.entries[cur].silent) {
      if (resolved[cur] != -1) break;
      if (!seen.insert(cur).second) {
        for (size_t c : chain) resolved[c] = -2;  // silent cycle: ⊥
        return -2;
      }
      chain.push_back(cur);
      cur = a.entries[cur].silent_next;
    }
    int64_t r = a.entries[cur].silent ? resolved[cur]
                                      : static_cast<int64_t>(cur);
    for (size_t c : chain) resolved[c] = r;
    resolved[s] = r;
    return r;
  };

  TermBuilder b;
  const uint32_t bot = b.bottom();
  std::map<int64_t, uint32_t> built;
  std::function<uint32_t(int64_t)> build = [&](int64_t r) -> uint32_t {
    if (r == -2) return bot;
    auto it = built.find(r);
    if (it != built.end()) return it->second;
    const auto& e = a.entries[static_cast<size_t>(r)];
    switch (e.label_kind) {
      case NodeKind::Bottom:
        built[r] = bot;
        return bot;
      case NodeKind::Var: {
        uint32_t slot = b.var(e.label);
        built[r] = slot;
        return slot;
      }
      case NodeKind::Sym: {
        uint32_t slot = b.reserve();
        built[r] = slot;
        std::vector<uint32_t> kids;
        for (size_t k : e.next) kids.push_back(build(resolve(k)));
        b.fill_sym(slot, e.label, std::move(kids), e.marks);
        return slot;
      }
    }
    return bot;
  };
  return b.finish(build(resolve(a.start)));
}

PartialTerm matching_term(const Trs& trs, const PartialTerm& t,
                          const OccurrenceSet& u) {
  PartialTerm marked = mark_occurrences(canonicalize(t), u, kMarkA);
  return matching_term_marked(trs, marked, kMarkA);
}

// ---------------------------------------------------------------------------
// Complete developments

DevelopmentResult complete_development(const Trs& trs, const PartialTerm& t,
                                       const OccurrenceSet& u, uint32_t depth,
                                       size_t budget) {
  if (!trs.orthogonal() && !non_conflicting(trs, t, u))
    fail("not-orthogonal-and-conflicting",
         "conflicting redex occurrences in a non-orthogonal system");
  if (!trs.left_linear())
    fail("not-left-linear", "developments need a left-linear system");
  PartialTerm marked = mark_occurrences(canonicalize(t), u, kMarkA);
  // every marked node must be a redex
  for (uint32_t n = 0; n < marked.nodes.size(); ++n)
    if ((marked.nodes[n].marks & kMarkA) && !is_redex_node(trs, marked, n))
      fail("occurrence-not-a-redex", "occurrence set contains a non-redex");

  StrategyDesc strat;
  strat.kind = StrategyDesc::DevelopMarked;
  Reduction red = run(trs, marked, strat, budget);

  DevelopmentResult res;
  res.outcome = strong_p_limit(trs, red, depth);
  res.final_term = clear_marks(res.outcome.limit, kMarkA);
  res.outcome.limit = res.final_term;
  res.reduction = std::move(red);
  if (res.outcome.certificate != Certificate::BudgetExhausted &&
      has_marks(res.final_term, kMarkA))
    fail("internal", "development left residuals in a certified limit");
  return res;
}

DiamondResult diamond_join(const Trs& trs, const PartialTerm& t,
                           const OccurrenceSet& u, const OccurrenceSet& v,
                           uint32_t depth, size_t budget) {
  (void)depth;
  (void)budget;
  if (!trs.orthogonal()) fail("not-orthogonal", "diamond needs orthogonality");
  PartialTerm base = canonicalize(t);
  PartialTerm marked = mark_occurrences(mark_occurrences(base, u, kMarkA), v,
                                        kMarkB);
  // develop U (kMarkA); V's residuals survive as kMarkB
  PartialTerm t1m = matching_term_marked(trs, marked, kMarkA);
  // develop V: swap roles (kMarkB developed)
  PartialTerm t2m = matching_term_marked(trs, marked, kMarkB);
  DiamondResult res;
  res.t1 = clear_marks(t1m, kMarkA | kMarkB);
  res.t2 = clear_marks(t2m, kMarkA | kMarkB);
  PartialTerm j1 = matching_term_marked(trs, t1m, kMarkB);
  PartialTerm j2 = matching_term_marked(trs, t2m, kMarkA);
  PartialTerm c1 = clear_marks(j1, kMarkA | kMarkB);
  PartialTerm c2 = clear_marks(j2, kMarkA | kMarkB);
  if (!(c1 == c2))
    fail("internal", "diamond corners differ: " + to_string(c1) + " vs " +
                         to_string(c2));
  res.join = c1;
  return res;
}

StripResult strip_project(const Trs& trs, const Reduction& s,
                          const OccurrenceSet& u, uint32_t depth_cap) {
  if (!trs.orthogonal()) fail("not-orthogonal", "strip needs orthogonality");
  // pairwise disjoint redex occurrences
  PartialTerm marked = mark_occurrences(s.origin, u, kMarkA);
  std::vector<Position> occ = marked_positions(marked, kMarkA, depth_cap);
  for (const Position& a : occ)
    for (const Position& b : occ)
      if (!(a == b) && !disjoint(a, b))
        fail("occurrences-not-disjoint", "strip needs disjoint occurrences");

  StripResult res;
  res.projection.origin = clear_marks(matching_term_marked(trs, marked, kMarkA),
                                      kMarkA | kMarkB);
  PartialTerm cur = marked;  // top row, with U-residual marks
  for (const Step& st : s.steps) {
    // residuals of the contracted redex in the bottom term
    PartialTerm both = mark_occurrences(cur, OccurrenceSet{{st.position}, {}},
                                        kMarkB);
    PartialTerm bottom_marked = matching_term_marked(trs, both, kMarkA);
    std::vector<Position> targets =
        marked_positions(bottom_marked, kMarkB, depth_cap);
    std::sort(targets.begin(), targets.end());
    // contract them left to right (pairwise disjoint)
    PartialTerm bfrom = clear_marks(bottom_marked, kMarkB);
    for (const Position& p : targets) {
      PartialTerm plain = clear_marks(bfrom, kMarkA | kMarkB);
      size_t rule = 0;
      if (!is_redex_node(trs, plain, node_at(plain, p), &rule))
        fail("internal", "projected occurrence is not a redex");
      Step bstep = make_step(trs, clear_marks(bfrom, kMarkA | kMarkB), p, rule);
      // advance the marked bottom term in lockstep
      bfrom = rewrite_step(trs, bfrom, p, trs.rule(rule));
      res.projection.cursor_keys.push_back("");
      res.projection.steps.push_back(std::move(bstep));
    }
    cur = rewrite_step(trs, cur, st.position, trs.rule(st.rule));
  }
  res.projection.closed = s.closed;
  res.projection.strategy = s.strategy;
  res.residuals = marked_positions(cur, kMarkA, depth_cap);
  if (!s.closed)
    res.residuals = filter_tail(analyze_tail(trs, s), std::move(res.residuals));
  res.corner = res.projection.final_term();
  return res;
}

}  // namespace irw
