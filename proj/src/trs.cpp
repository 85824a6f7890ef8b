#include "irw/trs.hpp"

#include <algorithm>
#include <functional>

#include "irw/print.hpp"

namespace irw {

namespace {

bool is_acyclic(const PartialTerm& t) {
  enum { White, Grey, Black };
  std::vector<int> color(t.nodes.size(), White);
  bool ok = true;
  std::function<void(uint32_t)> dfs = [&](uint32_t n) {
    color[n] = Grey;
    for (uint32_t k : t.nodes[n].kids) {
      if (color[k] == Grey) ok = false;
      if (color[k] == White) dfs(k);
    }
    color[n] = Black;
  };
  dfs(t.root);
  return ok;
}

bool has_bottom(const PartialTerm& t) {
  for (const Node& n : t.nodes)
    if (n.kind == NodeKind::Bottom) return true;
  return false;
}

}  // namespace

std::vector<std::pair<Position, std::string>> variable_occurrences(
    const PartialTerm& t) {
  std::vector<std::pair<Position, std::string>> out;
  std::function<void(uint32_t, Position&)> go = [&](uint32_t n, Position& p) {
    const Node& node = t.nodes[n];
    if (node.kind == NodeKind::Var) {
      out.emplace_back(p, node.name);
      return;
    }
    for (uint32_t i = 0; i < node.kids.size(); ++i) {
      p.push_back(i);
      go(node.kids[i], p);
      p.pop_back();
    }
  };
  Position p;
  go(t.root, p);
  return out;
}

std::set<std::string> variables_of(const PartialTerm& t) {
  std::set<std::string> out;
  for (const Node& n : t.nodes)
    if (n.kind == NodeKind::Var) out.insert(n.name);
  return out;
}

uint32_t term_depth_finite(const PartialTerm& t) {
  std::function<uint32_t(uint32_t)> go = [&](uint32_t n) -> uint32_t {
    uint32_t d = 0;
    for (uint32_t k : t.nodes[n].kids) d = std::max(d, 1 + go(k));
    return d;
  };
  return go(t.root);
}

Rule make_rule(const std::string& id, const PartialTerm& lhs,
               const PartialTerm& rhs) {
  Rule r;
  r.id = id;
  r.lhs = canonicalize(lhs);
  r.rhs = canonicalize(rhs);
  if (r.lhs.nodes[r.lhs.root].kind == NodeKind::Var)
    fail("bad-rule", "rule " + id + ": lhs is a variable");
  if (!is_acyclic(r.lhs)) fail("bad-rule", "rule " + id + ": lhs not finite");
  if (has_bottom(r.lhs) || has_bottom(r.rhs))
    fail("bad-rule", "rule " + id + ": _|_ not allowed in rules");
  auto lv = variables_of(r.lhs);
  for (const std::string& v : variables_of(r.rhs))
    if (!lv.count(v))
      fail("bad-rule", "rule " + id + ": variable " + v + " not in lhs");
  r.collapsing = r.rhs.nodes[r.rhs.root].kind == NodeKind::Var;
  // posF(lhs): positions of function symbols.
  std::function<void(uint32_t, Position&)> walk = [&](uint32_t n, Position& p) {
    const Node& node = r.lhs.nodes[n];
    if (node.kind != NodeKind::Sym) return;
    r.pattern_positions.push_back(p);
    for (uint32_t i = 0; i < node.kids.size(); ++i) {
      p.push_back(i);
      walk(node.kids[i], p);
      p.pop_back();
    }
  };
  Position p;
  walk(r.lhs.root, p);
  return r;
}

// ---------------------------------------------------------------------------
// Matching

std::optional<std::map<std::string, uint32_t>> match_at(const PartialTerm& lhs,
                                                        const PartialTerm& t,
                                                        uint32_t t_node) {
  std::map<std::string, uint32_t> binding;
  std::function<bool(uint32_t, uint32_t)> go = [&](uint32_t l, uint32_t n) {
    const Node& ln = lhs.nodes[l];
    const Node& tn = t.nodes[n];
    switch (ln.kind) {
      case NodeKind::Var: {
        auto [it, inserted] = binding.emplace(ln.name, n);
        // t is canonical, so equal subterms are the same node.
        return inserted || it->second == n;
      }
      case NodeKind::Bottom:
        return false;  // rules are ⊥-free
      case NodeKind::Sym: {
        if (tn.kind != NodeKind::Sym || tn.name != ln.name ||
            tn.kids.size() != ln.kids.size())
          return false;
        for (size_t i = 0; i < ln.kids.size(); ++i)
          if (!go(ln.kids[i], tn.kids[i])) return false;
        return true;
      }
    }
    return false;
  };
  if (!go(lhs.root, t_node)) return std::nullopt;
  return binding;
}

std::optional<Substitution> match(const PartialTerm& lhs, const PartialTerm& t) {
  PartialTerm ct = canonicalize(t);
  auto nodes = match_at(lhs, ct, ct.root);
  if (!nodes) return std::nullopt;
  Substitution s;
  for (auto& [v, n] : *nodes) {
    PartialTerm sub = ct;
    sub.root = n;
    s.bindings[v] = canonicalize(sub);
  }
  return s;
}

PartialTerm apply_subst(const Substitution& s, const PartialTerm& t) {
  TermBuilder b;
  b.import(t);
  // Redirection by variable name; shared bindings imported once.
  std::map<std::string, uint32_t> roots;
  for (const auto& [v, term] : s.bindings) roots[v] = b.import(term);
  for (uint32_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].kind == NodeKind::Var) {
      auto it = roots.find(t.nodes[i].name);
      if (it != roots.end()) b.redirect(i, it->second);
    }
  }
  return b.finish(t.root);
}

PartialTerm rewrite_step(const Trs& trs, const PartialTerm& t,
                         const Position& p, const Rule& rule) {
  (void)trs;
  if (!in_domain(t, p))
    fail("position-out-of-domain",
         "position " + position_to_string(p) + " not in term");
  const uint32_t n = node_at(t, p);
  auto binding = match_at(rule.lhs, t, n);
  if (!binding)
    fail("not-a-redex", "no " + rule.id + "-redex at " + position_to_string(p));

  TermBuilder b;
  const uint32_t t_base = b.import(t);
  const uint32_t off = t_base - t.root;
  // Contractum: rhs with variable leaves wired to the matched subgraphs.
  const uint32_t r_base = b.import(rule.rhs);
  const uint32_t r_off = r_base - rule.rhs.root;
  for (uint32_t i = 0; i < rule.rhs.nodes.size(); ++i) {
    if (rule.rhs.nodes[i].kind == NodeKind::Var)
      b.redirect(r_off + i, off + binding->at(rule.rhs.nodes[i].name));
  }
  if (p.empty()) return b.finish(r_base);

  // Unroll the spine so only the designated occurrence is replaced.
  std::vector<uint32_t> spine;
  uint32_t cur = t.root;
  for (uint32_t i : p) {
    spine.push_back(cur);
    cur = t.nodes[cur].kids[i];
  }
  uint32_t below = r_base;
  for (size_t i = p.size(); i-- > 0;) {
    const Node& orig = t.nodes[spine[i]];
    std::vector<uint32_t> kids;
    for (uint32_t j = 0; j < orig.kids.size(); ++j)
      kids.push_back(j == p[i] ? below : off + orig.kids[j]);
    below = b.sym(orig.name, std::move(kids), orig.marks);
  }
  return b.finish(below);
}

bool is_redex_node(const Trs& trs, const PartialTerm& t, uint32_t node,
                   size_t* rule_out) {
  for (size_t i = 0; i < trs.rules().size(); ++i) {
    if (match_at(trs.rule(i).lhs, t, node)) {
      if (rule_out) *rule_out = i;
      return true;
    }
  }
  return false;
}

std::vector<std::pair<uint32_t, size_t>> node_redexes(const Trs& trs,
                                                      const PartialTerm& t) {
  std::vector<std::pair<uint32_t, size_t>> out;
  for (uint32_t n = 0; n < t.nodes.size(); ++n)
    for (size_t i = 0; i < trs.rules().size(); ++i)
      if (match_at(trs.rule(i).lhs, t, n)) out.emplace_back(n, i);
  return out;
}

bool has_redex(const Trs& trs, const PartialTerm& t) {
  for (uint32_t n = 0; n < t.nodes.size(); ++n)
    if (is_redex_node(trs, t, n)) return true;
  return false;
}

std::vector<Redex> redexes(const Trs& trs, const PartialTerm& t, uint32_t depth) {
  std::vector<Redex> out;
  for (const Position& p : positions_to_depth(t, depth)) {
    const uint32_t n = node_at(t, p);
    for (size_t i = 0; i < trs.rules().size(); ++i)
      if (match_at(trs.rule(i).lhs, t, n)) out.push_back({p, i});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Syntactic checks

LinearityReport check_left_linear(const Signature&, const std::vector<Rule>& rules) {
  for (const Rule& r : rules) {
    std::map<std::string, int> count;
    for (const auto& [pos, v] : variable_occurrences(r.lhs)) {
      (void)pos;
      if (++count[v] > 1) return {false, LinearityWitness{r.id, v}};
    }
  }
  return {true, std::nullopt};
}

namespace {

// Finite first-order unification on trees (occurs check included).
struct UTerm {
  bool is_var = false;
  std::string name;
  std::vector<UTerm> kids;
};

UTerm to_uterm(const PartialTerm& t, uint32_t n, const std::string& rename) {
  const Node& node = t.nodes[n];
  if (node.kind == NodeKind::Var) return {true, node.name + rename, {}};
  UTerm u{false, node.name, {}};
  for (uint32_t k : node.kids) u.kids.push_back(to_uterm(t, k, rename));
  return u;
}

using Bindings = std::map<std::string, UTerm>;

UTerm walk(const UTerm& t, const Bindings& b) {
  if (t.is_var) {
    auto it = b.find(t.name);
    if (it != b.end()) return walk(it->second, b);
  }
  return t;
}

bool occurs(const std::string& v, const UTerm& t, const Bindings& b) {
  UTerm w = walk(t, b);
  if (w.is_var) return w.name == v;
  for (const UTerm& k : w.kids)
    if (occurs(v, k, b)) return true;
  return false;
}

bool unify(const UTerm& a, const UTerm& b, Bindings& s) {
  UTerm x = walk(a, s);
  UTerm y = walk(b, s);
  if (x.is_var && y.is_var && x.name == y.name) return true;
  if (x.is_var) {
    if (occurs(x.name, y, s)) return false;
    s[x.name] = y;
    return true;
  }
  if (y.is_var) {
    if (occurs(y.name, x, s)) return false;
    s[y.name] = x;
    return true;
  }
  if (x.name != y.name || x.kids.size() != y.kids.size()) return false;
  for (size_t i = 0; i < x.kids.size(); ++i)
    if (!unify(x.kids[i], y.kids[i], s)) return false;
  return true;
}

}  // namespace

bool unifiable(const PartialTerm& a, const PartialTerm& b) {
  UTerm ua = to_uterm(a, a.root, "#1");
  UTerm ub = to_uterm(b, b.root, "#2");
  Bindings s;
  return unify(ua, ub, s);
}

OrthogonalityReport check_orthogonal(const Signature& sig,
                                     const std::vector<Rule>& rules) {
  OrthogonalityReport rep;
  auto lin = check_left_linear(sig, rules);
  rep.linearity_witness = lin.witness;
  if (!lin.left_linear) {
    rep.orthogonal = false;
    return rep;
  }
  for (size_t i = 0; i < rules.size(); ++i) {
    for (size_t j = 0; j < rules.size(); ++j) {
      const PartialTerm& l1 = rules[i].lhs;
      const PartialTerm& l2 = rules[j].lhs;
      for (const Position& p : rules[i].pattern_positions) {
        if (i == j && p.empty()) continue;  // a rule trivially overlays itself
        PartialTerm sub = subterm_at(l1, p);
        UTerm ua = to_uterm(sub, sub.root, "#1");
        UTerm ub = to_uterm(l2, l2.root, "#2");
        Bindings s;
        if (unify(ua, ub, s)) {
          rep.orthogonal = false;
          rep.overlap_witness = OverlapWitness{rules[i].id, rules[j].id, p};
          return rep;
        }
      }
    }
  }
  rep.orthogonal = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Trs

Trs::Trs(Signature sig, std::vector<Rule> rules)
    : sig_(std::move(sig)), rules_(std::move(rules)) {
  auto lin = check_left_linear(sig_, rules_);
  left_linear_ = lin.left_linear;
  lin_witness_ = lin.witness;
  auto orth = check_orthogonal(sig_, rules_);
  orthogonal_ = orth.orthogonal;
  overlap_witness_ = orth.overlap_witness;
  for (const Rule& r : rules_) {
    lhs_heads_.insert(r.lhs.nodes[r.lhs.root].name);
    max_lhs_depth_ = std::max(max_lhs_depth_, term_depth_finite(r.lhs));
  }
  const size_t n = rules_.size();
  rhs_inst_.assign(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      rhs_inst_[i][j] = match(rules_[j].lhs, rules_[i].rhs).has_value();
  // root_loop_[i]: an infinite chain of rhs-instance steps starts at i,
  // i.e. i reaches a cycle of the relation.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (size_t start = 0; start < n; ++start) {
    std::vector<size_t> stack;
    for (size_t j = 0; j < n; ++j)
      if (rhs_inst_[start][j] && !reach[start][j]) {
        reach[start][j] = 1;
        stack.push_back(j);
      }
    while (!stack.empty()) {
      size_t cur = stack.back();
      stack.pop_back();
      for (size_t j = 0; j < n; ++j)
        if (rhs_inst_[cur][j] && !reach[start][j]) {
          reach[start][j] = 1;
          stack.push_back(j);
        }
    }
  }
  root_loop_.assign(n, false);
  for (size_t i = 0; i < n; ++i)
    for (size_t c = 0; c < n; ++c)
      if (reach[c][c] && (i == c || reach[i][c])) root_loop_[i] = true;
}

std::optional<size_t> Trs::rule_index(const std::string& id) const {
  for (size_t i = 0; i < rules_.size(); ++i)
    if (rules_[i].id == id) return i;
  return std::nullopt;
}

}  // namespace irw
