#include "irw/term.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace irw {

// ---------------------------------------------------------------------------
// Positions

bool is_prefix(const Position& p, const Position& q) {
  if (p.size() > q.size()) return false;
  return std::equal(p.begin(), p.end(), q.begin());
}

bool is_strict_prefix(const Position& p, const Position& q) {
  return p.size() < q.size() && is_prefix(p, q);
}

bool disjoint(const Position& p, const Position& q) {
  return !is_prefix(p, q) && !is_prefix(q, p);
}

Position concat(const Position& p, const Position& q) {
  Position r = p;
  r.insert(r.end(), q.begin(), q.end());
  return r;
}

Position strip_prefix(const Position& p, const Position& q) {
  if (!is_prefix(p, q)) fail("internal", "strip_prefix: not a prefix");
  return Position(q.begin() + p.size(), q.end());
}

std::string position_to_string(const Position& p) {
  if (p.empty()) return "e";
  std::string s;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(p[i]);
  }
  return s;
}

Position position_from_string(const std::string& s) {
  if (s.empty() || s == "e") return {};
  Position p;
  size_t i = 0;
  while (i < s.size()) {
    size_t j = s.find('.', i);
    if (j == std::string::npos) j = s.size();
    const std::string part = s.substr(i, j - i);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      fail("bad-position", "malformed position '" + s + "'");
    p.push_back(static_cast<uint32_t>(std::stoul(part)));
    i = j + 1;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Signature

void Signature::add(const std::string& name, uint32_t arity) {
  if (name == "_|_" || name.empty()) fail("bad-signature", "reserved symbol name");
  auto it = syms_.find(name);
  if (it != syms_.end() && it->second != arity)
    fail("bad-signature", "symbol '" + name + "' redeclared with different arity");
  syms_[name] = arity;
}

bool Signature::contains(const std::string& name) const {
  return syms_.count(name) != 0;
}

std::optional<uint32_t> Signature::arity_of(const std::string& name) const {
  auto it = syms_.find(name);
  if (it == syms_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Builder

uint32_t TermBuilder::sym(const std::string& name, std::vector<uint32_t> kids,
                          uint8_t marks) {
  nodes_.push_back(Node{NodeKind::Sym, name, marks, std::move(kids)});
  alias_.push_back(std::nullopt);
  return static_cast<uint32_t>(nodes_.size() - 1);
}

uint32_t TermBuilder::var(const std::string& name) {
  nodes_.push_back(Node{NodeKind::Var, name, 0, {}});
  alias_.push_back(std::nullopt);
  return static_cast<uint32_t>(nodes_.size() - 1);
}

uint32_t TermBuilder::bottom() {
  nodes_.push_back(Node{NodeKind::Bottom, "", 0, {}});
  alias_.push_back(std::nullopt);
  return static_cast<uint32_t>(nodes_.size() - 1);
}

uint32_t TermBuilder::reserve() {
  nodes_.push_back(Node{NodeKind::Bottom, "", 0, {}});
  alias_.push_back(std::nullopt);
  return static_cast<uint32_t>(nodes_.size() - 1);
}

void TermBuilder::fill_sym(uint32_t slot, const std::string& name,
                           std::vector<uint32_t> kids, uint8_t marks) {
  nodes_[slot] = Node{NodeKind::Sym, name, marks, std::move(kids)};
}

void TermBuilder::redirect(uint32_t slot, uint32_t target) {
  alias_[slot] = target;
}

uint32_t TermBuilder::resolve(uint32_t i) const {
  std::unordered_set<uint32_t> seen;
  while (alias_[i].has_value()) {
    if (!seen.insert(i).second) fail("internal", "alias cycle in builder");
    i = *alias_[i];
  }
  return i;
}

uint32_t TermBuilder::import(const PartialTerm& t) {
  const uint32_t base = static_cast<uint32_t>(nodes_.size());
  for (const Node& n : t.nodes) {
    Node c = n;
    for (uint32_t& k : c.kids) k += base;
    nodes_.push_back(std::move(c));
    alias_.push_back(std::nullopt);
  }
  return base + t.root;
}

PartialTerm TermBuilder::finish(uint32_t root) {
  PartialTerm raw;
  raw.nodes = nodes_;
  for (Node& n : raw.nodes)
    for (uint32_t& k : n.kids) k = resolve(k);
  raw.root = resolve(root);
  return canonicalize(raw);
}

PartialTerm mk_bottom() {
  TermBuilder b;
  return b.finish(b.bottom());
}

PartialTerm mk_var(const std::string& name) {
  TermBuilder b;
  return b.finish(b.var(name));
}

PartialTerm mk_sym(const std::string& name, const std::vector<PartialTerm>& kids) {
  TermBuilder b;
  std::vector<uint32_t> ks;
  for (const PartialTerm& k : kids) ks.push_back(b.import(k));
  return b.finish(b.sym(name, ks));
}

// ---------------------------------------------------------------------------
// Canonicalization: Moore-style partition refinement, then a preorder
// renumbering so equal terms have identical node arrays.

namespace {

struct KeyVecHash {
  size_t operator()(const std::vector<uint32_t>& v) const {
    size_t h = 1469598103934665603ull;
    for (uint32_t x : v) h = (h ^ x) * 1099511628211ull;
    return h;
  }
};

}  // namespace

PartialTerm canonicalize(const PartialTerm& t) {
  if (!t.valid()) fail("internal", "canonicalize: empty term");

  // Reachable restriction.
  std::vector<uint32_t> order;
  std::unordered_map<uint32_t, uint32_t> idx;  // old -> dense
  order.push_back(t.root);
  idx[t.root] = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    for (uint32_t k : t.nodes[order[i]].kids) {
      if (!idx.count(k)) {
        idx[k] = static_cast<uint32_t>(order.size());
        order.push_back(k);
      }
    }
  }
  const uint32_t n = static_cast<uint32_t>(order.size());
  std::vector<Node> dense(n);
  for (uint32_t i = 0; i < n; ++i) {
    dense[i] = t.nodes[order[i]];
    for (uint32_t& k : dense[i].kids) k = idx.at(k);
  }

  // Intern labels so the refinement below works on integers only.
  std::vector<uint32_t> label_id(n);
  {
    std::map<std::tuple<NodeKind, std::string, uint8_t, size_t>, uint32_t> ids;
    for (uint32_t i = 0; i < n; ++i) {
      auto key = std::make_tuple(dense[i].kind, dense[i].name, dense[i].marks,
                                 dense[i].kids.size());
      auto [it, inserted] =
          ids.emplace(std::move(key), static_cast<uint32_t>(ids.size()));
      label_id[i] = it->second;
    }
  }

  // Partition refinement to bisimulation classes.
  std::vector<uint32_t> cls = label_id;
  uint32_t ncls = 0;
  for (uint32_t c : cls) ncls = std::max(ncls, c + 1);
  for (;;) {
    std::unordered_map<std::vector<uint32_t>, uint32_t, KeyVecHash> table;
    table.reserve(n * 2);
    std::vector<uint32_t> next(n);
    uint32_t fresh = 0;
    std::vector<uint32_t> key;
    for (uint32_t i = 0; i < n; ++i) {
      key.clear();
      key.push_back(label_id[i]);
      for (uint32_t k : dense[i].kids) key.push_back(cls[k]);
      auto [it, inserted] = table.emplace(key, fresh);
      if (inserted) ++fresh;
      next[i] = it->second;
    }
    if (fresh == ncls) {
      cls = std::move(next);
      break;
    }
    ncls = fresh;
    cls = std::move(next);
  }

  // Class representatives, then deterministic preorder numbering from root.
  std::vector<int64_t> repr(ncls, -1);
  for (uint32_t i = 0; i < n; ++i)
    if (repr[cls[i]] < 0) repr[cls[i]] = i;

  std::vector<int64_t> number(ncls, -1);
  std::vector<uint32_t> out_order;
  std::vector<uint32_t> stack{cls[0]};  // dense root is 0
  // Iterative preorder; children pushed right-to-left for left-first visit.
  while (!stack.empty()) {
    uint32_t c = stack.back();
    stack.pop_back();
    if (number[c] >= 0) continue;
    number[c] = static_cast<int64_t>(out_order.size());
    out_order.push_back(c);
    const Node& rn = dense[static_cast<uint32_t>(repr[c])];
    for (auto it = rn.kids.rbegin(); it != rn.kids.rend(); ++it)
      stack.push_back(cls[*it]);
  }

  PartialTerm res;
  res.nodes.resize(out_order.size());
  for (size_t i = 0; i < out_order.size(); ++i) {
    const Node& rn = dense[static_cast<uint32_t>(repr[out_order[i]])];
    Node m = rn;
    for (uint32_t& k : m.kids) k = static_cast<uint32_t>(number[cls[k]]);
    res.nodes[i] = std::move(m);
  }
  res.root = 0;
  return res;
}

size_t hash_value(const PartialTerm& t) {
  size_t h = 1469598103934665603ull;
  auto mix = [&h](size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(t.root);
  for (const Node& n : t.nodes) {
    mix(static_cast<size_t>(n.kind));
    mix(std::hash<std::string>()(n.name));
    mix(n.marks);
    for (uint32_t k : n.kids) mix(k);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Walks and position enumeration

bool in_domain(const PartialTerm& t, const Position& p) {
  uint32_t cur = t.root;
  for (uint32_t i : p) {
    const Node& n = t.nodes[cur];
    if (i >= n.kids.size()) return false;
    cur = n.kids[i];
  }
  return true;
}

uint32_t node_at(const PartialTerm& t, const Position& p) {
  uint32_t cur = t.root;
  for (uint32_t i : p) {
    const Node& n = t.nodes[cur];
    if (i >= n.kids.size())
      fail("position-out-of-domain",
           "position " + position_to_string(p) + " not in term");
    cur = n.kids[i];
  }
  return cur;
}

const Node& label_at(const PartialTerm& t, const Position& p) {
  return t.nodes[node_at(t, p)];
}

std::vector<Position> positions_to_depth(const PartialTerm& t, uint32_t d) {
  std::vector<Position> out;
  std::deque<std::pair<uint32_t, Position>> queue;
  queue.emplace_back(t.root, Position{});
  constexpr size_t kCap = 4u << 20;
  while (!queue.empty()) {
    auto [n, p] = queue.front();
    queue.pop_front();
    out.push_back(p);
    if (out.size() > kCap) fail("too-many-positions", "position window too large");
    if (p.size() == d) continue;
    const Node& node = t.nodes[n];
    for (uint32_t i = 0; i < node.kids.size(); ++i) {
      Position q = p;
      q.push_back(i);
      queue.emplace_back(node.kids[i], std::move(q));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PartialTerm subterm_at(const PartialTerm& t, const Position& p) {
  PartialTerm r = t;
  r.root = node_at(t, p);
  return canonicalize(r);
}

PartialTerm replace_at(const PartialTerm& t, const Position& p,
                       const PartialTerm& s) {
  if (!in_domain(t, p))
    fail("position-out-of-domain",
         "position " + position_to_string(p) + " not in term");
  TermBuilder b;
  const uint32_t t_root = b.import(t);
  const uint32_t s_root = b.import(s);
  if (p.empty()) return b.finish(s_root);

  // Unroll the spine from the root to p with fresh copies, then splice.
  std::vector<uint32_t> spine_nodes;  // original nodes along the spine
  uint32_t cur = t.root;
  for (uint32_t i : p) {
    spine_nodes.push_back(cur);
    cur = t.nodes[cur].kids[i];
  }
  uint32_t below = s_root;
  for (size_t i = p.size(); i-- > 0;) {
    const Node& orig = t.nodes[spine_nodes[i]];
    std::vector<uint32_t> kids;
    kids.reserve(orig.kids.size());
    for (uint32_t j = 0; j < orig.kids.size(); ++j) {
      if (j == p[i])
        kids.push_back(below);
      else
        kids.push_back(t_root - t.root + orig.kids[j]);  // imported offset
    }
    below = b.sym(orig.name, std::move(kids), orig.marks);
  }
  return b.finish(below);
}

PartialTerm truncate(const PartialTerm& t, uint32_t d) {
  if (d == kDepthInf) return canonicalize(t);
  TermBuilder b;
  const uint32_t bot = b.bottom();
  // memo on (node, remaining depth)
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> memo;
  std::function<uint32_t(uint32_t, uint32_t)> go = [&](uint32_t n,
                                                       uint32_t rest) -> uint32_t {
    if (rest == 0) return bot;
    auto key = std::make_pair(n, rest);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Node& node = t.nodes[n];
    uint32_t slot = bot;
    switch (node.kind) {
      case NodeKind::Bottom:
        slot = bot;
        break;
      case NodeKind::Var: {
        slot = b.var(node.name);
        break;
      }
      case NodeKind::Sym: {
        slot = b.reserve();
        memo[key] = slot;
        std::vector<uint32_t> kids;
        kids.reserve(node.kids.size());
        for (uint32_t k : node.kids) kids.push_back(go(k, rest - 1));
        b.fill_sym(slot, node.name, std::move(kids), node.marks);
        return slot;
      }
    }
    memo[key] = slot;
    return slot;
  };
  return b.finish(go(t.root, d));
}

// ---------------------------------------------------------------------------
// Similarity / distance / ⊥-depth

bool same_node_label(const Node& a, const Node& b) {
  return a.kind == b.kind && a.name == b.name && a.marks == b.marks &&
         a.kids.size() == b.kids.size();
}

namespace {

bool same_label(const Node& a, const Node& b) { return same_node_label(a, b); }

}  // namespace

uint32_t similarity(const PartialTerm& s, const PartialTerm& t) {
  // BFS on the product graph; the first level with a label mismatch is the
  // similarity. Revisits at greater depth cannot produce a smaller value.
  std::set<std::pair<uint32_t, uint32_t>> seen;
  std::deque<std::pair<uint32_t, uint32_t>> frontier{{s.root, t.root}};
  seen.insert({s.root, t.root});
  uint32_t depth = 0;
  while (!frontier.empty()) {
    std::deque<std::pair<uint32_t, uint32_t>> next;
    for (auto [u, v] : frontier) {
      const Node& a = s.nodes[u];
      const Node& b = t.nodes[v];
      if (!same_label(a, b)) return depth;
      for (size_t i = 0; i < a.kids.size(); ++i) {
        auto pr = std::make_pair(a.kids[i], b.kids[i]);
        if (seen.insert(pr).second) next.push_back(pr);
      }
    }
    frontier = std::move(next);
    ++depth;
  }
  return kDepthInf;
}

double TermDistance::value() const {
  if (!neg_exponent) return 0.0;
  return std::ldexp(1.0, -static_cast<int>(*neg_exponent));
}

bool TermDistance::operator<=(const TermDistance& o) const {
  if (!neg_exponent) return true;
  if (!o.neg_exponent) return false;
  return *neg_exponent >= *o.neg_exponent;
}

TermDistance distance(const PartialTerm& s, const PartialTerm& t) {
  const uint32_t sim = similarity(s, t);
  if (sim == kDepthInf) return TermDistance{std::nullopt};
  return TermDistance{sim};
}

uint32_t bot_depth(const PartialTerm& t) {
  std::vector<char> seen(t.nodes.size(), 0);
  std::deque<std::pair<uint32_t, uint32_t>> queue{{t.root, 0}};
  seen[t.root] = 1;
  while (!queue.empty()) {
    auto [n, d] = queue.front();
    queue.pop_front();
    if (t.nodes[n].kind == NodeKind::Bottom) return d;
    for (uint32_t k : t.nodes[n].kids)
      if (!seen[k]) {
        seen[k] = 1;
        queue.emplace_back(k, d + 1);
      }
  }
  return kDepthInf;
}

bool is_total(const PartialTerm& t) { return bot_depth(t) == kDepthInf; }

bool leq_bot(const PartialTerm& s, const PartialTerm& t) {
  // Product simulation: every non-⊥ position of s must carry the same
  // symbol in t. Terminates on rational terms via pair memoization.
  std::set<std::pair<uint32_t, uint32_t>> seen;
  std::deque<std::pair<uint32_t, uint32_t>> queue{{s.root, t.root}};
  seen.insert({s.root, t.root});
  while (!queue.empty()) {
    auto [u, v] = queue.front();
    queue.pop_front();
    const Node& a = s.nodes[u];
    if (a.kind == NodeKind::Bottom) continue;
    const Node& b = t.nodes[v];
    if (!same_label(a, b)) return false;
    for (size_t i = 0; i < a.kids.size(); ++i) {
      auto pr = std::make_pair(a.kids[i], b.kids[i]);
      if (seen.insert(pr).second) queue.push_back(pr);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// glb / lub

PartialTerm glb2(const PartialTerm& a, const PartialTerm& b) {
  TermBuilder bl;
  const uint32_t bot = bl.bottom();
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> memo;
  std::function<uint32_t(uint32_t, uint32_t)> go = [&](uint32_t u,
                                                       uint32_t v) -> uint32_t {
    auto key = std::make_pair(u, v);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Node& x = a.nodes[u];
    const Node& y = b.nodes[v];
    if (!same_label(x, y)) {
      memo[key] = bot;
      return bot;
    }
    switch (x.kind) {
      case NodeKind::Bottom:
        memo[key] = bot;
        return bot;
      case NodeKind::Var: {
        uint32_t slot = bl.var(x.name);
        memo[key] = slot;
        return slot;
      }
      case NodeKind::Sym: {
        uint32_t slot = bl.reserve();
        memo[key] = slot;
        std::vector<uint32_t> kids;
        kids.reserve(x.kids.size());
        for (size_t i = 0; i < x.kids.size(); ++i)
          kids.push_back(go(x.kids[i], y.kids[i]));
        bl.fill_sym(slot, x.name, std::move(kids), x.marks);
        return slot;
      }
    }
    return bot;
  };
  return bl.finish(go(a.root, b.root));
}

PartialTerm glb(const std::vector<PartialTerm>& terms) {
  if (terms.empty()) fail("empty-set", "glb of empty set");
  PartialTerm acc = canonicalize(terms[0]);
  for (size_t i = 1; i < terms.size(); ++i) acc = glb2(acc, terms[i]);
  return acc;
}

namespace {

// Union construction for binary lub; components may be absent ("gone")
// below a ⊥ of that input.
std::optional<PartialTerm> lub2(const PartialTerm& a, const PartialTerm& b) {
  using Comp = std::optional<uint32_t>;
  using Key = std::pair<Comp, Comp>;
  TermBuilder bl;
  std::map<Key, uint32_t> memo;
  bool clash = false;

  std::function<uint32_t(Comp, Comp)> go = [&](Comp u, Comp v) -> uint32_t {
    Key key{u, v};
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Node* x = u ? &a.nodes[*u] : nullptr;
    const Node* y = v ? &b.nodes[*v] : nullptr;
    const bool x_live = x && x->kind != NodeKind::Bottom;
    const bool y_live = y && y->kind != NodeKind::Bottom;
    if (!x_live && !y_live) {
      uint32_t slot = bl.bottom();
      memo[key] = slot;
      return slot;
    }
    if (x_live && y_live) {
      if (!same_label(*x, *y)) {
        clash = true;
        uint32_t slot = bl.bottom();
        memo[key] = slot;
        return slot;
      }
    }
    const Node& lead = x_live ? *x : *y;
    if (lead.kind == NodeKind::Var) {
      uint32_t slot = bl.var(lead.name);
      memo[key] = slot;
      return slot;
    }
    uint32_t slot = bl.reserve();
    memo[key] = slot;
    std::vector<uint32_t> kids;
    kids.reserve(lead.kids.size());
    for (size_t i = 0; i < lead.kids.size(); ++i) {
      Comp cu = x_live ? Comp(x->kids[i]) : std::nullopt;
      Comp cv = y_live ? Comp(y->kids[i]) : std::nullopt;
      kids.push_back(go(cu, cv));
    }
    bl.fill_sym(slot, lead.name, std::move(kids), lead.marks);
    return slot;
  };

  uint32_t root = go(Comp(a.root), Comp(b.root));
  if (clash) return std::nullopt;
  return bl.finish(root);
}

}  // namespace

std::optional<PartialTerm> lub(const std::vector<PartialTerm>& terms) {
  if (terms.empty()) fail("empty-set", "lub of empty set");
  PartialTerm acc = canonicalize(terms[0]);
  for (size_t i = 1; i < terms.size(); ++i) {
    auto next = lub2(acc, terms[i]);
    if (!next) return std::nullopt;
    acc = *next;
  }
  return acc;
}

}  // namespace irw
