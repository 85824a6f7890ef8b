#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace irw {

// Stable machine-readable error codes surface through the CLI.
struct Error : std::runtime_error {
  std::string code;
  Error(std::string c, const std::string& msg)
      : std::runtime_error(msg), code(std::move(c)) {}
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
  throw Error(code, msg);
}

// ---------------------------------------------------------------------------
// Positions

using Position = std::vector<uint32_t>;

bool is_prefix(const Position& p, const Position& q);          // p <= q
bool is_strict_prefix(const Position& p, const Position& q);   // p < q
bool disjoint(const Position& p, const Position& q);
Position concat(const Position& p, const Position& q);
// q with prefix p removed; requires is_prefix(p, q).
Position strip_prefix(const Position& p, const Position& q);
std::string position_to_string(const Position& p);
Position position_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Symbols and signatures

struct Symbol {
  std::string name;
  uint32_t arity = 0;
  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

// A finite set of function symbols. The reserved constant ⊥ is implicit in
// every signature (it is a node kind, never a declared symbol).
class Signature {
 public:
  void add(const std::string& name, uint32_t arity);
  bool contains(const std::string& name) const;
  std::optional<uint32_t> arity_of(const std::string& name) const;
  const std::map<std::string, uint32_t>& symbols() const { return syms_; }

 private:
  std::map<std::string, uint32_t> syms_;
};

// ---------------------------------------------------------------------------
// Partial terms as canonical rational term graphs
//
// A PartialTerm is a finite rooted ordered graph; cycles denote infinite
// regular terms. After canonicalize() (bisimulation minimization plus a
// deterministic preorder node numbering with root 0) two terms denote the
// same element of T∞(Σ⊥, V) iff their node arrays are identical, so
// operator== is semantic equality and terms hash cheaply.

enum class NodeKind : uint8_t { Sym, Var, Bottom };

// Residual-tracking marks: develop/boehm thread occurrence sets through
// reductions as labelled symbols. Marks are part of the node label (the
// labelled signature Σ^ℓ) but ignored by rule matching.
constexpr uint8_t kMarkA = 1;  // primary tracked set
constexpr uint8_t kMarkB = 2;  // secondary tracked set

struct Node {
  NodeKind kind = NodeKind::Bottom;
  std::string name;            // symbol or variable name; empty for ⊥
  uint8_t marks = 0;
  std::vector<uint32_t> kids;  // empty unless kind == Sym

  friend bool operator==(const Node&, const Node&) = default;
};

struct PartialTerm {
  std::vector<Node> nodes;  // canonical: root is node 0, preorder numbering
  uint32_t root = 0;

  bool valid() const { return root < nodes.size(); }
  const Node& node(uint32_t i) const { return nodes[i]; }
  size_t size() const { return nodes.size(); }

  friend bool operator==(const PartialTerm& a, const PartialTerm& b) {
    return a.root == b.root && a.nodes == b.nodes;
  }
};

size_t hash_value(const PartialTerm& t);

// Label equality (kind, name, marks, arity); child structure not followed.
bool same_node_label(const Node& a, const Node& b);

struct PartialTermHash {
  size_t operator()(const PartialTerm& t) const { return hash_value(t); }
};

// Mutable builder for assembling term graphs (parser, tests, internal ops).
class TermBuilder {
 public:
  uint32_t sym(const std::string& name, std::vector<uint32_t> kids,
               uint8_t marks = 0);
  uint32_t var(const std::string& name);
  uint32_t bottom();
  // Reserve a node to be filled later (cycles / forward references).
  uint32_t reserve();
  void fill_sym(uint32_t slot, const std::string& name,
                std::vector<uint32_t> kids, uint8_t marks = 0);
  void redirect(uint32_t slot, uint32_t target);  // alias slot to target
  // Copy all nodes of t into this builder; returns the index of t's root.
  uint32_t import(const PartialTerm& t);
  PartialTerm finish(uint32_t root);  // canonicalizes

 private:
  std::vector<Node> nodes_;
  std::vector<std::optional<uint32_t>> alias_;
  uint32_t resolve(uint32_t i) const;
};

// Convenience constructors.
PartialTerm mk_bottom();
PartialTerm mk_var(const std::string& name);
PartialTerm mk_sym(const std::string& name, const std::vector<PartialTerm>& kids);

// ---------------------------------------------------------------------------
// term_core operations

// Bisimulation minimization + deterministic renumbering. Idempotent.
PartialTerm canonicalize(const PartialTerm& t);

constexpr uint32_t kDepthInf = UINT32_MAX;  // stands for ∞ / unbounded

bool in_domain(const PartialTerm& t, const Position& p);
// Graph node reached by walking p from the root. position-out-of-domain
// if p ∉ pos(t).
uint32_t node_at(const PartialTerm& t, const Position& p);

// t(π): the symbol / variable / ⊥ at π.
const Node& label_at(const PartialTerm& t, const Position& p);

// { π ∈ pos(t) : |π| ≤ d }, prefix-closed, sorted.
std::vector<Position> positions_to_depth(const PartialTerm& t, uint32_t d);

// t|π as a canonical term (re-roots the graph).
PartialTerm subterm_at(const PartialTerm& t, const Position& p);

// t[s]π. On cyclic graphs the spine from the root to π is unrolled so only
// the designated occurrence is replaced.
PartialTerm replace_at(const PartialTerm& t, const Position& p,
                       const PartialTerm& s);

// Truncation: t|0 = ⊥, t|∞ = t, symbols above depth d kept, everything at
// depth d replaced by ⊥. Finite (acyclic) for finite d.
PartialTerm truncate(const PartialTerm& t, uint32_t d);

// Minimal depth of disagreement; kDepthInf iff s == t.
uint32_t similarity(const PartialTerm& s, const PartialTerm& t);

// d(s,t) = 2^(-sim(s,t)) as an exact dyadic rational.
struct TermDistance {
  // nullopt encodes distance 0 (infinite similarity).
  std::optional<uint32_t> neg_exponent;
  double value() const;
  friend bool operator==(const TermDistance&, const TermDistance&) = default;
  bool operator<=(const TermDistance& o) const;
};
TermDistance distance(const PartialTerm& s, const PartialTerm& t);

// Minimal depth of a ⊥ occurrence; kDepthInf for total terms.
uint32_t bot_depth(const PartialTerm& t);

bool is_total(const PartialTerm& t);

// s ⊑⊥ t  (s(π) = t(π) for every non-⊥ position π of s).
bool leq_bot(const PartialTerm& s, const PartialTerm& t);

// Greatest lower bound of a non-empty set (product construction).
PartialTerm glb(const std::vector<PartialTerm>& terms);
PartialTerm glb2(const PartialTerm& a, const PartialTerm& b);

// Least upper bound (union construction), or nullopt if the set has no
// upper bound (two inputs carry distinct non-⊥ symbols at a common
// position).
std::optional<PartialTerm> lub(const std::vector<PartialTerm>& terms);

}  // namespace irw
