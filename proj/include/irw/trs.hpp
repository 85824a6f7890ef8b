#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irw/term.hpp"

namespace irw {

struct Rule {
  std::string id;
  PartialTerm lhs;  // finite, ⊥-free, non-variable
  PartialTerm rhs;  // rational, ⊥-free, vars(rhs) ⊆ vars(lhs)
  bool collapsing = false;
  std::vector<Position> pattern_positions;  // posF(lhs)
};

struct LinearityWitness {
  std::string rule_id;
  std::string variable;
};

struct OverlapWitness {
  std::string rule1;
  std::string rule2;
  Position at;
};

class Trs {
 public:
  Trs() = default;
  Trs(Signature sig, std::vector<Rule> rules);

  const Signature& signature() const { return sig_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const Rule& rule(size_t i) const { return rules_[i]; }
  std::optional<size_t> rule_index(const std::string& id) const;

  bool left_linear() const { return left_linear_; }
  const std::optional<LinearityWitness>& linearity_witness() const {
    return lin_witness_;
  }
  bool orthogonal() const { return orthogonal_; }
  const std::optional<OverlapWitness>& overlap_witness() const {
    return overlap_witness_;
  }

  // Symbols heading some rule lhs.
  const std::set<std::string>& lhs_heads() const { return lhs_heads_; }
  uint32_t max_lhs_depth() const { return max_lhs_depth_; }
  // rhs_instance_of_lhs[i][j]: rhs of rule i is an instance of lhs of rule
  // j, i.e. every contractum of rule i is a rule-j redex.
  bool rhs_instance_of_lhs(size_t i, size_t j) const {
    return rhs_inst_[i][j];
  }
  // Rule i lies on a cycle of the rhs-instance relation: contracting at a
  // position keeps it a redex forever.
  bool on_root_loop(size_t i) const { return root_loop_[i]; }

 private:
  Signature sig_;
  std::vector<Rule> rules_;
  bool left_linear_ = true;
  std::optional<LinearityWitness> lin_witness_;
  bool orthogonal_ = true;
  std::optional<OverlapWitness> overlap_witness_;
  std::set<std::string> lhs_heads_;
  uint32_t max_lhs_depth_ = 0;
  std::vector<std::vector<bool>> rhs_inst_;
  std::vector<bool> root_loop_;
};

struct Substitution {
  std::map<std::string, PartialTerm> bindings;
};

// Variable occurrences of a finite lhs tree, and general variable sets.
std::vector<std::pair<Position, std::string>> variable_occurrences(
    const PartialTerm& finite_term);
std::set<std::string> variables_of(const PartialTerm& t);
uint32_t term_depth_finite(const PartialTerm& finite_term);

// Matching lσ = t. ⊥ in t may be bound by a variable but never matches a
// function symbol of the lhs. Marks on t are ignored. Non-linear lhs bind
// consistently (same canonical subterm).
std::optional<Substitution> match(const PartialTerm& lhs, const PartialTerm& t);
// Node-level variant used by the rewrite machinery: bindings point at
// nodes of t. nullopt = no-match.
std::optional<std::map<std::string, uint32_t>> match_at(const PartialTerm& lhs,
                                                        const PartialTerm& t,
                                                        uint32_t t_node);

// Homomorphic extension; graph sharing preserved; canonical output.
PartialTerm apply_subst(const Substitution& s, const PartialTerm& t);

// t[rσ]π with σ = match(rule.lhs, t|π). not-a-redex if the match fails.
PartialTerm rewrite_step(const Trs& trs, const PartialTerm& t,
                         const Position& p, const Rule& rule);

struct Redex {
  Position at;
  size_t rule = 0;
};

// All (π, ρ) with |π| ≤ depth and t|π a ρ-redex.
std::vector<Redex> redexes(const Trs& trs, const PartialTerm& t, uint32_t depth);

// Node designators: every (node, rule) with the node's subterm a redex.
std::vector<std::pair<uint32_t, size_t>> node_redexes(const Trs& trs,
                                                      const PartialTerm& t);
bool has_redex(const Trs& trs, const PartialTerm& t);
bool is_redex_node(const Trs& trs, const PartialTerm& t, uint32_t node,
                   size_t* rule_out = nullptr);

struct LinearityReport {
  bool left_linear;
  std::optional<LinearityWitness> witness;
};
LinearityReport check_left_linear(const Signature& sig,
                                  const std::vector<Rule>& rules);

struct OrthogonalityReport {
  bool orthogonal;
  std::optional<LinearityWitness> linearity_witness;
  std::optional<OverlapWitness> overlap_witness;
};
OrthogonalityReport check_orthogonal(const Signature& sig,
                                     const std::vector<Rule>& rules);

// Syntactic unification of finite terms (used for overlap detection).
bool unifiable(const PartialTerm& a, const PartialTerm& b);

// Rule construction with invariant checks (finite ⊥-free non-variable lhs,
// rational ⊥-free rhs, vars(rhs) ⊆ vars(lhs)).
Rule make_rule(const std::string& id, const PartialTerm& lhs,
               const PartialTerm& rhs);

}  // namespace irw
