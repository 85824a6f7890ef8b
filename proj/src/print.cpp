#include "irw/print.hpp"

#include <functional>
#include <set>
#include <unordered_map>
#include <vector>

namespace irw {

namespace {

// Nodes that are entered twice on the same DFS path need a μ-binder.
void find_loop_nodes(const PartialTerm& t, std::set<uint32_t>& loops) {
  enum { White, Grey, Black };
  std::vector<int> color(t.nodes.size(), White);
  std::function<void(uint32_t)> dfs = [&](uint32_t n) {
    color[n] = Grey;
    for (uint32_t k : t.nodes[n].kids) {
      if (color[k] == Grey)
        loops.insert(k);
      else if (color[k] == White)
        dfs(k);
    }
    color[n] = Black;
  };
  dfs(t.root);
}

std::string fresh_name(std::set<std::string>& used) {
  static const char* base[] = {"x", "y", "z", "u", "v", "w"};
  for (const char* b : base)
    if (!used.count(b)) {
      used.insert(b);
      return b;
    }
  for (int i = 1;; ++i)
    for (const char* b : base) {
      std::string cand = std::string(b) + std::to_string(i);
      if (!used.count(cand)) {
        used.insert(cand);
        return cand;
      }
    }
}

}  // namespace

std::string to_string(const PartialTerm& t) {
  std::set<uint32_t> loops;
  find_loop_nodes(t, loops);

  std::set<std::string> used;
  for (const Node& n : t.nodes)
    if (!n.name.empty()) used.insert(n.name);

  // Binder names in preorder of first visit so rendering is deterministic.
  std::unordered_map<uint32_t, std::string> binder;
  {
    std::vector<char> seen(t.nodes.size(), 0);
    std::function<void(uint32_t)> pre = [&](uint32_t n) {
      if (seen[n]) return;
      seen[n] = 1;
      if (loops.count(n)) binder[n] = fresh_name(used);
      for (uint32_t k : t.nodes[n].kids) pre(k);
    };
    pre(t.root);
  }

  std::vector<char> onstack(t.nodes.size(), 0);
  std::function<std::string(uint32_t)> emit = [&](uint32_t n) -> std::string {
    if (onstack[n]) return binder.at(n);
    std::string s;
    const bool bound = binder.count(n) != 0;
    if (bound) {
      s += "mu " + binder.at(n) + ". ";
      onstack[n] = 1;
    }
    const Node& node = t.nodes[n];
    switch (node.kind) {
      case NodeKind::Bottom:
        s += "_|_";
        break;
      case NodeKind::Var:
        s += node.name;
        break;
      case NodeKind::Sym:
        s += node.name;
        if (!node.kids.empty()) {
          s += "(";
          for (size_t i = 0; i < node.kids.size(); ++i) {
            if (i) s += ", ";
            s += emit(node.kids[i]);
          }
          s += ")";
        }
        break;
    }
    if (bound) onstack[n] = 0;
    return s;
  };
  return emit(t.root);
}

}  // namespace irw
