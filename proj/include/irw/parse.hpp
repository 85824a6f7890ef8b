#pragma once

#include <map>
#include <string>
#include <vector>

#include "irw/term.hpp"
#include "irw/trs.hpp"

namespace irw {

// Term syntax:   f(x, g(a))     mu x. f(x)     let t = g(f(t)) in t     _|_
// Identifiers that are neither in the signature nor μ/let-bound are
// variables. Named terms from `env` may be referenced by name.
PartialTerm parse_term(const std::string& text, const Signature& sig,
                       const std::map<std::string, PartialTerm>& env = {});

// Line-oriented TRS file:
//   sig f/2 g/1 a/0
//   rule r1: f(x, y) -> f(y, x)
//   term t = f(a, mu x. g(x))
// '#' starts a comment. Parse errors report line and column.
struct TrsFile {
  Trs trs;
  std::map<std::string, PartialTerm> terms;
};

TrsFile parse_trs_file(const std::string& text);
TrsFile load_trs_file(const std::string& path);

}  // namespace irw
