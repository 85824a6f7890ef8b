#pragma once

#include <string>

#include "irw/parse.hpp"
#include "irw/print.hpp"
#include "irw/term.hpp"

namespace irw::testutil {

inline Signature sig_of(const std::string& spec) {
  Signature sig;
  size_t i = 0;
  while (i < spec.size()) {
    size_t j = spec.find(' ', i);
    if (j == std::string::npos) j = spec.size();
    std::string item = spec.substr(i, j - i);
    if (!item.empty()) {
      size_t slash = item.find('/');
      sig.add(item.substr(0, slash),
              static_cast<uint32_t>(std::stoul(item.substr(slash + 1))));
    }
    i = j + 1;
  }
  return sig;
}

// Default test signature; parse a term against it (or a custom one).
inline PartialTerm pt(const std::string& text,
                      const std::string& sigspec =
                          "f/2 g/1 s/1 h/1 a/0 b/0 c/0 0/0") {
  return parse_term(text, sig_of(sigspec));
}

inline Position pos(const std::string& text) {
  return position_from_string(text);
}

}  // namespace irw::testutil
