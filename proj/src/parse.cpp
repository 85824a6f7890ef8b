#include "irw/parse.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace irw {

namespace {

struct Token {
  enum Kind { Ident, Bottom, LPar, RPar, Comma, Dot, Arrow, Colon, Equals, Slash, End } kind;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  Lexer(const std::string& s, int line0 = 1) : s_(s), line_(line0) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (i_ >= s_.size()) {
      t.kind = Token::End;
      return t;
    }
    const char c = s_[i_];
    if (s_.compare(i_, 3, "_|_") == 0) {
      t.kind = Token::Bottom;
      t.text = "_|_";
      advance(3);
      return t;
    }
    if (s_.compare(i_, 2, "->") == 0) {
      t.kind = Token::Arrow;
      advance(2);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i_;
      while (j < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_' ||
              s_[j] == '\''))
        ++j;
      t.kind = Token::Ident;
      t.text = s_.substr(i_, j - i_);
      advance(j - i_);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i_;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
      t.kind = Token::Ident;
      t.text = s_.substr(i_, j - i_);
      advance(j - i_);
      return t;
    }
    switch (c) {
      case '(': t.kind = Token::LPar; break;
      case ')': t.kind = Token::RPar; break;
      case ',': t.kind = Token::Comma; break;
      case '.': t.kind = Token::Dot; break;
      case ':': t.kind = Token::Colon; break;
      case '=': t.kind = Token::Equals; break;
      case '/': t.kind = Token::Slash; break;
      default:
        fail("parse-error", "line " + std::to_string(line_) + ", col " +
                                std::to_string(col_) + ": unexpected character '" +
                                std::string(1, c) + "'");
    }
    advance(1);
    return t;
  }

 private:
  void skip_ws() {
    while (i_ < s_.size()) {
      if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        advance(1);
      } else {
        break;
      }
    }
  }
  void advance(size_t n) {
    for (size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
      if (s_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }
  const std::string& s_;
  size_t i_ = 0;
  int line_, col_ = 1;
};

[[noreturn]] void err_at(const Token& t, const std::string& msg) {
  fail("parse-error", "line " + std::to_string(t.line) + ", col " +
                          std::to_string(t.col) + ": " + msg);
}

class TermParser {
 public:
  TermParser(Lexer& lex, const Signature& sig,
             const std::map<std::string, PartialTerm>& env)
      : lex_(lex), sig_(sig), env_(env) {
    cur_ = lex_.next();
  }

  uint32_t parse(TermBuilder& b, std::map<std::string, uint32_t>& bound) {
    if (cur_.kind == Token::Bottom) {
      eat();
      return b.bottom();
    }
    if (cur_.kind != Token::Ident) err_at(cur_, "expected a term");
    const Token head = cur_;
    eat();
    if (head.text == "mu") {
      if (cur_.kind != Token::Ident) err_at(cur_, "expected binder after 'mu'");
      const std::string name = cur_.text;
      eat();
      expect(Token::Dot, "'.'");
      const uint32_t slot = b.reserve();
      std::optional<uint32_t> saved;
      if (auto old = bound.find(name); old != bound.end()) saved = old->second;
      bound[name] = slot;
      const uint32_t body = parse(b, bound);
      if (saved)
        bound[name] = *saved;
      else
        bound.erase(name);
      b.redirect(slot, body);
      return slot;
    }
    if (head.text == "let") {
      if (cur_.kind != Token::Ident) err_at(cur_, "expected name after 'let'");
      const std::string name = cur_.text;
      eat();
      expect(Token::Equals, "'='");
      const uint32_t slot = b.reserve();
      std::optional<uint32_t> saved;
      if (auto old = bound.find(name); old != bound.end()) saved = old->second;
      bound[name] = slot;
      const uint32_t rhs = parse(b, bound);
      b.redirect(slot, rhs);
      expect_ident("in");
      const uint32_t body = parse(b, bound);
      if (saved)
        bound[name] = *saved;
      else
        bound.erase(name);
      return body;
    }
    // μ/let-bound names shadow everything.
    if (auto it = bound.find(head.text); it != bound.end()) {
      if (cur_.kind == Token::LPar) err_at(head, "bound name takes no arguments");
      return it->second;
    }
    if (auto ar = sig_.arity_of(head.text)) {
      std::vector<uint32_t> kids;
      if (cur_.kind == Token::LPar) {
        eat();
        if (cur_.kind != Token::RPar) {
          kids.push_back(parse(b, bound));
          while (cur_.kind == Token::Comma) {
            eat();
            kids.push_back(parse(b, bound));
          }
        }
        expect(Token::RPar, "')'");
      }
      if (kids.size() != *ar)
        err_at(head, "symbol " + head.text + "/" + std::to_string(*ar) +
                         " applied to " + std::to_string(kids.size()) +
                         " arguments");
      return b.sym(head.text, std::move(kids));
    }
    if (auto it = env_.find(head.text); it != env_.end()) {
      if (cur_.kind == Token::LPar) err_at(head, "named term takes no arguments");
      return b.import(it->second);
    }
    // Unknown identifier: a variable.
    if (cur_.kind == Token::LPar)
      err_at(head, "unknown symbol '" + head.text + "' (not in signature)");
    return b.var(head.text);
  }

  void expect_end() {
    if (cur_.kind != Token::End) err_at(cur_, "trailing input after term");
  }
  Token current() const { return cur_; }
  void expect_ident(const std::string& kw) {
    if (cur_.kind != Token::Ident || cur_.text != kw)
      err_at(cur_, "expected '" + kw + "'");
    eat();
  }

 private:
  void eat() { cur_ = lex_.next(); }
  void expect(Token::Kind k, const std::string& what) {
    if (cur_.kind != k) err_at(cur_, "expected " + what);
    eat();
  }
  Lexer& lex_;
  const Signature& sig_;
  const std::map<std::string, PartialTerm>& env_;
  Token cur_;
};

}  // namespace

PartialTerm parse_term(const std::string& text, const Signature& sig,
                       const std::map<std::string, PartialTerm>& env) {
  Lexer lex(text);
  TermParser p(lex, sig, env);
  TermBuilder b;
  std::map<std::string, uint32_t> bound;
  const uint32_t root = p.parse(b, bound);
  p.expect_end();
  return b.finish(root);
}

TrsFile parse_trs_file(const std::string& text) {
  TrsFile out;
  Signature sig;
  std::vector<Rule> rules;
  std::map<std::string, PartialTerm> terms;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comment and whitespace-only lines.
    std::string body = line;
    if (size_t h = body.find('#'); h != std::string::npos) body = body.substr(0, h);
    size_t first = body.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream ls(body);
    std::string kw;
    ls >> kw;
    auto rest_of = [&]() {
      std::string rest;
      std::getline(ls, rest);
      return rest;
    };
    if (kw == "sig") {
      std::string item;
      while (ls >> item) {
        size_t slash = item.find('/');
        if (slash == std::string::npos || slash == 0 || slash + 1 >= item.size())
          fail("parse-error", "line " + std::to_string(lineno) +
                                  ": expected name/arity, got '" + item + "'");
        const std::string name = item.substr(0, slash);
        const std::string ar = item.substr(slash + 1);
        if (ar.find_first_not_of("0123456789") != std::string::npos)
          fail("parse-error",
               "line " + std::to_string(lineno) + ": bad arity in '" + item + "'");
        sig.add(name, static_cast<uint32_t>(std::stoul(ar)));
      }
    } else if (kw == "rule") {
      std::string rest = rest_of();
      size_t colon = rest.find(':');
      if (colon == std::string::npos)
        fail("parse-error",
             "line " + std::to_string(lineno) + ": expected 'rule <name>: ...'");
      std::string name = rest.substr(0, colon);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      if (name.empty())
        fail("parse-error", "line " + std::to_string(lineno) + ": empty rule name");
      std::string spec = rest.substr(colon + 1);
      size_t arrow = spec.find("->");
      if (arrow == std::string::npos)
        fail("parse-error", "line " + std::to_string(lineno) + ": missing '->'");
      try {
        PartialTerm lhs = parse_term(spec.substr(0, arrow), sig, terms);
        PartialTerm rhs = parse_term(spec.substr(arrow + 2), sig, terms);
        rules.push_back(make_rule(name, lhs, rhs));
      } catch (const Error& e) {
        fail("parse-error",
             "line " + std::to_string(lineno) + ": " + std::string(e.what()));
      }
    } else if (kw == "term") {
      std::string rest = rest_of();
      size_t eq = rest.find('=');
      if (eq == std::string::npos)
        fail("parse-error",
             "line " + std::to_string(lineno) + ": expected 'term <name> = ...'");
      std::string name = rest.substr(0, eq);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      if (name.empty())
        fail("parse-error", "line " + std::to_string(lineno) + ": empty term name");
      try {
        terms[name] = parse_term(rest.substr(eq + 1), sig, terms);
      } catch (const Error& e) {
        fail("parse-error",
             "line " + std::to_string(lineno) + ": " + std::string(e.what()));
      }
    } else {
      fail("parse-error", "line " + std::to_string(lineno) +
                              ": unknown directive '" + kw + "'");
    }
  }
  out.trs = Trs(sig, rules);
  out.terms = std::move(terms);
  return out;
}

TrsFile load_trs_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail("io-error", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_trs_file(ss.str());
}

}  // namespace irw
