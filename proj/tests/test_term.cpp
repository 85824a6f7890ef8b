#include <doctest.h>

#include <algorithm>
#include <functional>

#include "irw/print.hpp"
#include "irw/term.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"
#include "support/util.hpp"

using namespace irw;
using testutil::pos;
using testutil::pt;

TEST_CASE("positions_to_depth") {
  CHECK(positions_to_depth(pt("f(a, b)"), 0) == std::vector<Position>{{}});
  // unary unfolding of a self-loop
  CHECK(positions_to_depth(pt("mu x. g(x)"), 2) ==
        std::vector<Position>{{}, {0}, {0, 0}});
  // breadth-first unfolding oracle
  PartialTerm t = pt("f(s(0), s(h(0)))");
  auto table = oracle::table_of(t, 2);
  std::vector<Position> expect;
  for (auto& [p, e] : table.at) expect.push_back(p);
  std::sort(expect.begin(), expect.end());
  CHECK(positions_to_depth(t, 2) == expect);
  CHECK(expect == std::vector<Position>{{}, {0}, {0, 0}, {1}, {1, 0}});
}

TEST_CASE("symbol_at") {
  CHECK(label_at(pt("f(a, b)"), pos("1")).name == "b");
  CHECK(label_at(pt("mu x. g(f1(x))", "g/1 f1/1"), pos("0.0")).name == "g");
  CHECK(label_at(pt("f(_|_, g(c))"), pos("0")).kind == NodeKind::Bottom);
  CHECK_THROWS_AS((void)label_at(pt("a"), pos("0")), Error);
}

TEST_CASE("subterm_at") {
  PartialTerm t = pt("f(a, b)");
  CHECK(subterm_at(t, {}) == t);
  // re-rooting a 2-cycle
  CHECK(subterm_at(pt("mu x. g(f1(x))", "g/1 f1/1"), pos("0")) ==
        pt("mu y. f1(g(y))", "g/1 f1/1"));
  CHECK(subterm_at(pt("f(s(0), s(h(0)))"), pos("1.0")) == pt("h(0)"));
}

TEST_CASE("replace_at") {
  CHECK(replace_at(pt("f(a, b)"), pos("0"), pt("c")) == pt("f(c, b)"));
  CHECK(replace_at(pt("g(h(a))"), pos("0"), mk_bottom()) == pt("g(_|_)"));
  // on a cyclic graph the spine is unrolled first
  CHECK(replace_at(pt("mu x. g(f1(x))", "g/1 f1/1 a/0"), pos("0"),
                   pt("a", "a/0")) == pt("g(a)", "g/1 a/0"));
  CHECK_THROWS_AS(replace_at(pt("a"), pos("1"), pt("a")), Error);
}

TEST_CASE("truncate") {
  CHECK(truncate(pt("f(g(a), b)"), 1) == pt("f(_|_, _|_)"));
  CHECK(truncate(pt("f(g(a), b)"), 0) == mk_bottom());
  CHECK(truncate(pt("mu x. g(x)"), 0) == mk_bottom());
  CHECK(truncate(pt("mu x. f1(x)", "f1/1"), 3) ==
        pt("f1(f1(f1(_|_)))", "f1/1"));
  PartialTerm t = pt("f(s(0), s(h(0)))");
  CHECK(truncate(t, kDepthInf) == t);
}

TEST_CASE("similarity and distance") {
  PartialTerm t = pt("f(s(a), b)");
  CHECK(similarity(t, t) == kDepthInf);
  CHECK(similarity(pt("f(a, b)"), pt("g2(a, b)", "f/2 g2/2 a/0 b/0")) == 0);
  CHECK(similarity(pt("f(a, b)"), pt("f(a, c)")) == 1);
  CHECK(distance(t, t).value() == 0.0);
  CHECK(distance(pt("f(a, b)"), pt("g2(a, b)", "f/2 g2/2 a/0 b/0")).value() ==
        1.0);
  CHECK(distance(pt("f(a, b)"), pt("f(a, c)")).value() == 0.5);
}

TEST_CASE("bot_depth") {
  CHECK(bot_depth(mk_bottom()) == 0);
  CHECK(bot_depth(pt("f(a, g(_|_))")) == 2);
  CHECK(bot_depth(pt("mu x. f1(x)", "f1/1")) == kDepthInf);
}

TEST_CASE("leq_bot") {
  PartialTerm t = pt("f(g(a), s(b))");
  CHECK(leq_bot(mk_bottom(), t));
  CHECK(leq_bot(pt("f(_|_, b)"), pt("f(a, b)")));
  CHECK_FALSE(leq_bot(pt("f(a, _|_)"), pt("f(_|_, b)")));
  CHECK_FALSE(leq_bot(pt("f(_|_, b)"), pt("f(a, _|_)")));
}

TEST_CASE("glb") {
  CHECK(glb({pt("f(a, b)"), pt("f(a, c)")}) == pt("f(a, _|_)"));
  PartialTerm t = pt("f(g(a), b)");
  CHECK(glb({t}) == t);
  // paper's weak-vs-strong example value
  CHECK(glb({pt("f(a, f(g(a), g(b)))"), pt("f(a, f(g(b), g(a)))")}) ==
        pt("f(a, f(g(_|_), g(_|_)))"));
}

TEST_CASE("lub") {
  CHECK(lub({pt("f(a, _|_)"), pt("f(_|_, b)")}) == pt("f(a, b)"));
  PartialTerm t = pt("f(g(a), b)");
  CHECK(lub({mk_bottom(), t}) == t);
  CHECK_FALSE(lub({pt("f(a, _|_)"), pt("g(_|_)")}).has_value());
}

TEST_CASE("canonicalize merges bisimilar nodes") {
  // two distinct 'a' nodes merge
  {
    TermBuilder b;
    uint32_t a1 = b.sym("a", {});
    uint32_t a2 = b.sym("a", {});
    PartialTerm t = b.finish(b.sym("f", {a1, a2}));
    CHECK(t.nodes.size() == 2);
  }
  // f(g(a), g(a)) shares one g(a)
  {
    PartialTerm t = pt("f(g(a), g(a))");
    CHECK(t.nodes.size() == 3);
    CHECK(t.nodes[t.root].kids[0] == t.nodes[t.root].kids[1]);
  }
  // a 2-node f-cycle minimizes to a self-loop
  {
    TermBuilder b;
    uint32_t n0 = b.reserve();
    uint32_t n1 = b.reserve();
    b.fill_sym(n0, "f1", {n1});
    b.fill_sym(n1, "f1", {n0});
    PartialTerm t = b.finish(n0);
    CHECK(t.nodes.size() == 1);
    CHECK(t == pt("mu x. f1(x)", "f1/1"));
  }
}

TEST_CASE("canonicalize is idempotent and preserves position windows") {
  testgen::Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    PartialTerm t = testgen::random_rational(rng, 8);
    PartialTerm c = canonicalize(t);
    CHECK(c == canonicalize(c));
    CHECK(truncate(t, 16) == truncate(c, 16));
    CHECK(positions_to_depth(t, 6) == positions_to_depth(c, 6));
  }
}

TEST_CASE("truncation properties") {
  testgen::Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    PartialTerm t = testgen::random_rational(rng, 10);
    PartialTerm s = testgen::random_rational(rng, 10);
    for (uint32_t d : {0u, 1u, 3u, 8u, 32u}) {
      CHECK(leq_bot(truncate(t, d), t));
      // total s with s|d ⊑ t forces s|d = t|d
      if (is_total(s) && leq_bot(truncate(s, d), t))
        CHECK(truncate(s, d) == truncate(t, d));
    }
    bool all_equal = true;
    for (uint32_t d = 0; d <= 32; ++d)
      if (!(truncate(t, d) == truncate(s, d))) {
        all_equal = false;
        break;
      }
    CHECK(all_equal == (t == s));
  }
}

TEST_CASE("similarity characterisations") {
  testgen::Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    PartialTerm s = testgen::random_rational(rng, 8, false);
    PartialTerm t = testgen::random_rational(rng, 8, false);
    const uint32_t sim = similarity(s, t);
    // sim = max{d : s|d = t|d}
    uint32_t max_d = 0;
    bool exceeded = false;
    for (uint32_t d = 0; d <= 32; ++d) {
      if (truncate(s, d) == truncate(t, d))
        max_d = d;
      else {
        exceeded = true;
        break;
      }
    }
    if (!exceeded)
      CHECK(sim == kDepthInf);
    else
      CHECK(sim == max_d);
    // sim = bot-depth of the glb for total terms
    CHECK(sim == bot_depth(glb({s, t})));
    // oracle: minimal disagreement depth over a finite window
    uint32_t osim = oracle::similarity_at_depth(s, t, 16);
    if (sim <= 16) CHECK(sim == osim);
  }
}

TEST_CASE("ultrametric") {
  testgen::Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    PartialTerm x = testgen::random_rational(rng, 6);
    PartialTerm y = testgen::random_rational(rng, 6);
    PartialTerm z = testgen::random_rational(rng, 6);
    CHECK((distance(x, y).value() == 0.0) == (x == y));
    CHECK(distance(x, y) == distance(y, x));
    TermDistance xz = distance(x, z);
    TermDistance xy = distance(x, y);
    TermDistance yz = distance(y, z);
    CHECK((xz <= xy || xz <= yz));
  }
}

TEST_CASE("lattice laws against the truncation oracle") {
  testgen::Rng rng(19);
  for (int i = 0; i < 300; ++i) {
    PartialTerm x = testgen::random_rational(rng, 6);
    PartialTerm y = testgen::random_rational(rng, 6);
    PartialTerm z = testgen::random_rational(rng, 6);
    CHECK(glb({x, x}) == x);
    CHECK(glb({x, y}) == glb({y, x}));
    CHECK(glb({glb({x, y}), z}) == glb({x, glb({y, z})}));
    CHECK(leq_bot(glb({x, y, z}), x));
    CHECK(leq_bot(glb({x, y, z}), y));
    // against the definition-led oracle, inside the window
    CHECK(truncate(glb({x, y}), 8) ==
          truncate(oracle::glb_at_depth({x, y}, 9), 8));
    auto l = lub({x, y});
    auto ol = oracle::lub_at_depth({x, y}, 9);
    CHECK(l.has_value() == ol.has_value());
    if (l) {
      CHECK(truncate(*l, 8) == truncate(*ol, 8));
      CHECK(leq_bot(x, *l));
      CHECK(leq_bot(y, *l));
      // least among upper bounds within the window
      PartialTerm ub = *l;  // any upper bound v satisfies lub ⊑ v; probe with
                            // the oracle's union itself
      CHECK(oracle::leq_at_depth(*l, ub, 8));
    }
    // lub agrees with idempotence / unit laws
    CHECK(lub({x, x}).value() == x);
    CHECK(lub({mk_bottom(), x}).value() == x);
  }
}

TEST_CASE("lub is least among upper bounds (explicit probes)") {
  testgen::Rng rng(23);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 100; ++i) {
    PartialTerm x = testgen::random_rational(rng, 5);
    PartialTerm y = testgen::random_rational(rng, 5);
    auto l = lub({x, y});
    if (!l) continue;
    // generate candidate upper bounds by extending the lub upwards
    PartialTerm bigger = *l;
    if (!is_total(bigger)) {
      // replacing one ⊥ with a constant keeps it an upper bound
      for (const Position& p : positions_to_depth(bigger, 6)) {
        if (label_at(bigger, p).kind == NodeKind::Bottom) {
          PartialTerm v = replace_at(bigger, p, pt("a"));
          CHECK(leq_bot(x, v));
          CHECK(leq_bot(y, v));
          CHECK(leq_bot(*l, v));
          ++checked;
          break;
        }
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("print / parse round trip") {
  testgen::Rng rng(29);
  for (int i = 0; i < 300; ++i) {
    PartialTerm t = testgen::random_rational(rng, 9);
    CHECK(parse_term(to_string(t), testgen::small_signature()) == t);
  }
  CHECK(to_string(pt("mu x. g(x)")) == "mu x. g(x)");
  CHECK(to_string(mk_bottom()) == "_|_");
  CHECK(to_string(pt("f(_|_, mu x. g(x))")) == "f(_|_, mu x. g(x))");
  // recursion equations parse to the same graph as μ-notation
  CHECK(pt("let t = g(f1(t)) in t", "g/1 f1/1") ==
        pt("mu x. g(f1(x))", "g/1 f1/1"));
}

TEST_CASE("variables in the order and lattice") {
  PartialTerm x = mk_var("x");
  PartialTerm y = mk_var("y");
  CHECK(glb({pt("f(x, a)"), pt("f(y, a)")}) == pt("f(_|_, a)"));
  CHECK(glb({pt("f(x, a)"), pt("f(x, b)")}) == pt("f(x, _|_)"));
  CHECK(lub({x, mk_bottom()}).value() == x);
  CHECK_FALSE(lub({x, y}).has_value());
  CHECK(leq_bot(mk_bottom(), x));
  CHECK_FALSE(leq_bot(x, y));
  CHECK(similarity(x, y) == 0);
}

TEST_CASE("binder names avoid names already in the term") {
  // the variable x occurs free, so the loop binder picks another name
  PartialTerm t = pt("f(x, mu y. g(y))");
  CHECK(to_string(t) == "f(x, mu y. g(y))");
  CHECK(parse_term(to_string(t), testutil::sig_of("f/2 g/1")) == t);
}
