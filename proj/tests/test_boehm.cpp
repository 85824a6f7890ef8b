#include <doctest.h>

#include "irw/boehm.hpp"
#include "irw/parse.hpp"
#include "irw/print.hpp"
#include "support/gen.hpp"
#include "support/util.hpp"

using namespace irw;
using testutil::pos;
using testutil::pt;

namespace {

Trs trs_of(const std::string& text) { return parse_trs_file(text).trs; }

}  // namespace

TEST_CASE("root_active verdicts") {
  {
    // collapsing tower f^w: yes
    TrsFile f = parse_trs_file("sig f1/1\nrule rf: f1(x) -> x\nterm t = mu s. f1(s)\n");
    RaVerdict v = root_active(f.trs, f.terms.at("t"), kDefaultFuel);
    CHECK(v.verdict == RaVerdict::Yes);
  }
  {
    // b -> g(b): g(b) is root-stable by signature
    Trs trs = trs_of("sig g/1 b/0\nrule rb: b -> g(b)\n");
    RaVerdict v = root_active(trs, pt("b", "b/0"), kDefaultFuel);
    CHECK(v.verdict == RaVerdict::No);
    CHECK(v.certificate == RaVerdict::RootStable);
  }
  {
    // h(x) -> h(g(x)): root-loop (rhs re-matches the lhs)
    Trs trs = trs_of("sig h/1 g/1 a/0\nrule rh: h(x) -> h(g(x))\n");
    RaVerdict v = root_active(trs, pt("h(a)", "h/1 a/0"), kDefaultFuel);
    CHECK(v.verdict == RaVerdict::Yes);
    CHECK(v.certificate == RaVerdict::RootLoop);
  }
  {
    // a -> f(a): f(a) is root-stable
    Trs trs = trs_of("sig f/1 a/0\nrule ra: a -> f(a)\n");
    RaVerdict v = root_active(trs, pt("a", "f/1 a/0"), kDefaultFuel);
    CHECK(v.verdict == RaVerdict::No);
  }
  {
    // normal form s(0): complete exploration, no root redex anywhere
    Trs trs = trs_of("sig s/1 g/1 h/1 0/0\nrule r1: h(x) -> g(x)\nrule r2: s(g(x)) -> s(h(s(x)))\n");
    RaVerdict v = root_active(trs, pt("s(0)", "s/1 0/0"), kDefaultFuel);
    CHECK(v.verdict == RaVerdict::No);
    CHECK(v.certificate == RaVerdict::DeadEnd);
  }
  {
    // mconfl: g(f(g(f(...)))) is root-active (contract-root orbit cycles)
    TrsFile f = parse_trs_file(
        "sig f1/1 g/1\nrule rf: f1(x) -> x\nrule rg: g(x) -> x\n"
        "term t = mu x. g(f1(x))\n");
    RaVerdict v = root_active(f.trs, f.terms.at("t"), kDefaultFuel);
    CHECK(v.verdict == RaVerdict::Yes);
  }
  {
    // non-orthogonal systems are rejected
    Trs trs = trs_of("sig f/2 c/0\nrule nl: f(x, x) -> c\n");
    CHECK_THROWS_AS(root_active(trs, pt("c", "c/0"), 10), Error);
  }
}

TEST_CASE("fragile verdicts mirror root_active") {
  {
    TrsFile f = parse_trs_file(
        "sig f1/1 g/1\nrule rf: f1(x) -> x\nrule rg: g(x) -> x\n"
        "term t = mu x. g(f1(x))\n");
    CHECK(fragile(f.trs, f.terms.at("t"), kDefaultFuel).verdict == RaVerdict::Yes);
  }
  {
    Trs trs = trs_of("sig f/1 a/0\nrule ra: a -> f(a)\n");
    CHECK(fragile(trs, pt("a", "f/1 a/0"), kDefaultFuel).verdict == RaVerdict::No);
  }
  {
    // a total normal form is not fragile
    Trs trs = trs_of("sig g/1 b/0\nrule rb: b -> g(b)\n");
    CHECK(fragile(trs, pt("g(g(b))", "g/1 b/0"), kDefaultFuel).verdict ==
          RaVerdict::No);
  }
}

TEST_CASE("root_active and fragile never contradict on random terms") {
  testgen::Rng rng(73);
  int contradictions = 0, decided = 0;
  for (int i = 0; i < 500; ++i) {
    Trs trs = testgen::random_orthogonal(rng, 3);
    PartialTerm t = testgen::random_rational(rng, 6, false);
    if (!is_total(t)) continue;
    RaVerdict a = root_active(trs, t, 300);
    RaVerdict b = fragile(trs, t, 300);
    if (a.verdict != RaVerdict::Unknown && b.verdict != RaVerdict::Unknown) {
      ++decided;
      if (a.verdict != b.verdict) ++contradictions;
    }
  }
  CHECK(contradictions == 0);
  CHECK(decided > 200);
}

TEST_CASE("certified root-activeness is closed under explored reductions") {
  TrsFile f = parse_trs_file(
      "sig f1/1 g/1\nrule rf: f1(x) -> x\nrule rg: g(x) -> x\n"
      "term t = mu x. g(f1(x))\n");
  PartialTerm t = f.terms.at("t");
  REQUIRE(root_active(f.trs, t, kDefaultFuel).verdict == RaVerdict::Yes);
  // every one-step reduct within the window stays certified-yes
  for (const Redex& r : redexes(f.trs, t, 3)) {
    PartialTerm u = rewrite_step(f.trs, t, r.at, f.trs.rule(r.rule));
    CHECK(root_active(f.trs, u, kDefaultFuel).verdict == RaVerdict::Yes);
  }
}

TEST_CASE("in_ra_bot") {
  {
    // f(_|_) with witness f^w: f(f^w) is root-active
    Trs trs = trs_of("sig f1/1\nrule rf: f1(x) -> x\n");
    PartialTerm w = pt("mu s. f1(s)", "f1/1");
    RaVerdict v = in_ra_bot(trs, pt("f1(_|_)", "f1/1"), kDefaultFuel, w);
    CHECK(v.verdict == RaVerdict::Yes);
    // the witness is auto-detected as well
    RaVerdict v2 = in_ra_bot(trs, pt("f1(_|_)", "f1/1"), kDefaultFuel);
    CHECK(v2.verdict == RaVerdict::Yes);
  }
  {
    // bottom itself is excluded
    Trs trs = trs_of("sig f1/1\nrule rf: f1(x) -> x\n");
    CHECK(in_ra_bot(trs, mk_bottom(), kDefaultFuel).verdict == RaVerdict::No);
  }
  {
    // bottom-free root-stable term
    Trs trs = trs_of("sig g/1 b/0\nrule rb: b -> g(b)\n");
    CHECK(in_ra_bot(trs, pt("g(b)", "g/1 b/0"), kDefaultFuel).verdict ==
          RaVerdict::No);
  }
}

TEST_CASE("boehm_step") {
  {
    // whole mconfl term is certified root-active: one step to bottom
    TrsFile f = parse_trs_file(
        "sig f1/1 g/1\nrule rf: f1(x) -> x\nrule rg: g(x) -> x\n"
        "term t = mu x. g(f1(x))\n");
    auto s = boehm_step(f.trs, f.terms.at("t"), kDefaultFuel);
    REQUIRE(s.has_value());
    CHECK(*s == mk_bottom());
  }
  {
    // f(h(a), b): h(a) certified, b not
    Trs trs = trs_of(
        "sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\nrule rb: b -> g(b)\n");
    auto s = boehm_step(trs, pt("f(h(a), b)"), kDefaultFuel);
    REQUIRE(s.has_value());
    CHECK(*s == pt("f(_|_, b)"));
    CHECK_FALSE(boehm_step(trs, *s, kDefaultFuel).has_value());
  }
  {
    Trs trs = trs_of("sig g/1 b/0\nrule rb: b -> g(b)\n");
    CHECK_FALSE(boehm_step(trs, pt("g(g(b))", "g/1 b/0"), kDefaultFuel).has_value());
  }
}

TEST_CASE("boehm_tree") {
  {
    // mconfl: the Boehm tree is bottom, no unknowns
    TrsFile f = parse_trs_file(
        "sig f1/1 g/1\nrule rf: f1(x) -> x\nrule rg: g(x) -> x\n"
        "term t = mu x. g(f1(x))\n");
    BoehmResult r = boehm_tree(f.trs, f.terms.at("t"), 5, kDefaultFuel);
    CHECK(r.tree == mk_bottom());
    CHECK(r.fully_certified());
  }
  {
    // prsConv: f(h(a), b) has Boehm tree f(_|_, g^w)
    Trs trs = trs_of(
        "sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\nrule rb: b -> g(b)\n");
    BoehmResult r = boehm_tree(trs, pt("f(h(a), b)"), 6, kDefaultFuel);
    CHECK(r.tree == pt("f(_|_, mu x. g(x))"));
    CHECK(r.fully_certified());
  }
  {
    // volPos: f(s(0), s(h(0))) has Boehm tree f(s(0), _|_)
    Trs trs = trs_of(
        "sig f/2 s/1 h/1 g/1 0/0\nrule r1: h(x) -> g(x)\n"
        "rule r2: s(g(x)) -> s(h(s(x)))\n");
    BoehmResult r = boehm_tree(trs, pt("f(s(0), s(h(0)))"), 4, kDefaultFuel);
    CHECK(r.tree == pt("f(s(0), _|_)"));
    CHECK(r.fully_certified());
  }
  {
    // a total infinite normal form: g(a) becomes g(f^w) via a -> f(a)
    Trs trs = trs_of("sig f/1 g/1 a/0\nrule ra: a -> f(a)\n");
    BoehmResult r = boehm_tree(trs, pt("g(a)", "f/1 g/1 a/0"), 8, kDefaultFuel);
    CHECK(r.tree == pt("g(mu x. f(x))", "f/1 g/1 a/0"));
    CHECK(r.fully_certified());
  }
}

TEST_CASE("boehm_tree is independent of the reduction strategy") {
  Trs trs = trs_of(
      "sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\nrule rb: b -> g(b)\n");
  PartialTerm t = pt("f(h(a), b)");
  BoehmResult r1 = boehm_tree(trs, t, 6, kDefaultFuel);
  PrsEqBohmReport a =
      check_prs_eq_bohm(trs, t, StrategyDesc::parse("alternating:0,1"),
                        kDefaultBudget, 6, kDefaultFuel);
  PrsEqBohmReport b = check_prs_eq_bohm(trs, t, StrategyDesc::parse("outermost"),
                                        kDefaultBudget, 6, kDefaultFuel);
  CHECK(a.status == PrsEqBohmReport::Pass);
  CHECK(b.status == PrsEqBohmReport::Pass);
  CHECK(truncate(a.p_limit, 6) == truncate(r1.tree, 6));
  CHECK(truncate(b.p_limit, 6) == truncate(r1.tree, 6));
}

TEST_CASE("postponement: collapse steps replay after R-steps") {
  Trs trs = trs_of(
      "sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\nrule rb: b -> g(b)\n");
  PartialTerm t = pt("f(h(a), b)");
  BoehmResult interleaved = boehm_tree(trs, t, 6, kDefaultFuel);
  // R-steps first: certified strong-p limit of the staged run
  Reduction red = run(trs, t, StrategyDesc::parse("alternating:0,1"), kDefaultBudget);
  LimitOutcome sp = strong_p_limit(trs, red, 6);
  REQUIRE(sp.certificate == Certificate::ExactRational);
  // then the collapse steps on the limit
  PartialTerm cur = sp.limit;
  while (auto nxt = boehm_step(trs, cur, kDefaultFuel)) cur = *nxt;
  CHECK(truncate(cur, 6) == truncate(interleaved.tree, 6));
}

TEST_CASE("bottom-step sequences replay as disjoint developments") {
  Trs trs = trs_of("sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\n");
  PartialTerm t = pt("f(h(a), h(b))");
  PartialTerm s1 = *boehm_step(trs, t, kDefaultFuel);
  PartialTerm s2 = *boehm_step(trs, s1, kDefaultFuel);
  CHECK(s2 == pt("f(_|_, _|_)"));
  // replaying the two disjoint collapses in the opposite order agrees
  PartialTerm o1 = replace_at(t, pos("1"), mk_bottom());
  PartialTerm o2 = replace_at(o1, pos("0"), mk_bottom());
  CHECK(o2 == s2);
}

TEST_CASE("check_prs_eq_bohm") {
  {
    Trs trs = trs_of(
        "sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\nrule rb: b -> g(b)\n");
    PrsEqBohmReport rep =
        check_prs_eq_bohm(trs, pt("f(h(a), b)"),
                          StrategyDesc::parse("alternating:0,1"),
                          kDefaultBudget, 6, kDefaultFuel);
    CHECK(rep.status == PrsEqBohmReport::Pass);
    CHECK(rep.p_limit == pt("f(_|_, mu x. g(x))"));
  }
  {
    // mconfl with the all-f strategy: the stage limit is not a normal form;
    // the follow-up root stage reaches bottom = the Boehm tree
    TrsFile f = parse_trs_file(
        "sig f1/1 g/1\nrule rf: f1(x) -> x\nrule rg: g(x) -> x\n"
        "term t = mu x. g(f1(x))\n");
    StrategyDesc all_f = StrategyDesc::parse("alternating:0");
    PrsEqBohmReport rep = check_prs_eq_bohm(f.trs, f.terms.at("t"), all_f,
                                            kDefaultBudget, 5, kDefaultFuel);
    CHECK(rep.status == PrsEqBohmReport::Pass);
    CHECK(rep.p_limit == mk_bottom());
    CHECK(rep.bohm == mk_bottom());
  }
  {
    // an input whose limit is a total normal form passes trivially
    Trs trs = trs_of("sig g/1 a/0\nrule r: a -> g(a)\n");
    PrsEqBohmReport rep =
        check_prs_eq_bohm(trs, pt("g(g(a))", "g/1 a/0"),
                          StrategyDesc::parse("outermost"), 200, 6, 500);
    CHECK(rep.status == PrsEqBohmReport::Pass);
  }
}

TEST_CASE("finite approximation of certified limits") {
  // for a certified strong p-limit and a finite set of its non-bottom
  // positions, a finite prefix of the recorded run already agrees there
  Trs trs = trs_of(
      "sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\nrule rb: b -> g(b)\n");
  Reduction red = run(trs, pt("f(h(a), b)"),
                      StrategyDesc::parse("alternating:0,1"), kDefaultBudget);
  LimitOutcome sp = strong_p_limit(trs, red, 6);
  REQUIRE(sp.certificate == Certificate::ExactRational);
  std::vector<Position> window;
  for (const Position& p : positions_to_depth(sp.limit, 4))
    if (label_at(sp.limit, p).kind != NodeKind::Bottom) window.push_back(p);
  bool found = false;
  for (size_t i = 0; i <= red.steps.size() && !found; ++i) {
    const PartialTerm& state = red.state(i);
    bool agree = true;
    for (const Position& p : window) {
      if (!in_domain(state, p) ||
          !same_node_label(label_at(state, p), label_at(sp.limit, p)))
        agree = false;
    }
    if (agree) found = true;
  }
  CHECK(found);
}

TEST_CASE("totality bridge: a total certified Boehm tree is m-reachable") {
  // boehm_tree with no bottom and no unknowns is reached by an ordinary
  // strongly m-converging run
  Trs trs = parse_trs_file("sig f/1 g/1 a/0\nrule ra: a -> f(a)\n").trs;
  PartialTerm t = testutil::pt("g(a)", "f/1 g/1 a/0");
  BoehmResult bt = boehm_tree(trs, t, 12, kDefaultFuel);
  REQUIRE(bt.fully_certified());
  REQUIRE(is_total(bt.tree));
  Reduction red = run(trs, t, StrategyDesc::parse("outermost"), kDefaultBudget);
  LimitOutcome sm = strong_m_limit(trs, red, 12);
  REQUIRE(sm.defined);
  CHECK(truncate(sm.limit, 12) == truncate(bt.tree, 12));
}
