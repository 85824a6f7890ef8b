#include <doctest.h>

#include "irw/parse.hpp"
#include "irw/print.hpp"
#include "irw/reduction.hpp"
#include "support/gen.hpp"
#include "support/util.hpp"

using namespace irw;
using testutil::pos;
using testutil::pt;

namespace {

Trs trs_of(const std::string& text) { return parse_trs_file(text).trs; }

const char* kPrsConv =
    "sig f/2 h/1 g/1 a/0 b/0\n"
    "rule rh: h(x) -> h(g(x))\n"
    "rule rb: b -> g(b)\n"
    "term t = f(h(a), b)\n";

const char* kWeakVsStrong =
    "sig f/2 g/1 a/0 b/0\n"
    "rule swap: f(x, y) -> f(y, x)\n"
    "term t = f(a, f(g(a), g(b)))\n";

const char* kVolPos =
    "sig f/2 s/1 h/1 g/1 0/0\n"
    "rule r1: h(x) -> g(x)\n"
    "rule r2: s(g(x)) -> s(h(s(x)))\n"
    "term t = f(s(0), s(h(0)))\n";

const char* kMconfl =
    "sig f1/1 g/1\n"
    "rule rf: f1(x) -> x\n"
    "rule rg: g(x) -> x\n"
    "term t = mu x. g(f1(x))\n";

}  // namespace

TEST_CASE("run records steps, normal forms, cycles") {
  {
    Trs trs = trs_of("sig f/1 g/1 a/0\nrule grow: a -> f(a)\n");
    StrategyDesc strat = StrategyDesc::parse("outermost");
    Reduction red = run(trs, pt("g(a)", "f/1 g/1 a/0"), strat, 3);
    REQUIRE(red.steps.size() == 3);
    CHECK(red.steps[0].after == pt("g(f(a))", "f/1 g/1 a/0"));
    CHECK(red.steps[1].after == pt("g(f(f(a)))", "f/1 g/1 a/0"));
    CHECK(red.steps[2].after == pt("g(f(f(f(a))))", "f/1 g/1 a/0"));
    CHECK_FALSE(red.closed);
  }
  {
    // a looping script alternates between two terms: cycle (0, 2)
    TrsFile file = parse_trs_file(kWeakVsStrong);
    StrategyDesc strat = StrategyDesc::parse("script-loop:1@swap");
    Reduction red = run(file.trs, file.terms.at("t"), strat, 64);
    REQUIRE(red.cycle.has_value());
    CHECK(red.cycle->start == 0);
    CHECK(red.cycle->period == 2);
  }
  {
    Trs trs = trs_of("sig c/0 a/0\nrule r: a -> c\n");
    Reduction red = run(trs, pt("c", "c/0"), StrategyDesc::parse("outermost"), 10);
    CHECK(red.steps.empty());
    CHECK(red.closed);
  }
}

TEST_CASE("step contexts") {
  TrsFile file = parse_trs_file(kPrsConv);
  Reduction red = run(file.trs, file.terms.at("t"),
                      StrategyDesc::parse("alternating:0,1"), 20);
  for (const Step& s : red.steps) {
    CHECK(s.context == replace_at(s.before, s.position, mk_bottom()));
    CHECK(leq_bot(s.context, s.before));
    CHECK(leq_bot(s.context, s.after));
    CHECK(leq_bot(s.context, glb({s.before, s.after})));
  }
}

TEST_CASE("strong p-limit: prsConv converges to f(_|_, g^w)") {
  TrsFile file = parse_trs_file(kPrsConv);
  Reduction red = run(file.trs, file.terms.at("t"),
                      StrategyDesc::parse("alternating:0,1"), 200);
  LimitOutcome out = strong_p_limit(file.trs, red, 6);
  CHECK(out.certificate == Certificate::ExactRational);
  CHECK(out.limit == parse_term("f(_|_, mu x. g(x))", file.trs.signature()));
  auto om = outermost_volatile(out.volatile_positions);
  REQUIRE(om.size() == 1);
  CHECK(om[0] == pos("0"));
  CHECK_FALSE(out.destructive);
}

TEST_CASE("weak m-limit: prsConv converges to f(h(g^w), g^w)") {
  TrsFile file = parse_trs_file(kPrsConv);
  Reduction red = run(file.trs, file.terms.at("t"),
                      StrategyDesc::parse("alternating:0,1"), 200);
  LimitOutcome out = weak_m_limit(file.trs, red, 10);
  REQUIRE(out.defined);
  CHECK(truncate(out.limit, 10) ==
        truncate(parse_term("f(h(mu x. g(x)), mu y. g(y))",
                            file.trs.signature()),
                 10));
  // weak p agrees and is exact
  LimitOutcome wp = weak_p_limit(file.trs, red, 10);
  CHECK(wp.limit == out.limit);
}

TEST_CASE("weakVsStrong: strong f(a,_|_) vs weak f(a,f(g(_|_),g(_|_)))") {
  TrsFile file = parse_trs_file(kWeakVsStrong);
  Reduction red = run(file.trs, file.terms.at("t"),
                      StrategyDesc::parse("alternating:1"), 64);
  LimitOutcome sp = strong_p_limit(file.trs, red, 4);
  CHECK(sp.certificate == Certificate::ExactRational);
  CHECK(sp.limit == parse_term("f(a, _|_)", file.trs.signature()));
  auto vol = outermost_volatile(sp.volatile_positions);
  REQUIRE(vol.size() == 1);
  CHECK(vol[0] == pos("1"));

  LimitOutcome wp = weak_p_limit(file.trs, red, 4);
  CHECK(wp.certificate == Certificate::ExactRational);
  CHECK(wp.limit == parse_term("f(a, f(g(_|_), g(_|_)))", file.trs.signature()));

  // the 2-cycle is not Cauchy
  LimitOutcome wm = weak_m_limit(file.trs, red, 4);
  CHECK_FALSE(wm.defined);
  LimitOutcome sm = strong_m_limit(file.trs, red, 4);
  CHECK_FALSE(sm.defined);

  // liminf of contexts over the certified cycle = glb of the cycle contexts
  std::vector<PartialTerm> cycle_contexts;
  for (size_t i = red.cycle->start; i < red.cycle->start + red.cycle->period;
       ++i)
    cycle_contexts.push_back(red.steps[i].context);
  CHECK(glb(cycle_contexts) == sp.limit);
}

TEST_CASE("volPos: strong p-limit f(s(0), _|_), volatile {1, 1.0}") {
  TrsFile file = parse_trs_file(kVolPos);
  Reduction red =
      run(file.trs, file.terms.at("t"), StrategyDesc::parse("outermost"), 200);
  LimitOutcome out = strong_p_limit(file.trs, red, 4);
  CHECK(out.certificate == Certificate::ExactRational);
  CHECK(out.limit == parse_term("f(s(0), _|_)", file.trs.signature()));
  std::vector<Position> vols;
  for (auto& [p, v] : out.volatile_positions) {
    CHECK(v == Verdict::Certified);
    vols.push_back(p);
  }
  std::sort(vols.begin(), vols.end());
  CHECK(vols == std::vector<Position>{pos("1"), pos("1.0")});
  auto om = outermost_volatile(out.volatile_positions);
  CHECK(om == std::vector<Position>{pos("1")});
}

TEST_CASE("strong m-limit examples") {
  {
    // a -> f(a) from g(a): strongly m-converges to g(f^w)
    Trs trs = trs_of("sig f/1 g/1 a/0\nrule grow: a -> f(a)\n");
    Reduction red =
        run(trs, pt("g(a)", "f/1 g/1 a/0"), StrategyDesc::parse("outermost"), 60);
    LimitOutcome sm = strong_m_limit(trs, red, 10);
    REQUIRE(sm.defined);
    CHECK(sm.limit == pt("g(mu x. f(x))", "f/1 g/1 a/0"));
    CHECK(sm.certificate == Certificate::ExactRational);
    LimitOutcome sp = strong_p_limit(trs, red, 10);
    CHECK(sp.limit == sm.limit);
  }
  {
    // g(x) -> g(f(x)): root steps forever, not strongly m-convergent, but
    // weakly m-converges to g(f^w)
    Trs trs = trs_of("sig f/1 g/1 a/0\nrule root: g(x) -> g(f(x))\n");
    Reduction red =
        run(trs, pt("g(a)", "f/1 g/1 a/0"), StrategyDesc::parse("outermost"), 60);
    LimitOutcome sm = strong_m_limit(trs, red, 8);
    CHECK_FALSE(sm.defined);
    LimitOutcome wm = weak_m_limit(trs, red, 8);
    REQUIRE(wm.defined);
    CHECK(truncate(wm.limit, 8) ==
          truncate(pt("g(mu x. f(x))", "f/1 g/1 a/0"), 8));
    // strong p-limit collapses the volatile root to ⊥
    LimitOutcome sp = strong_p_limit(trs, red, 8);
    CHECK(sp.limit == mk_bottom());
    CHECK(sp.destructive);
  }
  {
    Trs trs = trs_of("sig c/0 a/0\nrule r: a -> c\n");
    Reduction red =
        run(trs, pt("a", "c/0 a/0"), StrategyDesc::parse("outermost"), 10);
    CHECK(red.closed);
    LimitOutcome sm = strong_m_limit(trs, red, 8);
    CHECK(sm.defined);
    CHECK(sm.limit == pt("c", "c/0"));
  }
}

TEST_CASE("strWeakPconv: the run at <0> weakly p-converges to f(h(g^w))") {
  Trs trs = trs_of(
      "sig f1/1 h/1 g/1 a/0\n"
      "rule rh: h(x) -> h(g(x))\n"
      "rule rf: f1(x) -> g(x)\n");
  PartialTerm t = pt("f1(h(a))", "f1/1 h/1 g/1 a/0");
  Reduction red = run(trs, t, StrategyDesc::parse("alternating:0"), 80);
  LimitOutcome wp = weak_p_limit(trs, red, 8);
  CHECK(truncate(wp.limit, 8) ==
        truncate(pt("f1(h(mu x. g(x)))", "f1/1 h/1 g/1 a/0"), 8));
  // strong p-limit places ⊥ at the volatile position <0>
  LimitOutcome sp = strong_p_limit(trs, red, 8);
  CHECK(sp.limit == pt("f1(_|_)", "f1/1"));
}

TEST_CASE("detect_volatile") {
  {
    TrsFile file = parse_trs_file(kWeakVsStrong);
    Reduction red = run(file.trs, file.terms.at("t"),
                        StrategyDesc::parse("alternating:1"), 64);
    auto vol = detect_volatile(file.trs, red);
    REQUIRE(vol.size() == 1);
    CHECK(vol[0].first == pos("1"));
    CHECK(vol[0].second == Verdict::Certified);
  }
  {
    // root loop h(x) -> h(g(x)): the root itself is certified volatile
    Trs trs = trs_of("sig h/1 g/1 a/0\nrule rh: h(x) -> h(g(x))\n");
    Reduction red =
        run(trs, pt("h(a)", "h/1 g/1 a/0"), StrategyDesc::parse("outermost"), 60);
    auto vol = detect_volatile(trs, red);
    REQUIRE(vol.size() == 1);
    CHECK(vol[0].first == Position{});
    CHECK(vol[0].second == Verdict::Certified);
    CHECK(is_destructive(trs, red).destructive);
    CHECK(is_destructive(trs, red).certified);
  }
  {
    Trs trs = trs_of("sig c/0 a/0\nrule r: a -> c\n");
    Reduction red =
        run(trs, pt("a", "c/0 a/0"), StrategyDesc::parse("outermost"), 10);
    CHECK(detect_volatile(trs, red).empty());
    CHECK_FALSE(is_destructive(trs, red).destructive);
  }
}

TEST_CASE("is_destructive on the collapsing tower") {
  TrsFile file = parse_trs_file("sig f1/1\nrule rf: f1(x) -> x\nterm t = mu s. f1(s)\n");
  Reduction red = run(file.trs, file.terms.at("t"),
                      StrategyDesc::parse("outermost"), 40);
  auto v = is_destructive(file.trs, red);
  CHECK(v.destructive);
  CHECK(v.certified);
  LimitOutcome sp = strong_p_limit(file.trs, red, 4);
  CHECK(sp.limit == mk_bottom());
  CHECK(sp.destructive);
}

TEST_CASE("mconfl term reduces to _|_ under outermost contraction") {
  TrsFile file = parse_trs_file(kMconfl);
  Reduction red = run(file.trs, file.terms.at("t"),
                      StrategyDesc::parse("outermost"), 40);
  LimitOutcome sp = strong_p_limit(file.trs, red, 6);
  CHECK(sp.certificate == Certificate::ExactRational);
  CHECK(sp.limit == mk_bottom());
  CHECK(sp.destructive);
}

TEST_CASE("fold_rational") {
  {
    std::vector<PartialTerm> tr;
    PartialTerm target = pt("mu x. f1(x)", "f1/1");
    for (uint32_t d = 0; d < 4; ++d) tr.push_back(truncate(target, d));
    auto f = fold_rational(tr);
    REQUIRE(f.has_value());
    CHECK(*f == target);
  }
  {
    // too short to witness a loop
    std::vector<PartialTerm> tr{mk_bottom(), pt("g(_|_)"), pt("g(f1(_|_))", "g/1 f1/1")};
    CHECK_FALSE(fold_rational(tr).has_value());
  }
  {
    // inconsistent chain
    std::vector<PartialTerm> tr{mk_bottom(), pt("f1(_|_)", "f1/1"),
                                pt("g(f1(_|_))", "g/1 f1/1")};
    CHECK_FALSE(fold_rational(tr).has_value());
  }
  {
    // finite total target
    std::vector<PartialTerm> tr;
    PartialTerm target = pt("g(g(a))");
    for (uint32_t d = 0; d < 5; ++d) tr.push_back(truncate(target, d));
    auto f = fold_rational(tr);
    REQUIRE(f.has_value());
    CHECK(*f == target);
  }
}

TEST_CASE("concatenation agrees with running stages") {
  Trs trs = trs_of("sig g/1 a/0 b/0 c/0\nrule r1: a -> b\nrule r2: b -> c\n");
  PartialTerm t = pt("g(a)", "g/1 a/0");
  Reduction s1 = run(trs, t, StrategyDesc::parse("script:0@r1"), 10);
  CHECK(s1.closed);
  Reduction s2 = continue_run(trs, s1, StrategyDesc::parse("script:0@r2"), 10);
  Reduction whole = concat_reductions(s1, s2);
  CHECK(whole.steps.size() == 2);
  CHECK(whole.final_term() == pt("g(c)", "g/1 c/0"));
  Reduction direct = run(trs, t, StrategyDesc::parse("outermost"), 10);
  CHECK(direct.final_term() == whole.final_term());
}

TEST_CASE("total reductions have no volatile positions") {
  // certified-total runs report no volatile positions; runs with volatile
  // positions produce ⊥ (Lemma on total reductions, observable half)
  Trs trs = trs_of("sig f/1 g/1 a/0\nrule grow: a -> f(a)\n");
  Reduction red =
      run(trs, pt("g(a)", "f/1 g/1 a/0"), StrategyDesc::parse("outermost"), 50);
  LimitOutcome sp = strong_p_limit(trs, red, 8);
  CHECK(is_total(sp.limit));
  CHECK(detect_volatile(trs, red).empty());
}

TEST_CASE("compression witness search") {
  {
    TrsFile file = parse_trs_file(kMconfl);
    CompressionResult res = compression_witness(
        file.trs, file.terms.at("t"), mk_bottom(), 6, kDefaultBudget);
    CHECK(res.status == CompressionResult::Witness);
  }
  {
    // non-left-linear systems are refused
    Trs trs = trs_of(
        "sig f/2 g/1 a/0 b/0 c/0\n"
        "rule nl: f(x, x) -> c\n"
        "rule ga: a -> g(a)\n"
        "rule gb: b -> g(b)\n");
    CompressionResult res =
        compression_witness(trs, pt("f(a, b)"), pt("c"), 6, kDefaultBudget);
    CHECK(res.status == CompressionResult::Refused);
    CHECK(res.reason == "not-left-linear");
  }
}

TEST_CASE("budget exhaustion reports suspicion, never a false certificate") {
  // an aperiodic-looking run under a tiny budget stays budget-exhausted
  TrsFile file = parse_trs_file(kPrsConv);
  Reduction red = run(file.trs, file.terms.at("t"),
                      StrategyDesc::parse("alternating:0,1"), 5);
  LimitOutcome out = strong_p_limit(file.trs, red, 6);
  // five steps cannot seed the 3-block window for any period
  CHECK(out.certificate == Certificate::BudgetExhausted);
}

TEST_CASE("strong p-limit lies below the weak p-limit") {
  struct Case {
    const char* text;
    const char* term;
    const char* strat;
  } cases[] = {
      {"sig f/2 h/1 g/1 a/0 b/0\nrule rh: h(x) -> h(g(x))\nrule rb: b -> g(b)\n"
       "term t = f(h(a), b)\n",
       "t", "alternating:0,1"},
      {"sig f/2 g/1 a/0 b/0\nrule swap: f(x, y) -> f(y, x)\n"
       "term t = f(a, f(g(a), g(b)))\n",
       "t", "alternating:1"},
      {"sig f/2 s/1 h/1 g/1 0/0\nrule r1: h(x) -> g(x)\n"
       "rule r2: s(g(x)) -> s(h(s(x)))\nterm t = f(s(0), s(h(0)))\n",
       "t", "outermost"},
  };
  for (const Case& c : cases) {
    TrsFile f = parse_trs_file(c.text);
    Reduction red = run(f.trs, f.terms.at(c.term),
                        StrategyDesc::parse(c.strat), kDefaultBudget);
    LimitOutcome sp = strong_p_limit(f.trs, red, 8);
    LimitOutcome wp = weak_p_limit(f.trs, red, 8);
    REQUIRE(sp.certificate == Certificate::ExactRational);
    REQUIRE(wp.certificate == Certificate::ExactRational);
    CHECK(leq_bot(sp.limit, wp.limit));
  }
}
