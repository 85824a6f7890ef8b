#include "irw/session.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "irw/print.hpp"

namespace irw {

using nlohmann::json;

namespace {

struct Loaded {
  TrsFile file;
  PartialTerm term;
};

Loaded load(const SessionConfig& cfg, bool need_term = true) {
  Loaded l;
  if (cfg.trs_path.empty()) fail("usage", "no TRS file given");
  l.file = load_trs_file(cfg.trs_path);
  if (!need_term) return l;
  if (cfg.term.empty()) {
    if (l.file.terms.size() == 1) {
      l.term = l.file.terms.begin()->second;
      return l;
    }
    fail("usage", "no term selected (use --term)");
  }
  auto it = l.file.terms.find(cfg.term);
  if (it != l.file.terms.end()) {
    l.term = it->second;
    return l;
  }
  l.term = parse_term(cfg.term, l.file.trs.signature(), l.file.terms);
  return l;
}

std::string verdict_name(RaVerdict::Answer a) {
  switch (a) {
    case RaVerdict::Yes: return "yes";
    case RaVerdict::No: return "no";
    case RaVerdict::Unknown: return "unknown";
  }
  return "?";
}

std::string ra_cert_name(RaVerdict::Cert c) {
  switch (c) {
    case RaVerdict::FiniteStateGraph: return "finite-state-graph";
    case RaVerdict::RootLoop: return "root-loop";
    case RaVerdict::RootStable: return "root-stable";
    case RaVerdict::DeadEnd: return "dead-end";
    case RaVerdict::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

}  // namespace

std::string certificate_name(Certificate c) {
  switch (c) {
    case Certificate::ExactRational: return "exact-rational";
    case Certificate::DepthCertified: return "depth-certified";
    case Certificate::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

json limit_to_json(const LimitOutcome& out) {
  json j;
  j["schema"] = 1;
  switch (out.mode) {
    case LimitMode::StrongP: j["mode"] = "strong-p"; break;
    case LimitMode::WeakP: j["mode"] = "weak-p"; break;
    case LimitMode::StrongM: j["mode"] = "strong-m"; break;
    case LimitMode::WeakM: j["mode"] = "weak-m"; break;
  }
  j["defined"] = out.defined;
  j["limit"] = to_string(out.limit);
  j["certificate"] = certificate_name(out.certificate);
  if (out.certificate == Certificate::DepthCertified)
    j["certified_depth"] = out.certified_depth;
  json vol = json::array();
  for (const auto& [p, v] : out.volatile_positions) {
    json item;
    item["position"] = position_to_string(p);
    item["verdict"] = v == Verdict::Certified ? "certified" : "suspected";
    vol.push_back(item);
  }
  j["volatile"] = vol;
  j["destructive"] = out.destructive;
  return j;
}

CommandOutput cmd_check(const SessionConfig& cfg) {
  CommandOutput out;
  Loaded l = load(cfg, false);
  const Trs& trs = l.file.trs;
  out.data["schema"] = 1;
  out.data["left_linear"] = trs.left_linear();
  out.data["orthogonal"] = trs.orthogonal();
  std::ostringstream os;
  os << "left-linear: " << (trs.left_linear() ? "yes" : "no");
  if (trs.linearity_witness())
    os << " (rule " << trs.linearity_witness()->rule_id << ", variable "
       << trs.linearity_witness()->variable << ")";
  os << "\northogonal: " << (trs.orthogonal() ? "yes" : "no");
  if (trs.overlap_witness()) {
    os << " (rules " << trs.overlap_witness()->rule1 << " and "
       << trs.overlap_witness()->rule2 << " overlap at "
       << position_to_string(trs.overlap_witness()->at) << ")";
    out.data["overlap"] = {{"rule1", trs.overlap_witness()->rule1},
                           {"rule2", trs.overlap_witness()->rule2},
                           {"at", position_to_string(trs.overlap_witness()->at)}};
  }
  if (trs.linearity_witness())
    out.data["linearity_witness"] = {
        {"rule", trs.linearity_witness()->rule_id},
        {"variable", trs.linearity_witness()->variable}};
  out.text = os.str();
  out.exit_code = trs.orthogonal() ? 0 : 1;
  return out;
}

CommandOutput cmd_reduce(const SessionConfig& cfg) {
  CommandOutput out;
  Loaded l = load(cfg);
  StrategyDesc strat = StrategyDesc::parse(cfg.strategy);
  // reduce records the requested prefix verbatim (no certificate shortcut)
  Reduction red = run(l.file.trs, l.term, strat, cfg.budget, false);
  out.data["schema"] = 1;
  json steps = json::array();
  std::ostringstream os;
  for (size_t i = 0; i < red.steps.size(); ++i) {
    const Step& s = red.steps[i];
    json rec;
    rec["index"] = i;
    rec["position"] = position_to_string(s.position);
    rec["rule"] = l.file.trs.rule(s.rule).id;
    rec["depth"] = s.position.size();
    steps.push_back(rec);
    if (i < 20)
      os << i << ": " << l.file.trs.rule(s.rule).id << " @ "
         << position_to_string(s.position) << "  ->  " << to_string(s.after)
         << "\n";
  }
  if (red.steps.size() > 20)
    os << "... (" << red.steps.size() << " steps recorded)\n";
  out.data["steps"] = steps;
  out.data["closed"] = red.closed;
  out.data["final"] = to_string(red.final_term());
  if (red.cycle) {
    out.data["cycle"] = {{"start", red.cycle->start},
                         {"period", red.cycle->period}};
    os << "cycle: start " << red.cycle->start << ", period "
       << red.cycle->period << "\n";
  }
  os << "final: " << to_string(red.final_term());
  out.text = os.str();
  return out;
}

CommandOutput cmd_limit(const SessionConfig& cfg) {
  CommandOutput out;
  Loaded l = load(cfg);
  StrategyDesc strat = StrategyDesc::parse(cfg.strategy);
  Reduction red = run(l.file.trs, l.term, strat, cfg.budget);
  LimitOutcome lo;
  if (cfg.mode == "strong-p")
    lo = strong_p_limit(l.file.trs, red, cfg.depth);
  else if (cfg.mode == "weak-p")
    lo = weak_p_limit(l.file.trs, red, cfg.depth);
  else if (cfg.mode == "strong-m")
    lo = strong_m_limit(l.file.trs, red, cfg.depth);
  else if (cfg.mode == "weak-m")
    lo = weak_m_limit(l.file.trs, red, cfg.depth);
  else
    fail("usage", "unknown limit mode '" + cfg.mode + "'");
  out.data = limit_to_json(lo);
  std::ostringstream os;
  if (!lo.defined)
    os << "diverges (" << certificate_name(lo.certificate) << ")";
  else
    os << "limit: " << to_string(lo.limit) << "\ncertificate: "
       << certificate_name(lo.certificate);
  if (!lo.volatile_positions.empty()) {
    os << "\nvolatile:";
    for (const auto& [p, v] : lo.volatile_positions)
      os << " " << position_to_string(p)
         << (v == Verdict::Certified ? " (certified)" : " (suspected)");
  }
  out.text = os.str();
  out.exit_code = lo.certificate == Certificate::BudgetExhausted ? 2 : 0;
  return out;
}

CommandOutput cmd_develop(const SessionConfig& cfg) {
  CommandOutput out;
  Loaded l = load(cfg);
  if (cfg.redexes.empty()) fail("usage", "develop needs --redexes");
  OccurrenceSet u = OccurrenceSet::parse(cfg.redexes);
  if (cfg.dot) {
    PathAutomaton a = build_paths(l.file.trs, l.term, u);
    out.text = a.to_dot();
    out.data["schema"] = 1;
    out.data["dot"] = out.text;
    return out;
  }
  DevelopmentResult dev =
      complete_development(l.file.trs, l.term, u, cfg.depth, cfg.budget);
  PartialTerm match = matching_term(l.file.trs, l.term, u);
  const bool agrees = dev.final_term == match;
  out.data["schema"] = 1;
  out.data["term"] = to_string(dev.final_term);
  out.data["matching_term"] = to_string(match);
  out.data["agrees"] = agrees;
  out.data["certificate"] = certificate_name(dev.outcome.certificate);
  out.data["steps"] = dev.reduction.steps.size();
  std::ostringstream os;
  os << to_string(dev.final_term) << "\nmatching term: " << to_string(match)
     << (agrees ? " (agrees)" : " (DISAGREES)");
  out.text = os.str();
  out.exit_code = dev.outcome.certificate == Certificate::BudgetExhausted ? 2
                  : agrees                                                ? 0
                                                                          : 1;
  return out;
}

CommandOutput cmd_residuals(const SessionConfig& cfg) {
  CommandOutput out;
  Loaded l = load(cfg);
  if (cfg.redexes.empty()) fail("usage", "residuals needs --redexes");
  OccurrenceSet u = OccurrenceSet::parse(cfg.redexes);
  if (!u.node_symbols.empty())
    fail("usage", "residuals expects explicit positions");
  StrategyDesc strat = StrategyDesc::parse(cfg.strategy);
  Reduction red = run(l.file.trs, l.term, strat, cfg.budget);
  std::vector<Position> desc = descendants(l.file.trs, red, u.positions);
  std::vector<Position> via =
      descendants_via_labels(l.file.trs, red, u.positions);
  std::sort(desc.begin(), desc.end());
  std::sort(via.begin(), via.end());
  out.data["schema"] = 1;
  json arr = json::array();
  for (const Position& p : desc) arr.push_back(position_to_string(p));
  out.data["descendants"] = arr;
  out.data["via_labels_agrees"] = desc == via;
  std::ostringstream os;
  os << "descendants:";
  for (const Position& p : desc) os << " " << position_to_string(p);
  if (desc.empty()) os << " (none)";
  out.text = os.str();
  out.exit_code = desc == via ? 0 : 1;
  return out;
}

CommandOutput cmd_boehm(const SessionConfig& cfg) {
  CommandOutput out;
  Loaded l = load(cfg);
  std::optional<PartialTerm> witness;
  if (!cfg.witness.empty())
    witness = parse_term(cfg.witness, l.file.trs.signature(), l.file.terms);
  BoehmResult res = boehm_tree(l.file.trs, l.term, cfg.depth, cfg.fuel, witness);
  out.data["schema"] = 1;
  out.data["tree"] = to_string(res.tree);
  out.data["depth"] = res.depth;
  json unknown = json::array();
  for (const Position& p : res.positions_unknown)
    unknown.push_back(position_to_string(p));
  out.data["unknown_positions"] = unknown;
  out.data["fuel_used"] = res.fuel_used;
  RaVerdict root = in_ra_bot(l.file.trs, l.term, cfg.fuel, witness);
  out.data["certificates"] = {
      {"root_in_ra_bot",
       {{"verdict", verdict_name(root.verdict)},
        {"certificate", ra_cert_name(root.certificate)}}}};
  std::ostringstream os;
  os << to_string(res.tree);
  if (!res.fully_certified()) os << "\n(unknown positions present)";
  out.text = os.str();
  out.exit_code = res.fully_certified() ? 0 : 2;
  return out;
}

CommandOutput cmd_join(const SessionConfig& cfg) {
  CommandOutput out;
  Loaded l = load(cfg);
  if (cfg.strategy2.empty()) fail("usage", "join needs --strategy2");

  auto normal_form_of = [&](const std::string& strat_text)
      -> std::pair<PartialTerm, bool> {
    StrategyDesc strat = StrategyDesc::parse(strat_text);
    PartialTerm cur = l.term;
    for (size_t i = 0; i < 8; ++i) {
      Reduction red = run(l.file.trs, cur, strat, cfg.budget);
      LimitOutcome lo = strong_p_limit(l.file.trs, red, cfg.depth);
      if (lo.certificate == Certificate::BudgetExhausted)
        return {lo.limit, false};
      cur = lo.limit;
      if (!has_redex(l.file.trs, cur)) return {cur, true};
      strat.kind = StrategyDesc::OutermostLeftmost;
      strat.spine.clear();
      strat.script.clear();
    }
    return {cur, false};
  };
  auto [n1, ok1] = normal_form_of(cfg.strategy);
  auto [n2, ok2] = normal_form_of(cfg.strategy2);
  const bool joinable =
      truncate(n1, cfg.depth) == truncate(n2, cfg.depth);
  out.data["schema"] = 1;
  out.data["limit1"] = to_string(n1);
  out.data["limit2"] = to_string(n2);
  out.data["joinable_at_depth"] = joinable;
  out.data["certified"] = ok1 && ok2;
  std::ostringstream os;
  os << "limit 1: " << to_string(n1) << "\nlimit 2: " << to_string(n2) << "\n"
     << (joinable ? "joinable" : "not joined") << " at depth " << cfg.depth;
  out.text = os.str();
  out.exit_code = !(ok1 && ok2) ? 2 : (joinable ? 0 : 1);
  return out;
}

CommandOutput cmd_corpus(const SessionConfig& cfg) {
  CommandOutput out;
  out.data["schema"] = 1;
  const std::filesystem::path dir = cfg.corpus_dir;
  const std::filesystem::path manifest = dir / "manifest.json";
  if (!std::filesystem::exists(manifest)) {
    out.text = "0 cases";
    out.data["cases"] = 0;
    return out;
  }
  std::ifstream f(manifest);
  json m = json::parse(f);
  size_t passed = 0, failed = 0;
  std::ostringstream os;
  json results = json::array();
  for (const json& c : m["cases"]) {
    SessionConfig cc;
    cc.trs_path = (dir / c.at("file").get<std::string>()).string();
    if (c.contains("term")) cc.term = c["term"].get<std::string>();
    if (c.contains("strategy")) cc.strategy = c["strategy"].get<std::string>();
    if (c.contains("strategy2")) cc.strategy2 = c["strategy2"].get<std::string>();
    if (c.contains("redexes")) cc.redexes = c["redexes"].get<std::string>();
    if (c.contains("witness")) cc.witness = c["witness"].get<std::string>();
    if (c.contains("mode")) cc.mode = c["mode"].get<std::string>();
    if (c.contains("depth")) cc.depth = c["depth"].get<uint32_t>();
    if (c.contains("budget")) cc.budget = c["budget"].get<size_t>();
    if (c.contains("fuel")) cc.fuel = c["fuel"].get<size_t>();
    const std::string name = c.at("name").get<std::string>();
    CommandOutput r = dispatch(c.at("command").get<std::string>(), cc);
    bool ok = true;
    if (c.contains("expect")) {
      for (auto& [key, val] : c["expect"].items())
        if (!r.data.contains(key) || r.data[key] != val) ok = false;
    }
    if (c.contains("expect_exit") && r.exit_code != c["expect_exit"].get<int>())
      ok = false;
    os << (ok ? "PASS " : "FAIL ") << name << "\n";
    results.push_back({{"name", name}, {"pass", ok}});
    (ok ? passed : failed)++;
  }
  os << passed << " passed, " << failed << " failed";
  out.text = os.str();
  out.data["results"] = results;
  out.data["passed"] = passed;
  out.data["failed"] = failed;
  out.exit_code = failed == 0 ? 0 : 1;
  return out;
}

CommandOutput dispatch(const std::string& command, const SessionConfig& cfg) {
  try {
    if (command == "check") return cmd_check(cfg);
    if (command == "reduce") return cmd_reduce(cfg);
    if (command == "limit") return cmd_limit(cfg);
    if (command == "develop") return cmd_develop(cfg);
    if (command == "residuals") return cmd_residuals(cfg);
    if (command == "boehm") return cmd_boehm(cfg);
    if (command == "join") return cmd_join(cfg);
    if (command == "corpus") return cmd_corpus(cfg);
    fail("usage", "unknown command '" + command + "'");
  } catch (const Error& e) {
    CommandOutput out;
    out.exit_code = 1;
    out.data["schema"] = 1;
    out.data["error"] = e.code;
    out.data["message"] = e.what();
    out.text = std::string("error [") + e.code + "]: " + e.what();
    return out;
  }
}

}  // namespace irw
