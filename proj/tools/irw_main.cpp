#include <CLI11.hpp>
#include <iostream>

#include "irw/session.hpp"

int main(int argc, char** argv) {
  CLI::App app{"irw - partial order infinitary term rewriting"};
  app.require_subcommand(1);

  irw::SessionConfig cfg;
  std::string command;

  auto add_common = [&](CLI::App* sub, bool needs_file) {
    if (needs_file)
      sub->add_option("file", cfg.trs_path, "TRS file")->required();
    sub->add_option("--term", cfg.term, "term name or expression");
    sub->add_option("--strategy", cfg.strategy,
                    "outermost | innermost | parallel-outermost | "
                    "alternating:<pos,...> | script[-loop]:<pos>@<rule>,...");
    sub->add_option("--steps,--budget", cfg.budget, "step budget");
    sub->add_option("--depth", cfg.depth, "display/compare depth");
    sub->add_option("--fuel", cfg.fuel, "state budget for verdicts");
    sub->add_option("--redexes", cfg.redexes,
                    "occurrence set: {0, 1.0} or @node:f");
    sub->add_option("--witness", cfg.witness, "root-active witness term");
    sub->add_option("--seed", cfg.seed, "seed for randomized subcommands");
    sub->add_flag("--json", cfg.json, "machine-readable output");
  };

  CLI::App* check = app.add_subcommand("check", "linearity / orthogonality");
  add_common(check, true);
  CLI::App* reduce = app.add_subcommand("reduce", "run a strategy, record steps");
  add_common(reduce, true);
  CLI::App* limit = app.add_subcommand("limit", "certified reduction limits");
  add_common(limit, true);
  limit->add_option("--mode", cfg.mode, "strong-p | weak-p | strong-m | weak-m");
  CLI::App* develop = app.add_subcommand("develop", "complete development");
  add_common(develop, true);
  develop->add_flag("--dot", cfg.dot, "emit the path automaton as DOT");
  CLI::App* residuals = app.add_subcommand("residuals", "descendant tracking");
  add_common(residuals, true);
  CLI::App* boehm = app.add_subcommand("boehm", "Böhm tree computation");
  add_common(boehm, true);
  CLI::App* join = app.add_subcommand("join", "joinability of two strategies");
  add_common(join, true);
  join->add_option("--strategy2", cfg.strategy2, "second strategy")->required();
  CLI::App* corpus = app.add_subcommand("corpus", "run the golden corpus");
  corpus->add_option("dir", cfg.corpus_dir, "corpus directory");
  corpus->add_flag("--json", cfg.json, "machine-readable output");

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : app.get_subcommands()) command = sub->get_name();
  irw::CommandOutput out = irw::dispatch(command, cfg);
  if (cfg.json) {
    if (command == "reduce" && out.data.contains("steps")) {
      // JSON-lines trace: one record per step, then the run summary.
      for (const auto& rec : out.data["steps"])
        std::cout << rec.dump() << "\n";
      nlohmann::json summary = out.data;
      summary.erase("steps");
      std::cout << summary.dump() << std::endl;
    } else {
      std::cout << out.data.dump(2) << std::endl;
    }
  } else {
    std::cout << out.text << std::endl;
  }
  return out.exit_code;
}
