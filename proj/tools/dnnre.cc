#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dnnre/cli/commands.h"
#include "dnnre/errors.h"

int main(int argc, char** argv) {
  CLI::App app{"Type-conditioned relation extraction over distantly supervised bags"};
  app.require_subcommand(1);

  struct Options {
    std::string config, out, seed, checkpoint;
    std::vector<std::string> sets;
  };
  Options opt;
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"gen", "generate a synthetic corpus"},
      {"train", "train one model variant"},
      {"eval", "evaluate a checkpoint on test data"},
      {"ablate", "train and evaluate a sweep of variants"},
      {"case-report", "compare gold-class confidences of two checkpoints"},
  };
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "flat key = value configuration file");
    sub->add_option("--out", opt.out, "output directory (overrides out)");
    sub->add_option("--seed", opt.seed, "base seed (overrides seed)");
    sub->add_option("--checkpoint", opt.checkpoint,
                    "checkpoint to evaluate (eval) or first checkpoint (case-report)");
    sub->add_option("--set", opt.sets, "extra key=value override, repeatable");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dnnre::kExitConfig;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  dnnre::RunConfig cfg;
  try {
    if (!opt.config.empty()) cfg = dnnre::RunConfig::load(opt.config);
    for (const auto& kv : opt.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw dnnre::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!opt.out.empty()) cfg.set("out", opt.out);
    if (!opt.seed.empty()) cfg.set("seed", opt.seed);
    if (!opt.checkpoint.empty()) cfg.set(verb == "case-report" ? "case.checkpoint_a" : "checkpoint", opt.checkpoint);
  } catch (const dnnre::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return dnnre::kExitConfig;
  }
  return dnnre::run_command(verb, cfg, std::cout, std::cerr);
}
