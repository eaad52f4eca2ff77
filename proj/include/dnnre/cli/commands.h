#ifndef DNNRE_CLI_COMMANDS_H_
#define DNNRE_CLI_COMMANDS_H_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dnnre/cli/config.h"
#include "dnnre/corpus/synth.h"
#include "dnnre/eval/evaluate.h"

namespace dnnre {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

// Each command reads everything from the config, writes into `out` and a
// resolved copy of the config next to its results, and logs progress to
// `log`. Errors are thrown; run_command turns them into exit codes.
void cmd_gen(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& log);
void cmd_ablate(const RunConfig& cfg, std::ostream& log);
void cmd_case_report(const RunConfig& cfg, std::ostream& log);

// 0 on success, 2 on ConfigError or an unknown verb, 1 on any other error
// (reported on `err`).
int run_command(std::string_view verb, const RunConfig& cfg, std::ostream& log, std::ostream& err);

struct AblationVariant {
  std::string name;
  VariantFlags flags;
};

// ablate.variants entries are full, noatt, nocls or notype, each crossed with
// ablate.strategies and ablate.granularities, or a fully spelled name such as
// full/max/coarse. Variants that coincide after normalization are dropped.
std::vector<AblationVariant> ablation_variants(const RunConfig& cfg);

struct AblationEntry {
  std::uint64_t seed = 0;
  std::string variant;
  VariantFlags flags;
  EvalReport report;
  std::size_t best_epoch = 0;
};

struct AblationResult {
  std::vector<std::uint64_t> seeds;
  std::vector<AblationVariant> variants;
  std::vector<AblationEntry> entries;    // seed-major, variants in order
  std::map<std::uint64_t, SynthCorpus> corpora;  // per seed, when generated
  std::vector<int> train_counts;         // of the last seed's corpus
};

// The ablation proper: one corpus per seed (generated from synth.* with that
// seed unless data.* is given), every variant trained from the same
// initialization and training stream. Writes per-run metrics under `out`.
AblationResult run_ablation(const RunConfig& cfg, std::ostream& log);

// Tab-separated rows per (seed, variant), and per-variant medians.
std::string format_ablation(const AblationResult& result, const EvalOptions& options);
std::string format_ablation_summary(const AblationResult& result, const EvalOptions& options);

}  // namespace dnnre

#endif  // DNNRE_CLI_COMMANDS_H_
