#include "dnnre/cli/commands.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "dnnre/corpus/io.h"
#include "dnnre/errors.h"
#include "dnnre/train/checkpoint.h"

namespace dnnre {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCheckpointKeys = {"seed", "data.max_sentence_length", "model.",
                                                  "train.", "variant."};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

fs::path output_dir(const RunConfig& cfg) {
  cfg.require("out");
  const fs::path dir = cfg.path("out");
  fs::create_directories(dir);
  write_file(dir / "resolved.conf", cfg.resolved_text());
  return dir;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct DataPaths {
  fs::path train, test, heldout, types, coarse, relations, embeddings;
};

// data.dir supplies the file names written by `gen`; explicit data.* keys win.
DataPaths data_paths(const RunConfig& cfg) {
  DataPaths p;
  const fs::path dir = cfg.path("data.dir");
  auto pick = [&](const std::string& key, const char* file) -> fs::path {
    if (!cfg.get(key).empty()) return cfg.path(key);
    if (!dir.empty() && file) return dir / file;
    return {};
  };
  p.train = pick("data.train", "train.tsv");
  p.test = pick("data.test", "test.tsv");
  p.heldout = pick("data.heldout", nullptr);
  p.types = pick("data.types", "types.tsv");
  p.relations = pick("data.relations", "relations.txt");
  p.coarse = pick("data.coarse", "coarse.tsv");
  if (cfg.get("data.coarse").empty() && !p.coarse.empty() && !fs::exists(p.coarse)) p.coarse.clear();
  p.embeddings = pick("data.embeddings", nullptr);
  return p;
}

void require_data(const RunConfig& cfg, bool need_train) {
  if (!cfg.get("data.dir").empty()) return;
  if (need_train) cfg.require("data.train");
  cfg.require("data.test");
  cfg.require("data.types");
  cfg.require("data.relations");
}

LoadOptions load_options(const RunConfig& cfg) {
  LoadOptions o;
  o.max_sentence_length = cfg.count("data.max_sentence_length");
  return o;
}

struct TrainingData {
  std::vector<Bag> train, test, heldout;
  TypeCatalog catalog;
  Vocabulary vocab;
  RelationTable relations;
};

TrainingData load_training_data(const RunConfig& cfg, std::ostream& log) {
  const DataPaths p = data_paths(cfg);
  TrainingData d;
  d.relations = load_relations(p.relations);
  d.catalog = load_types(p.types, p.coarse);
  LoadStats stats;
  d.train = load_bags(p.train, d.relations, d.vocab, load_options(cfg), &stats);
  d.vocab.freeze();
  log << "train: " << d.train.size() << " bags, " << stats.sentences << " sentences ("
      << stats.skipped_missing_entity << " skipped, " << stats.dropped_too_long << " too long)\n";
  d.test = load_bags(p.test, d.relations, d.vocab, load_options(cfg));
  d.heldout = p.heldout.empty() ? d.test : load_bags(p.heldout, d.relations, d.vocab, load_options(cfg));
  return d;
}

TrainingData from_synthetic(const SynthCorpus& c) {
  TrainingData d;
  d.train = c.train;
  d.test = c.test;
  d.heldout = c.test;
  d.catalog = c.catalog;
  d.vocab = c.vocab;
  d.relations = c.relations;
  return d;
}

ModelParams initial_params(const RunConfig& cfg, const TrainingData& d, const VariantFlags& flags) {
  Rng rng(derive_seed(cfg.seed(), "init"));
  ModelParams p = init_model(model_config(cfg), d.vocab.size(), d.catalog.type_count(flags.granularity),
                             d.relations.size(), rng);
  const DataPaths paths = data_paths(cfg);
  if (!paths.embeddings.empty()) {
    apply_pretrained(p.encoder, load_embeddings(paths.embeddings, d.vocab, p.encoder.word_emb.dim(1)));
  }
  return p;
}

Checkpoint make_checkpoint(const RunConfig& cfg, const FitResult& fit, const TrainingData& d) {
  Checkpoint c;
  c.config_text = cfg.resolved_text(kCheckpointKeys);
  c.params = fit.best;
  c.optimizer = fit.optimizer;
  c.rng_state = fit.rng_state;
  c.vocab = d.vocab;
  c.relations = d.relations;
  c.train_counts = class_counts(d.train, d.relations.size());
  return c;
}

FitResult train_variant(const RunConfig& cfg, const TrainingData& d, const VariantFlags& flags,
                        std::ostream& log, const std::string& tag) {
  const ModelParams init = initial_params(cfg, d, flags);
  return fit(d.train, init, flags, train_config(cfg), d.heldout, d.catalog, [&](const EpochRecord& r) {
    log << tag << "epoch " << r.epoch << " loss " << num(r.loss) << " heldout_auc " << num(r.auc) << '\n';
  });
}

RunConfig checkpoint_config(const Checkpoint& c) { return RunConfig::parse(c.config_text, "checkpoint"); }

Checkpoint open_checkpoint(const fs::path& path) {
  Checkpoint c = load_checkpoint(path);
  c.vocab.freeze();
  return c;
}

void check_types(const TypeCatalog& catalog, const ModelParams& params, const VariantFlags& flags) {
  const std::size_t want = params.generator.type_emb.dim(0);
  if (catalog.type_count(flags.granularity) != want) {
    throw SchemaError("type inventory has " + std::to_string(catalog.type_count(flags.granularity)) +
                      " " + std::string(granularity_name(flags.granularity)) +
                      " types but the checkpoint was trained with " + std::to_string(want));
  }
}

std::vector<Bag> load_test(const RunConfig& cfg, Checkpoint& ckpt, const RunConfig& saved) {
  return load_bags(data_paths(cfg).test, ckpt.relations, ckpt.vocab, load_options(saved));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::string dir_name(const std::string& variant) {
  std::string out = variant;
  std::replace(out.begin(), out.end(), '/', '-');
  return out;
}

}  // namespace

void cmd_gen(const RunConfig& cfg, std::ostream& log) {
  cfg.require("seed");
  const SynthConfig sc = synth_config(cfg);
  const fs::path dir = output_dir(cfg);
  const SynthCorpus corpus = generate_synthetic(sc);
  save_synthetic(dir, corpus);
  std::size_t noisy = 0;
  for (const auto& r : corpus.provenance) noisy += r.status == BagStatus::kNoisy;
  log << "generated " << corpus.train.size() << " train and " << corpus.test.size() << " test bags ("
      << noisy << " noisy) in " << dir.string() << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.require("seed");
  require_data(cfg, true);
  const VariantFlags flags = variant_flags(cfg);
  train_config(cfg);
  model_config(cfg);
  const fs::path dir = output_dir(cfg);
  const TrainingData d = load_training_data(cfg, log);
  const FitResult res = train_variant(cfg, d, flags, log, "");
  save_checkpoint(dir / "model.ckpt", make_checkpoint(cfg, res, d));
  write_file(dir / "epochs.csv", format_epoch_log(res.log));
  log << "best epoch " << res.best_epoch << ", checkpoint " << (dir / "model.ckpt").string() << '\n';
}

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
  cfg.require("checkpoint");
  require_data(cfg, false);
  const EvalOptions options = eval_options(cfg);
  Checkpoint ckpt = open_checkpoint(cfg.path("checkpoint"));
  const RunConfig saved = checkpoint_config(ckpt);
  // Ablations need retraining: evaluation may not change the architecture.
  for (const auto& [key, value] : cfg.explicit_values()) {
    const bool structural = key.rfind("variant.", 0) == 0 || key.rfind("model.", 0) == 0;
    if (structural && value != saved.get(key)) {
      throw ConfigError("key '" + key + "' is " + value + " but the checkpoint was trained with " +
                        saved.get(key) + "; retrain to change the model structure");
    }
  }
  const VariantFlags flags = variant_flags(saved);
  const fs::path dir = output_dir(cfg);
  const DataPaths paths = data_paths(cfg);
  const TypeCatalog catalog = load_types(paths.types, paths.coarse);
  check_types(catalog, ckpt.params, flags);
  const std::vector<Bag> test = load_test(cfg, ckpt, saved);
  const EvalReport rep = evaluate(test, catalog, ckpt.params, flags, ckpt.train_counts, options);
  write_report(dir, rep, options);
  log << format_metrics(rep, options);
}

std::vector<AblationVariant> ablation_variants(const RunConfig& cfg) {
  auto base = [](const std::string& name) {
    VariantFlags f;
    if (name == "full") return f;
    if (name == "noatt") f.dyn_att = false;
    else if (name == "nocls") f.dyn_cls = false;
    else if (name == "notype") f.use_types = false;
    else throw ConfigError("ablate.variants: unknown variant '" + name + "' (full, noatt, nocls, notype)");
    return f;
  };
  std::vector<AblationVariant> out;
  std::vector<VariantFlags> seen;
  auto add = [&](std::string b, VariantFlags f, AggregationStrategy s, Granularity g) {
    f.strategy = s;
    f.granularity = g;
    const VariantFlags n = f.normalized();
    if (std::find(seen.begin(), seen.end(), n) != seen.end()) return;
    seen.push_back(n);
    const std::string name =
        n.use_types ? b + "/" + std::string(strategy_name(s)) + "/" + std::string(granularity_name(g)) : b;
    out.push_back({name, n});
  };
  std::vector<AggregationStrategy> strategies;
  for (const auto& s : cfg.list("ablate.strategies")) strategies.push_back(parse_strategy(s));
  std::vector<Granularity> granularities;
  for (const auto& g : cfg.list("ablate.granularities")) granularities.push_back(parse_granularity(g));
  for (const auto& item : cfg.list("ablate.variants")) {
    const auto slash = item.find('/');
    if (slash == std::string::npos) {
      for (auto s : strategies)
        for (auto g : granularities) add(item, base(item), s, g);
      continue;
    }
    const auto second = item.find('/', slash + 1);
    if (second == std::string::npos) throw ConfigError("ablate.variants: expected name/strategy/granularity, got '" + item + "'");
    const std::string b = item.substr(0, slash);
    add(b, base(b), parse_strategy(item.substr(slash + 1, second - slash - 1)),
        parse_granularity(item.substr(second + 1)));
  }
  if (out.empty()) throw ConfigError("ablate.variants selects no variant");
  return out;
}

AblationResult run_ablation(const RunConfig& cfg, std::ostream& log) {
  AblationResult result;
  result.variants = ablation_variants(cfg);
  const EvalOptions options = eval_options(cfg);
  const fs::path dir = cfg.path("out");
  const bool synthetic = cfg.get("data.dir").empty() && cfg.get("data.train").empty();
  if (!synthetic) require_data(cfg, true);
  for (const auto& s : cfg.list("ablate.seeds")) {
    result.seeds.push_back(parse_unsigned("ablate.seeds", s));
  }
  if (result.seeds.empty()) result.seeds.push_back(cfg.seed());

  for (std::uint64_t seed : result.seeds) {
    RunConfig run = cfg;
    run.set("seed", std::to_string(seed));
    const fs::path seed_dir = dir / ("seed-" + std::to_string(seed));
    TrainingData data;
    if (synthetic) {
      const SynthCorpus& corpus = result.corpora[seed] = generate_synthetic(synth_config(run));
      data = from_synthetic(corpus);
    } else {
      data = load_training_data(run, log);
    }
    const auto counts = class_counts(data.train, data.relations.size());
    result.train_counts = counts;
    for (const auto& v : result.variants) {
      const std::string tag = "[seed " + std::to_string(seed) + " " + v.name + "] ";
      const FitResult res = train_variant(run, data, v.flags, log, tag);
      AblationEntry e{seed, v.name, v.flags, evaluate(data.test, data.catalog, res.best, v.flags, counts, options),
                      res.best_epoch};
      if (!dir.empty()) {
        const fs::path vdir = seed_dir / dir_name(v.name);
        write_report(vdir, e.report, options);
        write_file(vdir / "epochs.csv", format_epoch_log(res.log));
      }
      log << tag << "auc " << num(e.report.auc_full) << " auc@" << options.recall_cap << " "
          << num(e.report.auc_capped) << '\n';
      result.entries.push_back(std::move(e));
    }
  }
  return result;
}

std::string format_ablation(const AblationResult& result, const EvalOptions& options) {
  std::string out = "seed\tvariant\tauc\tauc_recall_lt_" + num(options.recall_cap) + "\tbest_epoch";
  for (std::size_t n : options.p_at) out += "\tp_at_" + std::to_string(n);
  for (int m : options.max_train)
    for (std::size_t k : options.hits_k) out += "\thits_at_" + std::to_string(k) + "_lt_" + std::to_string(m);
  out += '\n';
  for (const auto& e : result.entries) {
    out += std::to_string(e.seed) + '\t' + e.variant + '\t' + num(e.report.auc_full) + '\t' +
           num(e.report.auc_capped) + '\t' + std::to_string(e.best_epoch);
    for (const auto& [n, v] : e.report.p_at) out += '\t' + (v ? num(*v) : "n/a");
    for (const auto& h : e.report.hits) out += '\t' + (h.value ? num(*h.value) : "n/a");
    out += '\n';
  }
  return out;
}

std::string format_ablation_summary(const AblationResult& result, const EvalOptions& options) {
  std::string out = "variant\tseeds\tmedian_auc\tmedian_auc_recall_lt_" + num(options.recall_cap) + "\n";
  for (const auto& v : result.variants) {
    std::vector<double> full, capped;
    for (const auto& e : result.entries) {
      if (e.variant != v.name) continue;
      full.push_back(e.report.auc_full);
      capped.push_back(e.report.auc_capped);
    }
    out += v.name + '\t' + std::to_string(full.size()) + '\t' + num(median(full)) + '\t' +
           num(median(capped)) + '\n';
  }
  return out;
}

void cmd_ablate(const RunConfig& cfg, std::ostream& log) {
  cfg.require("seed");
  const EvalOptions options = eval_options(cfg);
  train_config(cfg);
  model_config(cfg);
  ablation_variants(cfg);
  const fs::path dir = output_dir(cfg);
  const AblationResult result = run_ablation(cfg, log);
  write_file(dir / "ablation.tsv", format_ablation(result, options));
  const std::string summary = format_ablation_summary(result, options);
  write_file(dir / "ablation_summary.tsv", summary);
  log << summary;
}

void cmd_case_report(const RunConfig& cfg, std::ostream& log) {
  cfg.require("case.checkpoint_a");
  cfg.require("case.checkpoint_b");
  require_data(cfg, false);
  Checkpoint a = open_checkpoint(cfg.path("case.checkpoint_a"));
  Checkpoint b = open_checkpoint(cfg.path("case.checkpoint_b"));
  if (!(a.vocab == b.vocab) || !(a.relations == b.relations)) {
    throw SchemaError("the two checkpoints were trained on different vocabularies or relation sets");
  }
  const RunConfig saved_a = checkpoint_config(a), saved_b = checkpoint_config(b);
  const VariantFlags fa = variant_flags(saved_a), fb = variant_flags(saved_b);
  const fs::path dir = output_dir(cfg);
  const DataPaths paths = data_paths(cfg);
  const TypeCatalog catalog = load_types(paths.types, paths.coarse);
  check_types(catalog, a.params, fa);
  check_types(catalog, b.params, fb);
  const std::vector<Bag> test = load_test(cfg, a, saved_a);

  std::vector<std::size_t> picked;
  for (const auto& item : cfg.list("case.bags")) {
    const std::uint64_t i = parse_unsigned("case.bags", item);
    if (i >= test.size()) throw ConfigError("case.bags: bag " + item + " is out of range");
    picked.push_back(i);
  }
  if (picked.empty()) {
    for (std::size_t i = 0; i < test.size() && picked.size() < cfg.count("case.limit"); ++i) {
      if (test[i].label != 0) picked.push_back(i);
    }
  }
  const CaseVariant va{&a.params, fa, cfg.get("case.label_a")};
  const CaseVariant vb{&b.params, fb, cfg.get("case.label_b")};
  std::string text;
  for (std::size_t i : picked) {
    text += "bag " + std::to_string(i) + "\n" + format_case(case_report(test[i], catalog, a.relations, va, vb)) + "\n";
  }
  write_file(dir / "case_report.txt", text);
  log << text;
}

int run_command(std::string_view verb, const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    if (verb == "gen") cmd_gen(cfg, log);
    else if (verb == "train") cmd_train(cfg, log);
    else if (verb == "eval") cmd_eval(cfg, log);
    else if (verb == "ablate") cmd_ablate(cfg, log);
    else if (verb == "case-report") cmd_case_report(cfg, log);
    else {
      err << "unknown command '" << verb << "' (gen, train, eval, ablate, case-report)\n";
      return kExitConfig;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace dnnre
