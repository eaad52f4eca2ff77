#include "dnnre/cli/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dnnre/errors.h"

namespace dnnre {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <typename T>
std::string join_list(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    out += std::to_string(item);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::map<std::string, std::string> build_defaults() {
  const SynthConfig s;
  const ModelConfig m;
  const TrainConfig t;
  const VariantFlags v;
  const EvalOptions e;
  return {
      {"seed", "1"},
      {"out", ""},
      {"checkpoint", ""},
      {"data.dir", ""},
      {"data.train", ""},
      {"data.test", ""},
      {"data.heldout", ""},
      {"data.types", ""},
      {"data.coarse", ""},
      {"data.relations", ""},
      {"data.embeddings", ""},
      {"data.max_sentence_length", "120"},
      {"synth.n_relations", fmt(s.n_relations)},
      {"synth.n_fine_types", fmt(s.n_fine_types)},
      {"synth.coarse_group_size", fmt(s.coarse_group_size)},
      {"synth.relation_group_size", fmt(s.relation_group_size)},
      {"synth.class_size_exponent", fmt(s.class_size_exponent)},
      {"synth.positive_bags", fmt(s.positive_bags)},
      {"synth.na_bags", fmt(s.na_bags)},
      {"synth.test_bags_per_class", fmt(s.test_bags_per_class)},
      {"synth.na_test_bags", fmt(s.na_test_bags)},
      {"synth.noise_rate", fmt(s.noise_rate)},
      {"synth.vocab_size", fmt(s.vocab_size)},
      {"synth.sent_len_min", fmt(s.sent_len_min)},
      {"synth.sent_len_max", fmt(s.sent_len_max)},
      {"synth.bag_size_min", fmt(s.bag_size_min)},
      {"synth.bag_size_max", fmt(s.bag_size_max)},
      {"synth.keyword_sentence_rate", fmt(s.keyword_sentence_rate)},
      {"synth.distractor_rate", fmt(s.distractor_rate)},
      {"synth.multi_type_rate", fmt(s.multi_type_rate)},
      {"synth.unk_type_rate", fmt(s.unk_type_rate)},
      {"synth.na_keyword_rate", fmt(s.na_keyword_rate)},
      {"synth.na_mismatch_rate", fmt(s.na_mismatch_rate)},
      {"synth.tail_affinity", fmt(s.tail_affinity)},
      {"synth.head_type_skew", fmt(s.head_type_skew)},
      {"model.word_dim", fmt(m.encoder.word_dim)},
      {"model.position_dim", fmt(m.encoder.position_dim)},
      {"model.window", fmt(m.encoder.window)},
      {"model.filters", fmt(m.encoder.filters)},
      {"model.sentence_dim", fmt(m.encoder.sentence_dim)},
      {"model.max_distance", std::to_string(m.encoder.max_distance)},
      {"model.type_dim", fmt(m.type_dim)},
      {"train.batch_size", fmt(t.batch_size)},
      {"train.learning_rate", fmt(t.learning_rate)},
      {"train.dropout_keep", fmt(t.dropout_keep)},
      {"train.l2", fmt(t.l2)},
      {"train.epochs", fmt(t.epochs)},
      {"train.rho", fmt(t.rho)},
      {"train.eps", fmt(t.eps)},
      {"train.attention", std::string(train_attention_name(t.attention))},
      {"variant.dyn_att", fmt(v.dyn_att)},
      {"variant.dyn_cls", fmt(v.dyn_cls)},
      {"variant.use_types", fmt(v.use_types)},
      {"variant.granularity", std::string(granularity_name(v.granularity))},
      {"variant.strategy", std::string(strategy_name(v.strategy))},
      {"eval.recall_cap", fmt(e.recall_cap)},
      {"eval.p_at", join_list(e.p_at)},
      {"eval.max_train", join_list(e.max_train)},
      {"eval.hits_k", join_list(e.hits_k)},
      {"ablate.variants", "full,noatt,nocls,notype"},
      {"ablate.strategies", "attention,avg,max"},
      {"ablate.granularities", "fine,coarse"},
      {"ablate.seeds", ""},
      {"case.checkpoint_a", ""},
      {"case.checkpoint_b", ""},
      {"case.label_a", "a"},
      {"case.label_b", "b"},
      {"case.bags", ""},
      {"case.limit", "10"},
  };
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw ConfigError("key '" + key + "': '" + value + "' is not " + what);
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const auto table = build_defaults();
  return table;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!defaults().count(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (cfg.values_.count(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const auto d = defaults().find(key);
  if (d == defaults().end()) throw ConfigError("unknown key '" + key + "'");
  return d->second;
}

void RunConfig::require(const std::string& key) const {
  if (!has(key) || get(key).empty()) throw ConfigError("missing required key '" + key + "'");
}

double RunConfig::number(const std::string& key) const {
  const std::string v = get(key);
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    bad_value(key, text, "a non-negative integer");
  }
  return out;
}

std::size_t RunConfig::count(const std::string& key) const { return parse_unsigned(key, get(key)); }

std::uint64_t RunConfig::seed() const { return parse_unsigned("seed", get("seed")); }

bool RunConfig::flag(const std::string& key) const {
  const std::string v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean (true/false)");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(get(key));
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::filesystem::path RunConfig::path(const std::string& key) const { return get(key); }

std::string RunConfig::resolved_text() const { return resolved_text({""}); }

std::string RunConfig::resolved_text(const std::vector<std::string>& prefixes) const {
  std::string out;
  for (const auto& [key, def] : defaults()) {
    bool keep = false;
    for (const auto& p : prefixes) {
      keep = keep || (p.empty() || (p.back() == '.' ? key.rfind(p, 0) == 0 : key == p));
    }
    if (keep) out += key + " = " + get(key) + "\n";
  }
  return out;
}

SynthConfig synth_config(const RunConfig& cfg) {
  SynthConfig s;
  s.n_relations = cfg.count("synth.n_relations");
  s.n_fine_types = cfg.count("synth.n_fine_types");
  s.coarse_group_size = cfg.count("synth.coarse_group_size");
  s.relation_group_size = cfg.count("synth.relation_group_size");
  s.class_size_exponent = cfg.number("synth.class_size_exponent");
  s.positive_bags = cfg.count("synth.positive_bags");
  s.na_bags = cfg.count("synth.na_bags");
  s.test_bags_per_class = cfg.count("synth.test_bags_per_class");
  s.na_test_bags = cfg.count("synth.na_test_bags");
  s.noise_rate = cfg.number("synth.noise_rate");
  s.vocab_size = cfg.count("synth.vocab_size");
  s.sent_len_min = cfg.count("synth.sent_len_min");
  s.sent_len_max = cfg.count("synth.sent_len_max");
  s.bag_size_min = cfg.count("synth.bag_size_min");
  s.bag_size_max = cfg.count("synth.bag_size_max");
  s.keyword_sentence_rate = cfg.number("synth.keyword_sentence_rate");
  s.distractor_rate = cfg.number("synth.distractor_rate");
  s.multi_type_rate = cfg.number("synth.multi_type_rate");
  s.unk_type_rate = cfg.number("synth.unk_type_rate");
  s.na_keyword_rate = cfg.number("synth.na_keyword_rate");
  s.na_mismatch_rate = cfg.number("synth.na_mismatch_rate");
  s.tail_affinity = cfg.number("synth.tail_affinity");
  s.head_type_skew = cfg.number("synth.head_type_skew");
  s.seed = cfg.seed();
  validate(s);
  return s;
}

ModelConfig model_config(const RunConfig& cfg) {
  ModelConfig m;
  m.encoder.word_dim = cfg.count("model.word_dim");
  m.encoder.position_dim = cfg.count("model.position_dim");
  m.encoder.window = cfg.count("model.window");
  m.encoder.filters = cfg.count("model.filters");
  m.encoder.sentence_dim = cfg.count("model.sentence_dim");
  m.encoder.max_distance = static_cast<int>(cfg.count("model.max_distance"));
  m.type_dim = cfg.count("model.type_dim");
  if (m.encoder.word_dim == 0 || m.encoder.filters == 0 || m.encoder.sentence_dim == 0 ||
      m.type_dim == 0 || m.encoder.window % 2 == 0) {
    throw ConfigError("model dimensions must be positive and model.window odd");
  }
  return m;
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.batch_size = cfg.count("train.batch_size");
  t.learning_rate = cfg.number("train.learning_rate");
  t.dropout_keep = cfg.number("train.dropout_keep");
  t.l2 = cfg.number("train.l2");
  t.epochs = cfg.count("train.epochs");
  t.rho = cfg.number("train.rho");
  t.eps = cfg.number("train.eps");
  t.attention = parse_train_attention(cfg.get("train.attention"));
  t.seed = cfg.seed();
  validate(t);
  return t;
}

VariantFlags variant_flags(const RunConfig& cfg) {
  VariantFlags v;
  v.dyn_att = cfg.flag("variant.dyn_att");
  v.dyn_cls = cfg.flag("variant.dyn_cls");
  v.use_types = cfg.flag("variant.use_types");
  v.granularity = parse_granularity(cfg.get("variant.granularity"));
  v.strategy = parse_strategy(cfg.get("variant.strategy"));
  return v;
}

EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions e;
  e.recall_cap = cfg.number("eval.recall_cap");
  if (!(e.recall_cap > 0.0 && e.recall_cap <= 1.0)) throw ConfigError("eval.recall_cap must lie in (0, 1]");
  auto sizes = [&](const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& item : cfg.list(key)) {
      const std::uint64_t v = parse_unsigned(key, item);
      if (v == 0) bad_value(key, item, "a positive integer");
      out.push_back(v);
    }
    return out;
  };
  e.p_at = sizes("eval.p_at");
  e.hits_k = sizes("eval.hits_k");
  e.max_train.clear();
  for (std::size_t m : sizes("eval.max_train")) e.max_train.push_back(static_cast<int>(m));
  return e;
}

}  // namespace dnnre
