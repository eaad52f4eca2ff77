#include "dnnre/corpus/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dnnre/corpus/io.h"
#include "dnnre/errors.h"
#include "dnnre/random.h"

namespace dnnre {
namespace {

constexpr std::string_view kHeadToken = "ENT_HEAD";
constexpr std::string_view kTailToken = "ENT_TAIL";

std::size_t coarse_count(const SynthConfig& cfg) {
  return (cfg.n_fine_types + cfg.coarse_group_size - 1) / cfg.coarse_group_size;
}

std::size_t group_count(const SynthConfig& cfg) {
  const std::size_t positives = cfg.n_relations - 1;
  return (positives + cfg.relation_group_size - 1) / cfg.relation_group_size;
}

std::vector<int> fine_types_of(const SynthConfig& cfg, int coarse) {
  std::vector<int> out;
  for (std::size_t f = 0; f < cfg.n_fine_types; ++f) {
    if (static_cast<int>(f / cfg.coarse_group_size) == coarse) out.push_back(static_cast<int>(f));
  }
  return out;
}

std::string keyword_name(std::size_t group, std::size_t j) {
  return "kw_g" + std::to_string(group) + "_" + std::to_string(j);
}

void check_rate(double v, const char* name, bool allow_one) {
  if (!(v >= 0.0) || v > 1.0 || (!allow_one && v == 1.0)) {
    throw ConfigError(std::string(name) + " out of range: " + std::to_string(v));
  }
}

class Generator {
 public:
  Generator(const SynthConfig& cfg, SynthCorpus& out) : cfg_(cfg), out_(out) {
    for (const auto& [key, kw] : out_.keywords) {
      keyword_ids_[kw] = out_.vocab.lookup(kw);
      (void)key;
    }
    for (std::size_t t = 0; t < out_.vocab.size(); ++t) {
      const std::string& tok = out_.vocab.token(static_cast<int>(t));
      if (tok.rfind("w", 0) == 0) fillers_.push_back(static_cast<int>(t));
    }
    for (const auto& [key, kw] : out_.keywords) {
      const int g = out_.signatures[static_cast<std::size_t>(key.relation)].group;
      auto& list = group_keywords_[g];
      if (std::find(list.begin(), list.end(), kw) == list.end()) list.push_back(kw);
    }
  }

  void generate_split(const std::string& split, const std::vector<std::size_t>& sizes, Rng& rng,
                      std::vector<Bag>& bags) {
    const auto noisy = noisy_counts(sizes, cfg_.noise_rate);
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      // Noisy bags are a seeded subset of each positive class.
      std::vector<char> is_noisy(sizes[c], 0);
      if (c > 0) {
        std::fill_n(is_noisy.begin(), noisy[c], 1);
        shuffle(is_noisy, rng);
      }
      for (std::size_t i = 0; i < sizes[c]; ++i) {
        ProvenanceRecord rec;
        rec.split = split;
        rec.bag_index = bags.size();
        rec.label = static_cast<int>(c);
        if (c == 0) {
          bags.push_back(na_bag(rng, rec));
        } else {
          bags.push_back(relation_bag(static_cast<int>(c), is_noisy[i] != 0, rng, rec));
        }
        out_.provenance.push_back(rec);
      }
    }
  }

 private:
  std::string new_entity(Rng& rng, int primary_fine) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "e%07zu", next_entity_++);
    std::string id(buf);
    if (bernoulli(rng, cfg_.unk_type_rate)) return id;  // left out of the type file
    std::vector<int> types{primary_fine};
    const int coarse = primary_fine / static_cast<int>(cfg_.coarse_group_size);
    if (coarse_count(cfg_) > 1 && bernoulli(rng, cfg_.multi_type_rate)) {
      int other;
      do {
        other = static_cast<int>(uniform_index(rng, cfg_.n_fine_types));
      } while (other / static_cast<int>(cfg_.coarse_group_size) == coarse);
      types.push_back(other);
    }
    out_.catalog.set_entity_types(id, types);
    return id;
  }

  // Head fine types within a coarse type are Zipf-weighted.
  std::vector<double> head_weights(std::size_t n) const {
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = std::pow(static_cast<double>(j + 1), -cfg_.head_type_skew);
    return w;
  }

  static std::size_t weighted_index(Rng& rng, const std::vector<double>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double u = uniform01(rng) * total;
    for (std::size_t j = 0; j + 1 < w.size(); ++j) {
      if (u < w[j]) return j;
      u -= w[j];
    }
    return w.size() - 1;
  }

  int filler(Rng& rng) { return fillers_[uniform_index(rng, fillers_.size())]; }

  Sentence sentence(Rng& rng, int keyword_id) {
    const std::size_t len = static_cast<std::size_t>(
        uniform_int(rng, static_cast<long>(cfg_.sent_len_min), static_cast<long>(cfg_.sent_len_max)));
    std::vector<int> slots(len);
    std::iota(slots.begin(), slots.end(), 0);
    shuffle(slots, rng);
    Sentence s;
    s.tokens.resize(len);
    for (int& t : s.tokens) t = filler(rng);
    s.head_pos = slots[0];
    s.tail_pos = slots[1];
    s.tokens[static_cast<std::size_t>(s.head_pos)] = out_.vocab.lookup(kHeadToken);
    s.tokens[static_cast<std::size_t>(s.tail_pos)] = out_.vocab.lookup(kTailToken);
    if (keyword_id >= 0) s.tokens[static_cast<std::size_t>(slots[2])] = keyword_id;
    for (std::size_t i = 0; i < len; ++i) {
      if (i) s.raw_text.push_back(' ');
      s.raw_text += out_.vocab.token(s.tokens[i]);
    }
    return s;
  }

  std::size_t bag_size(Rng& rng) {
    return static_cast<std::size_t>(
        uniform_int(rng, static_cast<long>(cfg_.bag_size_min), static_cast<long>(cfg_.bag_size_max)));
  }

  Bag relation_bag(int rel, bool noisy, Rng& rng, ProvenanceRecord& rec) {
    const RelationSignature& sig = out_.signatures[static_cast<std::size_t>(rel)];
    const auto heads = fine_types_of(cfg_, sig.head_coarse);
    const auto tails = fine_types_of(cfg_, sig.tail_coarse);
    const int hf = heads[weighted_index(rng, head_weights(heads.size()))];
    const int tf = bernoulli(rng, cfg_.tail_affinity) ? sig.tail_fine
                                                      : tails[uniform_index(rng, tails.size())];
    Bag bag;
    bag.label = rel;
    bag.head = new_entity(rng, hf);
    bag.tail = new_entity(rng, tf);
    rec.head_fine = hf;
    rec.tail_fine = tf;
    const std::size_t n = bag_size(rng);
    if (noisy) {
      rec.status = BagStatus::kNoisy;
      rec.keyword = "-";
      for (std::size_t i = 0; i < n; ++i) bag.sentences.push_back(sentence(rng, -1));
    } else {
      rec.status = BagStatus::kClean;
      rec.keyword = out_.keywords.at(KeywordKey{rel, hf, tf});
      const int kw = keyword_ids_.at(rec.keyword);
      // The first sentence always expresses the relation; the rest may not.
      bag.sentences.push_back(sentence(rng, kw));
      // Under this head type a sibling's keyword names the sibling, even
      // though the same word names this relation under another head type.
      std::vector<int> siblings;
      for (std::size_t r = 1; r < out_.signatures.size(); ++r) {
        if (static_cast<int>(r) != rel && out_.signatures[r].group == sig.group) {
          siblings.push_back(keyword_ids_.at(out_.keywords.at(
              KeywordKey{static_cast<int>(r), hf, out_.signatures[r].tail_fine})));
        }
      }
      for (std::size_t i = 1; i < n; ++i) {
        int word = -1;
        if (bernoulli(rng, cfg_.keyword_sentence_rate)) {
          word = kw;
        } else if (cfg_.distractor_rate > 0.0 && !siblings.empty() && bernoulli(rng, cfg_.distractor_rate)) {
          word = siblings[uniform_index(rng, siblings.size())];
        }
        bag.sentences.push_back(sentence(rng, word));
      }
      shuffle(bag.sentences, rng);
    }
    rec.head = bag.head;
    rec.tail = bag.tail;
    return bag;
  }

  Bag na_bag(Rng& rng, ProvenanceRecord& rec) {
    Bag bag;
    bag.label = 0;
    if (cfg_.na_mismatch_rate > 0.0 && bernoulli(rng, cfg_.na_mismatch_rate)) return mismatch_bag(rng, rec);
    const int hf = static_cast<int>(uniform_index(rng, cfg_.n_fine_types));
    const int tf = static_cast<int>(uniform_index(rng, cfg_.n_fine_types));
    bag.head = new_entity(rng, hf);
    bag.tail = new_entity(rng, tf);
    rec.status = BagStatus::kNa;
    rec.head_fine = hf;
    rec.tail_fine = tf;
    rec.keyword = "-";
    int kw = -1;
    if (bernoulli(rng, cfg_.na_keyword_rate)) {
      // Only keywords whose signature the pair does not match, so the bag
      // never actually expresses a relation.
      const int hc = hf / static_cast<int>(cfg_.coarse_group_size);
      const int tc = tf / static_cast<int>(cfg_.coarse_group_size);
      std::vector<std::string> candidates;
      for (const auto& [g, kws] : group_keywords_) {
        bool matches = false;
        for (const auto& sig : out_.signatures) {
          if (sig.group == g && sig.head_coarse == hc && sig.tail_coarse == tc) matches = true;
        }
        if (!matches) candidates.insert(candidates.end(), kws.begin(), kws.end());
      }
      if (!candidates.empty()) {
        rec.keyword = candidates[uniform_index(rng, candidates.size())];
        kw = keyword_ids_.at(rec.keyword);
      }
    }
    const std::size_t n = bag_size(rng);
    bag.sentences.push_back(sentence(rng, kw));
    for (std::size_t i = 1; i < n; ++i) bag.sentences.push_back(sentence(rng, -1));
    shuffle(bag.sentences, rng);
    rec.head = bag.head;
    rec.tail = bag.tail;
    return bag;
  }

  // The keyword of relation r under the head type, with a tail type other
  // than the one r takes: the word alone would suggest r, the pair rules it out.
  Bag mismatch_bag(Rng& rng, ProvenanceRecord& rec) {
    const int rel = 1 + static_cast<int>(uniform_index(rng, out_.signatures.size() - 1));
    const RelationSignature& sig = out_.signatures[static_cast<std::size_t>(rel)];
    const auto heads = fine_types_of(cfg_, sig.head_coarse);
    std::vector<int> tails;
    for (int t : fine_types_of(cfg_, sig.tail_coarse)) {
      if (t != sig.tail_fine) tails.push_back(t);
    }
    const int hf = heads[weighted_index(rng, head_weights(heads.size()))];
    const int tf = tails.empty() ? sig.tail_fine : tails[uniform_index(rng, tails.size())];
    Bag bag;
    bag.label = 0;
    bag.head = new_entity(rng, hf);
    bag.tail = new_entity(rng, tf);
    rec.status = BagStatus::kNa;
    rec.head_fine = hf;
    rec.tail_fine = tf;
    rec.keyword = out_.keywords.at(KeywordKey{rel, hf, sig.tail_fine});
    const int kw = keyword_ids_.at(rec.keyword);
    const std::size_t n = bag_size(rng);
    bag.sentences.push_back(sentence(rng, kw));
    for (std::size_t i = 1; i < n; ++i) bag.sentences.push_back(sentence(rng, -1));
    shuffle(bag.sentences, rng);
    rec.head = bag.head;
    rec.tail = bag.tail;
    return bag;
  }

  const SynthConfig& cfg_;
  SynthCorpus& out_;
  std::map<std::string, int> keyword_ids_;
  std::map<int, std::vector<std::string>> group_keywords_;
  std::vector<int> fillers_;
  std::size_t next_entity_ = 1;
};

}  // namespace

std::string_view bag_status_name(BagStatus s) {
  switch (s) {
    case BagStatus::kClean: return "clean";
    case BagStatus::kNoisy: return "noisy";
    case BagStatus::kNa: return "na";
  }
  return "?";
}

void validate(const SynthConfig& cfg) {
  if (cfg.n_relations < 2) throw ConfigError("n_relations must be at least 2 (NA plus one relation)");
  if (cfg.n_fine_types < 1) throw ConfigError("n_fine_types must be positive");
  if (cfg.coarse_group_size < 1) throw ConfigError("coarse_group_size must be positive");
  if (cfg.relation_group_size < 1) throw ConfigError("relation_group_size must be positive");
  if (!(cfg.class_size_exponent >= 0.0)) throw ConfigError("class_size_exponent must be >= 0");
  check_rate(cfg.noise_rate, "noise_rate", false);
  check_rate(cfg.keyword_sentence_rate, "keyword_sentence_rate", true);
  check_rate(cfg.multi_type_rate, "multi_type_rate", true);
  check_rate(cfg.unk_type_rate, "unk_type_rate", true);
  check_rate(cfg.na_keyword_rate, "na_keyword_rate", true);
  check_rate(cfg.na_mismatch_rate, "na_mismatch_rate", true);
  check_rate(cfg.distractor_rate, "distractor_rate", true);
  check_rate(cfg.tail_affinity, "tail_affinity", true);
  if (!(cfg.head_type_skew >= 0.0)) throw ConfigError("head_type_skew must be >= 0");
  if (cfg.sent_len_min < 3 || cfg.sent_len_max < cfg.sent_len_min) {
    throw ConfigError("sentence length range must satisfy 3 <= min <= max");
  }
  if (cfg.bag_size_min < 1 || cfg.bag_size_max < cfg.bag_size_min) {
    throw ConfigError("bag size range must satisfy 1 <= min <= max");
  }
  if (cfg.positive_bags < 1) throw ConfigError("positive_bags must be positive");
  std::size_t keywords = 0;
  if (cfg.keyword_table.empty()) {
    keywords = cfg.n_relations - 1;
  } else {
    std::vector<std::string> distinct;
    for (const auto& [k, v] : cfg.keyword_table) distinct.push_back(v);
    std::sort(distinct.begin(), distinct.end());
    keywords = static_cast<std::size_t>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  }
  // PAD, UNK, two entity markers, keywords, at least one filler.
  const std::size_t required = 4 + keywords + 1;
  if (cfg.vocab_size < required) {
    throw ConfigError("vocab_size " + std::to_string(cfg.vocab_size) + " cannot hold " +
                      std::to_string(keywords) + " keywords (need at least " +
                      std::to_string(required) + ")");
  }
}

std::vector<std::size_t> class_sizes(const SynthConfig& cfg) {
  const std::size_t n = cfg.n_relations;
  double z = 0.0;
  for (std::size_t c = 1; c < n; ++c) z += std::pow(static_cast<double>(c), -cfg.class_size_exponent);
  std::vector<std::size_t> sizes(n, 0);
  sizes[0] = cfg.na_bags;
  for (std::size_t c = 1; c < n; ++c) {
    const double share = static_cast<double>(cfg.positive_bags) *
                         std::pow(static_cast<double>(c), -cfg.class_size_exponent) / z;
    sizes[c] = static_cast<std::size_t>(std::ceil(share));
  }
  return sizes;
}

std::vector<std::size_t> noisy_counts(const std::vector<std::size_t>& sizes, double noise_rate) {
  std::vector<std::size_t> out(sizes.size(), 0);
  std::size_t total = 0;
  for (std::size_t c = 1; c < sizes.size(); ++c) total += sizes[c];
  const auto target = static_cast<std::size_t>(std::llround(noise_rate * static_cast<double>(total)));
  // Largest-remainder apportionment; ties go to the lower class id.
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 1; c < sizes.size(); ++c) {
    const double exact = noise_rate * static_cast<double>(sizes[c]);
    out[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i, ++assigned) {
    ++out[remainders[i].second];
  }
  return out;
}

std::vector<RelationSignature> relation_signatures(const SynthConfig& cfg) {
  const std::size_t groups = group_count(cfg);
  const std::size_t n_coarse = coarse_count(cfg);
  std::vector<RelationSignature> sigs(cfg.n_relations);
  for (std::size_t r = 1; r < cfg.n_relations; ++r) {
    const std::size_t g = (r - 1) % groups;
    const std::size_t member = (r - 1) / groups;
    sigs[r].group = static_cast<int>(g);
    sigs[r].head_coarse = static_cast<int>((2 * g) % n_coarse);
    sigs[r].tail_coarse = static_cast<int>((2 * g + 1) % n_coarse);
    const auto tails = fine_types_of(cfg, sigs[r].tail_coarse);
    sigs[r].tail_fine = tails[member % tails.size()];
  }
  return sigs;
}

KeywordTable build_keyword_table(const SynthConfig& cfg) {
  const auto sigs = relation_signatures(cfg);
  const std::size_t groups = group_count(cfg);
  KeywordTable table;
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<int> members;
    for (std::size_t r = 1; r < cfg.n_relations; ++r) {
      if (sigs[r].group == static_cast<int>(g)) members.push_back(static_cast<int>(r));
    }
    const std::size_t size = members.size();
    for (std::size_t i = 0; i < size; ++i) {
      const auto& sig = sigs[static_cast<std::size_t>(members[i])];
      for (int hf : fine_types_of(cfg, sig.head_coarse)) {
        for (int tf : fine_types_of(cfg, sig.tail_coarse)) {
          // Latin square over (member, head style): every keyword of the
          // group expresses every member under some fine head type.
          const std::size_t style = static_cast<std::size_t>(hf) % cfg.coarse_group_size;
          table[KeywordKey{members[i], hf, tf}] = keyword_name(g, (i + style) % size);
        }
      }
    }
  }
  return table;
}

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  validate(cfg);
  SynthCorpus out;
  out.signatures = relation_signatures(cfg);
  out.keywords = cfg.keyword_table.empty() ? build_keyword_table(cfg) : cfg.keyword_table;
  for (std::size_t r = 1; r < cfg.n_relations; ++r) {
    const auto& sig = out.signatures[r];
    for (int hf : fine_types_of(cfg, sig.head_coarse))
      for (int tf : fine_types_of(cfg, sig.tail_coarse))
        if (!out.keywords.count(KeywordKey{static_cast<int>(r), hf, tf})) {
          throw ConfigError("keyword table lacks an entry for relation " + std::to_string(r));
        }
  }

  std::vector<std::string> names{"NA"};
  for (std::size_t r = 1; r < cfg.n_relations; ++r) {
    names.push_back("/syn/g" + std::to_string(out.signatures[r].group) + "/rel" + std::to_string(r));
  }
  out.relations = RelationTable(names);

  for (std::size_t f = 0; f < cfg.n_fine_types; ++f) {
    const std::size_t c = f / cfg.coarse_group_size;
    out.catalog.add_fine_type("/c" + std::to_string(c) + "/f" + std::to_string(f),
                              "/c" + std::to_string(c));
  }

  out.vocab.add(kHeadToken);
  out.vocab.add(kTailToken);
  std::vector<std::string> kws;
  for (const auto& [k, v] : out.keywords) kws.push_back(v);
  std::sort(kws.begin(), kws.end());
  kws.erase(std::unique(kws.begin(), kws.end()), kws.end());
  for (const auto& kw : kws) out.vocab.add(kw);
  for (std::size_t i = 0; out.vocab.size() < cfg.vocab_size; ++i) out.vocab.add("w" + std::to_string(i));
  out.vocab.freeze();

  Generator gen(cfg, out);
  Rng train_rng(derive_seed(cfg.seed, "synth.train"));
  gen.generate_split("train", class_sizes(cfg), train_rng, out.train);
  std::vector<std::size_t> test_sizes(cfg.n_relations, cfg.test_bags_per_class);
  test_sizes[0] = cfg.na_test_bags;
  Rng test_rng(derive_seed(cfg.seed, "synth.test"));
  gen.generate_split("test", test_sizes, test_rng, out.test);
  return out;
}

void save_synthetic(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  save_bags(dir / "train.tsv", corpus.train, corpus.vocab, corpus.relations);
  save_bags(dir / "test.tsv", corpus.test, corpus.vocab, corpus.relations);
  save_types(dir / "types.tsv", corpus.catalog);
  save_coarse_mapping(dir / "coarse.tsv", corpus.catalog);
  save_relations(dir / "relations.txt", corpus.relations);
  {
    std::ofstream out(dir / "keywords.tsv", std::ios::binary);
    out << "relation\thead_type\ttail_type\tkeyword\n";
    for (const auto& [k, kw] : corpus.keywords) {
      out << corpus.relations.name(k.relation) << '\t' << corpus.catalog.fine_name(k.head_fine)
          << '\t' << corpus.catalog.fine_name(k.tail_fine) << '\t' << kw << '\n';
    }
  }
  std::ofstream out(dir / "provenance.tsv", std::ios::binary);
  out << "split\tbag\thead\ttail\trelation\tstatus\tkeyword\thead_type\ttail_type\n";
  for (const auto& r : corpus.provenance) {
    out << r.split << '\t' << r.bag_index << '\t' << r.head << '\t' << r.tail << '\t'
        << corpus.relations.name(r.label) << '\t' << bag_status_name(r.status) << '\t' << r.keyword
        << '\t' << corpus.catalog.fine_name(r.head_fine) << '\t'
        << corpus.catalog.fine_name(r.tail_fine) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + (dir / "provenance.tsv").string());
}

}  // namespace dnnre
