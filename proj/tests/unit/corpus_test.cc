#include <cmath>
#include <unistd.h>

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dnnre/corpus/corpus.h"
#include "dnnre/corpus/io.h"
#include "dnnre/corpus/synth.h"
#include "dnnre/errors.h"

using namespace dnnre;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("dnnre_corpus_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file, std::ios::binary) << text;
    return path / file;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> words(const Sentence& s, const Vocabulary& v) {
  std::vector<std::string> out;
  for (int t : s.tokens) out.push_back(v.token(t));
  return out;
}

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.positive_bags = 140;
  cfg.na_bags = 60;
  cfg.test_bags_per_class = 5;
  cfg.na_test_bags = 10;
  return cfg;
}

}  // namespace

TEST_CASE("sentences sharing an entity pair and relation form one bag") {
  TempDir dir("group");
  auto rel = dir.write("rel.txt", "NA\n/people/person/place_of_birth\n");
  auto sent = dir.write("s.tsv",
                        "m.1\tm.2\tobama\thonolulu\t/people/person/place_of_birth\tobama was born in honolulu\n"
                        "m.1\tm.2\tobama\thonolulu\t/people/person/place_of_birth\thonolulu native obama\n"
                        "m.1\tm.2\tobama\thonolulu\t/people/person/place_of_birth\tobama visited honolulu today\n"
                        "m.3\tm.2\tann\thonolulu\tNA\tann left honolulu\n");
  auto relations = load_relations(rel);
  Vocabulary vocab;
  LoadStats stats;
  auto bags = load_bags(sent, relations, vocab, {}, &stats);
  REQUIRE(bags.size() == 2);
  CHECK(bags[0].head == "m.1");
  CHECK(bags[0].sentences.size() == 3);
  CHECK(bags[0].label == 1);
  CHECK(bags[1].sentences.size() == 1);
  CHECK(stats.lines == 4);
  CHECK(stats.sentences == 4);
  CHECK(stats.bags == 2);
  const Sentence& s = bags[0].sentences[1];
  CHECK(vocab.token(s.tokens[static_cast<std::size_t>(s.head_pos)]) == "obama");
  CHECK(vocab.token(s.tokens[static_cast<std::size_t>(s.tail_pos)]) == "honolulu");
  CHECK(s.head_pos == 2);
  CHECK(s.tail_pos == 0);
}

TEST_CASE("same pair with different relations stays in separate bags") {
  TempDir dir("multi");
  auto rel = dir.write("rel.txt", "NA\n/a\n/b\n");
  auto sent = dir.write("s.tsv",
                        "x\ty\tx\ty\t/a\tx and y\n"
                        "x\ty\tx\ty\t/b\ty then x\n");
  Vocabulary vocab;
  auto bags = load_bags(sent, load_relations(rel), vocab);
  REQUIRE(bags.size() == 2);
  CHECK(bags[0].label == 1);
  CHECK(bags[1].label == 2);
}

TEST_CASE("malformed lines report their line number") {
  TempDir dir("parse");
  auto rel = dir.write("rel.txt", "NA\n/a\n");
  auto relations = load_relations(rel);
  Vocabulary vocab;
  auto short_line = dir.write("s.tsv", "x\ty\tx\ty\t/a\tx y\nx\ty\tx\n");
  try {
    load_bags(short_line, relations, vocab);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  auto bad_rel = dir.write("r.tsv", "x\ty\tx\ty\t/missing\tx y\n");
  CHECK_THROWS_AS(load_bags(bad_rel, relations, vocab), SchemaError);
}

TEST_CASE("mentions without a locatable entity are skipped and counted") {
  TempDir dir("skip");
  auto rel = dir.write("rel.txt", "NA\n");
  auto sent = dir.write("s.tsv",
                        "x\ty\tx\ty\tNA\tx meets y\n"
                        "x\ty\tx\ty\tNA\tnobody here\n"
                        "x\ty\tx\ty\tNA\tx x x\n");
  Vocabulary vocab;
  LoadStats stats;
  auto bags = load_bags(sent, load_relations(rel), vocab, {}, &stats);
  REQUIRE(bags.size() == 1);
  CHECK(bags[0].sentences.size() == 1);
  CHECK(stats.skipped_missing_entity == 2);
}

TEST_CASE("over-long sentences are truncated or dropped") {
  TempDir dir("long");
  auto rel = dir.write("rel.txt", "NA\n");
  auto sent = dir.write("s.tsv",
                        "x\ty\tx\ty\tNA\tx y a b c d\n"
                        "x\ty\tx\ty\tNA\tx a b c d y\n");
  Vocabulary vocab;
  LoadStats stats;
  LoadOptions opts;
  opts.max_sentence_length = 4;
  auto bags = load_bags(sent, load_relations(rel), vocab, opts, &stats);
  REQUIRE(bags.size() == 1);
  REQUIRE(bags[0].sentences.size() == 1);
  CHECK(bags[0].sentences[0].tokens.size() == 4);
  CHECK(bags[0].sentences[0].raw_text == "x y a b");
  CHECK(stats.dropped_too_long == 1);
}

TEST_CASE("relation table with 53 entries") {
  TempDir dir("rel53");
  std::string text = "NA\n";
  for (int i = 1; i < 53; ++i) text += "/r/" + std::to_string(i) + "\n";
  auto relations = load_relations(dir.write("rel.txt", text));
  CHECK(relations.size() == 53);
  CHECK(relations.name(0) == "NA");
  CHECK(relations.find("/r/52") == 52);
  CHECK_THROWS_AS(RelationTable({"NA", "/a", "/a"}), SchemaError);
}

TEST_CASE("entity types resolve with an UNK fallback") {
  TempDir dir("types");
  auto coarse = dir.write("coarse.tsv", "/person/doctor\t/person\n/person/coach\t/person\n/location/city\t/location\n");
  auto types = dir.write("types.tsv", "m.1\t/person/doctor,/person/coach\nm.2\t/location/city\n");
  auto cat = load_types(types, coarse);
  CHECK(cat.fine_count() == 3);
  CHECK(cat.coarse_count() == 2);
  const int doctor = *cat.find_fine("/person/doctor");
  const int coach = *cat.find_fine("/person/coach");
  auto fine = entity_types(cat, "m.1", Granularity::kFine);
  CHECK(fine == std::vector<int>{std::min(doctor, coach), std::max(doctor, coach)});
  auto crs = entity_types(cat, "m.1", Granularity::kCoarse);
  REQUIRE(crs.size() == 1);
  CHECK(cat.coarse_name(crs[0]) == "/person");

  CHECK(entity_types(cat, "m.999", Granularity::kFine) == std::vector<int>{cat.unk_id(Granularity::kFine)});
  CHECK(entity_types(cat, "m.999", Granularity::kCoarse) ==
        std::vector<int>{cat.unk_id(Granularity::kCoarse)});
  CHECK(cat.type_count(Granularity::kFine) == 4);
  CHECK(cat.type_name(Granularity::kFine, cat.unk_id(Granularity::kFine)) == "UNK");

  auto missing = dir.write("bad.tsv", "m.3\t/person/nurse\n");
  CHECK_THROWS_AS(load_types(missing, coarse), SchemaError);
  // Without a mapping each fine type is its own coarse type.
  auto identity = load_types(types);
  CHECK(identity.coarse_count() == identity.fine_count());
}

TEST_CASE("synthetic class sizes follow the Zipf schedule") {
  SynthConfig cfg;
  auto sizes = class_sizes(cfg);
  REQUIRE(sizes.size() == 8);
  CHECK(sizes[0] == cfg.na_bags);
  double z = 0;
  for (int c = 1; c < 8; ++c) z += 1.0 / c;
  for (std::size_t c = 1; c < 8; ++c) {
    CHECK(sizes[c] == static_cast<std::size_t>(std::ceil(700.0 / static_cast<double>(c) / z)));
  }
  CHECK(sizes == std::vector<std::size_t>{1300, 270, 135, 90, 68, 54, 45, 39});

  cfg.class_size_exponent = 0.0;
  sizes = class_sizes(cfg);
  const auto [lo, hi] = std::minmax_element(sizes.begin() + 1, sizes.end());
  CHECK(*hi - *lo <= 1);

  SynthConfig small = small_config();
  small.class_size_exponent = 0.0;
  auto corpus = generate_synthetic(small);
  auto counts = class_counts(corpus.train, small.n_relations);
  const auto [clo, chi] = std::minmax_element(counts.begin() + 1, counts.end());
  CHECK(*chi - *clo <= 1);
}

TEST_CASE("generated histogram matches the requested sizes") {
  SynthConfig cfg = small_config();
  auto corpus = generate_synthetic(cfg);
  auto sizes = class_sizes(cfg);
  auto counts = class_counts(corpus.train, cfg.n_relations);
  for (std::size_t c = 0; c < sizes.size(); ++c) CHECK(static_cast<std::size_t>(counts[c]) == sizes[c]);
  auto test_counts = class_counts(corpus.test, cfg.n_relations);
  CHECK(test_counts[0] == 10);
  for (std::size_t c = 1; c < cfg.n_relations; ++c) CHECK(test_counts[c] == 5);
}

TEST_CASE("noise apportionment is exact") {
  std::vector<std::size_t> sizes{100, 270, 135, 90, 68, 54, 45, 39};
  auto noisy = noisy_counts(sizes, 0.2);
  std::size_t total = 0, expect = 0;
  for (std::size_t c = 1; c < sizes.size(); ++c) {
    total += noisy[c];
    expect += sizes[c];
    CHECK(noisy[c] <= sizes[c]);
    CHECK(std::abs(static_cast<double>(noisy[c]) - 0.2 * static_cast<double>(sizes[c])) < 1.0);
  }
  CHECK(noisy[0] == 0);
  CHECK(total == static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(expect))));
  CHECK(noisy_counts(sizes, 0.0) == std::vector<std::size_t>(sizes.size(), 0));
}

TEST_CASE("noise rate zero marks every positive bag clean") {
  SynthConfig cfg = small_config();
  cfg.noise_rate = 0.0;
  auto corpus = generate_synthetic(cfg);
  for (const auto& r : corpus.provenance) {
    CHECK(r.status == (r.label == 0 ? BagStatus::kNa : BagStatus::kClean));
  }
}

TEST_CASE("provenance agrees with bag contents") {
  SynthConfig cfg = small_config();
  auto corpus = generate_synthetic(cfg);
  REQUIRE(corpus.provenance.size() == corpus.train.size() + corpus.test.size());
  std::set<std::string> keywords;
  for (const auto& [k, kw] : corpus.keywords) keywords.insert(kw);
  std::size_t noisy = 0;
  for (std::size_t i = 0; i < corpus.provenance.size(); ++i) {
    const auto& r = corpus.provenance[i];
    const Bag& bag = r.split == "train" ? corpus.train[r.bag_index] : corpus.test[r.bag_index];
    CHECK(bag.head == r.head);
    CHECK(bag.label == r.label);
    std::set<std::string> seen;
    for (const auto& s : bag.sentences) {
      for (const auto& w : words(s, corpus.vocab)) {
        if (keywords.count(w)) seen.insert(w);
      }
      CHECK(corpus.vocab.token(s.tokens[static_cast<std::size_t>(s.head_pos)]) == "ENT_HEAD");
      CHECK(corpus.vocab.token(s.tokens[static_cast<std::size_t>(s.tail_pos)]) == "ENT_TAIL");
      validate_sentence(s, 120, corpus.vocab.size());
    }
    if (r.status == BagStatus::kClean) {
      CHECK(seen.count(r.keyword) == 1);
      CHECK(r.keyword == corpus.keywords.at(KeywordKey{r.label, r.head_fine, r.tail_fine}));
      const auto& sig = corpus.signatures[static_cast<std::size_t>(r.label)];
      // Any other keyword is a sibling relation's word under the same head type.
      for (const auto& w : seen) {
        if (w == r.keyword) continue;
        bool sibling = false;
        for (std::size_t o = 1; o < corpus.signatures.size(); ++o) {
          const auto& os = corpus.signatures[o];
          if (static_cast<int>(o) != r.label && os.group == sig.group &&
              corpus.keywords.at(KeywordKey{static_cast<int>(o), r.head_fine, os.tail_fine}) == w) {
            sibling = true;
          }
        }
        CHECK(sibling);
      }
      CHECK(corpus.catalog.coarse_of(r.head_fine) == sig.head_coarse);
      CHECK(corpus.catalog.coarse_of(r.tail_fine) == sig.tail_coarse);
    } else if (r.status == BagStatus::kNoisy) {
      ++noisy;
      CHECK(seen.empty());
    } else {
      CHECK(seen.size() <= 1);
      if (!seen.empty()) CHECK(*seen.begin() == r.keyword);
    }
  }
  CHECK(noisy > 0);
}

TEST_CASE("mismatch NA bags pair a relation's keyword with a foreign tail type") {
  SynthConfig cfg = small_config();
  cfg.na_mismatch_rate = 1.0;
  auto corpus = generate_synthetic(cfg);
  std::size_t checked = 0;
  for (const auto& r : corpus.provenance) {
    if (r.status != BagStatus::kNa) continue;
    REQUIRE(r.keyword != "-");
    bool explained = false;
    for (std::size_t rel = 1; rel < corpus.signatures.size(); ++rel) {
      const auto& sig = corpus.signatures[rel];
      if (corpus.catalog.coarse_of(r.head_fine) != sig.head_coarse ||
          corpus.catalog.coarse_of(r.tail_fine) != sig.tail_coarse || r.tail_fine == sig.tail_fine) {
        continue;
      }
      if (corpus.keywords.at(KeywordKey{static_cast<int>(rel), r.head_fine, sig.tail_fine}) == r.keyword) {
        explained = true;
      }
    }
    CHECK(explained);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("without distractors the extra sentences of a clean bag carry only its keyword") {
  SynthConfig cfg = small_config();
  cfg.distractor_rate = 0.0;
  auto corpus = generate_synthetic(cfg);
  std::set<std::string> keywords;
  for (const auto& [k, kw] : corpus.keywords) keywords.insert(kw);
  for (const auto& r : corpus.provenance) {
    if (r.status != BagStatus::kClean) continue;
    const Bag& bag = r.split == "train" ? corpus.train[r.bag_index] : corpus.test[r.bag_index];
    for (const auto& s : bag.sentences)
      for (const auto& w : words(s, corpus.vocab))
        if (keywords.count(w)) CHECK(w == r.keyword);
  }
}

TEST_CASE("keyword table is a Latin square within each signature group") {
  SynthConfig cfg;
  auto sigs = relation_signatures(cfg);
  auto table = build_keyword_table(cfg);
  // Relations 1,3,5,7 share group 0 and relations 2,4,6 share group 1.
  CHECK(sigs[1].group == 0);
  CHECK(sigs[3].group == 0);
  CHECK(sigs[2].group == 1);
  CHECK(sigs[1].head_coarse == sigs[7].head_coarse);
  CHECK(sigs[1].head_coarse != sigs[2].head_coarse);
  const int tf = sigs[1].tail_coarse * 4;
  for (int head_offset = 0; head_offset < 4; ++head_offset) {
    const int hf = sigs[1].head_coarse * 4 + head_offset;
    std::set<std::string> row;
    for (int r : {1, 3, 5, 7}) row.insert(table.at({r, hf, tf}));
    CHECK(row.size() == 4);  // distinct relations get distinct keywords under one head type
  }
  for (int r : {1, 3, 5, 7}) {
    std::set<std::string> col;
    for (int k = 0; k < 4; ++k) col.insert(table.at({r, sigs[1].head_coarse * 4 + k, tf}));
    CHECK(col.size() == 4);  // a relation uses every keyword of its group
    // The tail type does not change the keyword.
    CHECK(table.at({r, sigs[1].head_coarse * 4, tf}) == table.at({r, sigs[1].head_coarse * 4, tf + 3}));
  }
  // Each member of a group prefers a different fine tail type.
  std::set<int> preferred;
  for (int r : {1, 3, 5, 7}) {
    preferred.insert(sigs[static_cast<std::size_t>(r)].tail_fine);
    CHECK(sigs[static_cast<std::size_t>(r)].tail_fine / 4 == sigs[1].tail_coarse);
  }
  CHECK(preferred.size() == 4);
}

TEST_CASE("tail affinity one gives every positive bag its preferred tail type") {
  auto corpus = generate_synthetic(small_config());
  for (const auto& r : corpus.provenance) {
    if (r.label == 0) continue;
    CHECK(r.tail_fine == corpus.signatures[static_cast<std::size_t>(r.label)].tail_fine);
  }
}

TEST_CASE("train and test entity pairs are disjoint") {
  auto corpus = generate_synthetic(small_config());
  std::set<std::pair<std::string, std::string>> train;
  for (const auto& b : corpus.train) train.emplace(b.head, b.tail);
  for (const auto& b : corpus.test) CHECK(train.count({b.head, b.tail}) == 0);
}

TEST_CASE("same seed gives byte-identical corpora") {
  SynthConfig cfg = small_config();
  TempDir a("seed_a"), b("seed_b");
  save_synthetic(a.path, generate_synthetic(cfg));
  save_synthetic(b.path, generate_synthetic(cfg));
  for (const char* f : {"train.tsv", "test.tsv", "types.tsv", "coarse.tsv", "relations.txt",
                        "keywords.tsv", "provenance.tsv"}) {
    CHECK_MESSAGE(slurp(a.path / f) == slurp(b.path / f), f);
  }
  cfg.seed = 8;
  TempDir c("seed_c");
  save_synthetic(c.path, generate_synthetic(cfg));
  CHECK(slurp(a.path / "train.tsv") != slurp(c.path / "train.tsv"));
}

TEST_CASE("saved synthetic corpus loads back unchanged") {
  auto corpus = generate_synthetic(small_config());
  TempDir dir("roundtrip");
  save_synthetic(dir.path, corpus);
  auto loaded = load_corpus(dir.path / "train.tsv", dir.path / "types.tsv",
                            dir.path / "relations.txt", dir.path / "coarse.tsv");
  CHECK(loaded.relations == corpus.relations);
  REQUIRE(loaded.bags.size() == corpus.train.size());
  for (std::size_t i = 0; i < loaded.bags.size(); ++i) {
    const Bag& x = loaded.bags[i];
    const Bag& y = corpus.train[i];
    CHECK(x.head == y.head);
    CHECK(x.tail == y.tail);
    CHECK(x.label == y.label);
    REQUIRE(x.sentences.size() == y.sentences.size());
    for (std::size_t j = 0; j < x.sentences.size(); ++j) {
      CHECK(words(x.sentences[j], loaded.vocab) == words(y.sentences[j], corpus.vocab));
      CHECK(x.sentences[j].head_pos == y.sentences[j].head_pos);
      CHECK(x.sentences[j].tail_pos == y.sentences[j].tail_pos);
    }
  }
  for (const auto& b : corpus.train) {
    for (auto g : {Granularity::kFine, Granularity::kCoarse}) {
      std::vector<std::string> want, got;
      for (int t : entity_types(corpus.catalog, b.head, g)) want.push_back(corpus.catalog.type_name(g, t));
      for (int t : entity_types(loaded.catalog, b.head, g)) got.push_back(loaded.catalog.type_name(g, t));
      CHECK(want == got);
    }
  }
  // Every train bag lands in exactly one class.
  auto counts = class_counts(loaded.bags, loaded.relations.size());
  std::size_t sum = 0;
  for (int c : counts) sum += static_cast<std::size_t>(c);
  CHECK(sum == loaded.bags.size());
}

TEST_CASE("infeasible synthetic settings are rejected") {
  SynthConfig cfg;
  cfg.vocab_size = 8;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = SynthConfig{};
  cfg.noise_rate = 1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = SynthConfig{};
  cfg.sent_len_min = 2;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg = SynthConfig{};
  cfg.n_relations = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = SynthConfig{};
  cfg.keyword_table[KeywordKey{1, 0, 4}] = "kw";
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}
