#ifndef DNNRE_CORPUS_SYNTH_H_
#define DNNRE_CORPUS_SYNTH_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dnnre/corpus/corpus.h"

namespace dnnre {

struct KeywordKey {
  int relation = 0;
  int head_fine = 0;
  int tail_fine = 0;
  auto operator<=>(const KeywordKey&) const = default;
};

using KeywordTable = std::map<KeywordKey, std::string>;

// Knobs of the synthetic distant-supervision corpus.
//
// Class 0 is NA. Positive classes c = 1..n_relations-1 receive
// ceil(positive_bags * c^-class_size_exponent / Z) training bags with
// Z = sum_c c^-class_size_exponent, so class id doubles as Zipf rank.
// Positive relations are dealt round-robin into signature groups of
// relation_group_size; all relations of a group share one (head coarse,
// tail coarse) signature and one keyword set. Which keyword expresses which
// relation depends on the fine head type, and each relation prefers its own
// fine tail type, so without fine types the members of a group are only
// separable through the head-type skew.
struct SynthConfig {
  std::size_t n_relations = 8;  // including NA
  std::size_t n_fine_types = 24;
  std::size_t coarse_group_size = 4;
  std::size_t relation_group_size = 4;
  double class_size_exponent = 1.0;
  std::size_t positive_bags = 700;
  std::size_t na_bags = 1300;
  std::size_t test_bags_per_class = 40;
  std::size_t na_test_bags = 300;
  double noise_rate = 0.2;  // share of positive bags whose sentences lack the keyword
  std::size_t vocab_size = 200;
  std::size_t sent_len_min = 8;
  std::size_t sent_len_max = 16;
  std::size_t bag_size_min = 1;
  std::size_t bag_size_max = 4;
  double keyword_sentence_rate = 0.3;  // extra sentences of a clean bag carrying the keyword
  double distractor_rate = 1.0;        // remaining extra sentences carrying a sibling relation's keyword
  double multi_type_rate = 0.3;        // entity gets a second fine type from another coarse type
  double unk_type_rate = 0.05;         // entity missing from the type file
  double na_keyword_rate = 0.5;        // NA bag carries a keyword of a non-matching signature
  double na_mismatch_rate = 0.5;       // NA bag whose pair fits a relation's coarse types but not its tail
  double tail_affinity = 1.0;          // tail takes its relation's preferred fine type
  double head_type_skew = 1.0;         // Zipf exponent over head fine types of a coarse type
  std::uint64_t seed = 7;
  KeywordTable keyword_table;  // empty: derived from the group structure
};

// Throws ConfigError on out-of-range or infeasible settings.
void validate(const SynthConfig& cfg);

struct RelationSignature {
  int head_coarse = 0;
  int tail_coarse = 0;
  int group = -1;      // -1 for NA
  int tail_fine = -1;  // preferred fine tail type
};

enum class BagStatus { kClean, kNoisy, kNa };
std::string_view bag_status_name(BagStatus s);

struct ProvenanceRecord {
  std::string split;
  std::size_t bag_index = 0;
  std::string head;
  std::string tail;
  int label = 0;
  BagStatus status = BagStatus::kClean;
  std::string keyword;  // "-" when none
  int head_fine = -1;   // type that dictated the sentences
  int tail_fine = -1;
};

struct SynthCorpus {
  std::vector<Bag> train;
  std::vector<Bag> test;
  TypeCatalog catalog;
  Vocabulary vocab;
  RelationTable relations;
  std::vector<RelationSignature> signatures;  // by class id
  KeywordTable keywords;
  std::vector<ProvenanceRecord> provenance;   // train records first, then test
};

// Zipf training sizes by class id; entry 0 (NA) is cfg.na_bags.
std::vector<std::size_t> class_sizes(const SynthConfig& cfg);
// Exact apportionment of round(noise_rate * total) noisy bags over classes.
std::vector<std::size_t> noisy_counts(const std::vector<std::size_t>& sizes, double noise_rate);
std::vector<RelationSignature> relation_signatures(const SynthConfig& cfg);
KeywordTable build_keyword_table(const SynthConfig& cfg);

SynthCorpus generate_synthetic(const SynthConfig& cfg);

// Writes train.tsv, test.tsv, types.tsv, coarse.tsv, relations.txt,
// keywords.tsv and provenance.tsv into `dir`.
void save_synthetic(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace dnnre

#endif  // DNNRE_CORPUS_SYNTH_H_
