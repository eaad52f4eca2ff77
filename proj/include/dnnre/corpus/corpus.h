#ifndef DNNRE_CORPUS_CORPUS_H_
#define DNNRE_CORPUS_CORPUS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dnnre {

// One mention of a query entity pair.
struct Sentence {
  std::vector<int> tokens;
  int head_pos = 0;
  int tail_pos = 0;
  std::string raw_text;

  bool operator==(const Sentence&) const = default;
};

// All sentences mentioning one (head, tail) pair under one relation label.
struct Bag {
  std::string head;
  std::string tail;
  std::vector<Sentence> sentences;
  int label = 0;

  bool operator==(const Bag&) const = default;
};

// Throws DomainError unless the sentence invariants hold.
void validate_sentence(const Sentence& s, std::size_t max_length, std::size_t vocab_size);

// Token inventory. Ids 0 and 1 are reserved for padding and unknown words;
// remaining ids follow first-insertion order.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<PAD>";
  static constexpr std::string_view kUnkToken = "<UNK>";

  Vocabulary();

  // Returns the id of `token`, inserting it unless the vocabulary is frozen
  // (frozen vocabularies map unseen tokens to kUnk).
  int add(std::string_view token);
  int lookup(std::string_view token) const;
  std::optional<int> find(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  bool frozen_ = false;
};

// Relation names indexed by class id; id 0 is NA by convention.
class RelationTable {
 public:
  RelationTable() = default;
  explicit RelationTable(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const RelationTable& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

enum class Granularity { kFine, kCoarse };

std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view name);

// Entity -> fine types, fine -> coarse types. An entity without types resolves
// to the reserved UNK id at either granularity; UNK ids are the inventory sizes
// (fine UNK = fine_count(), coarse UNK = coarse_count()).
class TypeCatalog {
 public:
  // Inventory sizes of the public FIGER-derived type set.
  static constexpr std::size_t kDefaultFineTypes = 112;
  static constexpr std::size_t kDefaultCoarseTypes = 38;

  TypeCatalog() = default;

  // Registers a fine type under a coarse type (both created on first use).
  int add_fine_type(std::string_view fine, std::string_view coarse);
  std::optional<int> find_fine(std::string_view fine) const;

  // Replaces the type set of `entity`. Ids are deduplicated and sorted.
  void set_entity_types(const std::string& entity, std::vector<int> fine_ids);
  bool has_entity(const std::string& entity) const { return entity_types_.count(entity) > 0; }
  const std::map<std::string, std::vector<int>>& entities() const { return entity_types_; }

  std::size_t fine_count() const { return fine_names_.size(); }
  std::size_t coarse_count() const { return coarse_names_.size(); }
  // Embedding-table size at a granularity, UNK included.
  std::size_t type_count(Granularity g) const;
  int unk_id(Granularity g) const;
  int coarse_of(int fine) const { return fine_to_coarse_.at(static_cast<std::size_t>(fine)); }
  const std::string& fine_name(int id) const;
  const std::string& coarse_name(int id) const;
  // Name at a granularity with "UNK" for the reserved id.
  std::string type_name(Granularity g, int id) const;

  bool operator==(const TypeCatalog&) const = default;

 private:
  std::vector<std::string> fine_names_;
  std::vector<int> fine_to_coarse_;
  std::vector<std::string> coarse_names_;
  std::map<std::string, std::vector<int>> entity_types_;
};

// Sorted, deduplicated type ids of `entity`; {UNK} when the entity is unknown
// or has no types.
std::vector<int> entity_types(const TypeCatalog& catalog, const std::string& entity,
                              Granularity granularity);

// Number of bags per class id.
std::vector<int> class_counts(const std::vector<Bag>& bags, std::size_t n_classes);

}  // namespace dnnre

#endif  // DNNRE_CORPUS_CORPUS_H_
