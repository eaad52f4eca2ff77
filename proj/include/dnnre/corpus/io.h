#ifndef DNNRE_CORPUS_IO_H_
#define DNNRE_CORPUS_IO_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "dnnre/corpus/corpus.h"

// Plain-text corpus files.
//
//   sentences  head_id \t tail_id \t head_surface \t tail_surface \t relation
//              \t space-separated tokens [\t head_pos \t tail_pos]
//   types      entity_id \t comma-separated fine type names
//   coarse     fine_name \t coarse_name
//   relations  one name per line; line number (from 0) is the class id
namespace dnnre {

struct LoadOptions {
  std::size_t max_sentence_length = 120;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t sentences = 0;
  std::size_t skipped_missing_entity = 0;  // surface form not found in tokens
  std::size_t dropped_too_long = 0;        // an entity lies beyond the length limit
  std::size_t bags = 0;
};

struct Corpus {
  std::vector<Bag> bags;
  TypeCatalog catalog;
  Vocabulary vocab;
  RelationTable relations;
  LoadStats stats;
};

RelationTable load_relations(const std::filesystem::path& path);

// Reads the coarse mapping (if `coarse_path` is non-empty) and then the type
// file. Without a coarse mapping every fine type is its own coarse type.
TypeCatalog load_types(const std::filesystem::path& type_path,
                       const std::filesystem::path& coarse_path = {});

// Reads sentences and groups them into bags keyed by (head, tail, relation),
// ordered lexicographically by that key. Tokens are interned into `vocab`.
std::vector<Bag> load_bags(const std::filesystem::path& path, const RelationTable& relations,
                           Vocabulary& vocab, const LoadOptions& options = {},
                           LoadStats* stats = nullptr);

Corpus load_corpus(const std::filesystem::path& sentence_path,
                   const std::filesystem::path& type_path,
                   const std::filesystem::path& relation_path,
                   const std::filesystem::path& coarse_path = {},
                   const LoadOptions& options = {});

// Word vectors: token \t space-separated floats. Returns rows aligned with
// `vocab` ids; tokens missing from the file keep an empty row.
std::vector<std::vector<double>> load_embeddings(const std::filesystem::path& path,
                                                 const Vocabulary& vocab, std::size_t dim);

void save_relations(const std::filesystem::path& path, const RelationTable& relations);
void save_types(const std::filesystem::path& path, const TypeCatalog& catalog);
void save_coarse_mapping(const std::filesystem::path& path, const TypeCatalog& catalog);
// Writes explicit entity positions so the round trip is exact.
void save_bags(const std::filesystem::path& path, const std::vector<Bag>& bags,
               const Vocabulary& vocab, const RelationTable& relations);

}  // namespace dnnre

#endif  // DNNRE_CORPUS_IO_H_
