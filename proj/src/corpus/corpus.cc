#include "dnnre/corpus/corpus.h"

#include <algorithm>

#include "dnnre/errors.h"

namespace dnnre {

void validate_sentence(const Sentence& s, std::size_t max_length, std::size_t vocab_size) {
  const std::size_t len = s.tokens.size();
  if (len < 1 || len > max_length) {
    throw DomainError("sentence length " + std::to_string(len) + " outside [1, " +
                      std::to_string(max_length) + "]");
  }
  if (s.head_pos == s.tail_pos) throw DomainError("head and tail share a position");
  if (s.head_pos < 0 || s.tail_pos < 0 || static_cast<std::size_t>(s.head_pos) >= len ||
      static_cast<std::size_t>(s.tail_pos) >= len) {
    throw DomainError("entity position outside sentence");
  }
  for (int t : s.tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
      throw DomainError("token id " + std::to_string(t) + " outside vocabulary");
    }
  }
}

Vocabulary::Vocabulary() {
  add(kPadToken);
  add(kUnkToken);
}

int Vocabulary::add(std::string_view token) {
  if (auto id = find(token)) return *id;
  if (frozen_) return kUnk;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

int Vocabulary::lookup(std::string_view token) const { return find(token).value_or(kUnk); }

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw ParseError("vocabulary must start with the reserved tokens", 0);
  }
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.find(tokens[i])) throw ParseError("duplicate vocabulary token '" + tokens[i] + "'", 0);
    v.add(tokens[i]);
  }
  return v;
}

RelationTable::RelationTable(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!ids_.emplace(names_[i], static_cast<int>(i)).second) {
      throw SchemaError("duplicate relation name '" + names_[i] + "'");
    }
  }
}

std::optional<int> RelationTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::string_view granularity_name(Granularity g) {
  return g == Granularity::kFine ? "fine" : "coarse";
}

Granularity parse_granularity(std::string_view name) {
  if (name == "fine") return Granularity::kFine;
  if (name == "coarse") return Granularity::kCoarse;
  throw ConfigError("granularity must be 'fine' or 'coarse', got '" + std::string(name) + "'");
}

int TypeCatalog::add_fine_type(std::string_view fine, std::string_view coarse) {
  if (auto id = find_fine(fine)) {
    if (coarse_names_[static_cast<std::size_t>(fine_to_coarse_[static_cast<std::size_t>(*id)])] != coarse) {
      throw SchemaError("fine type '" + std::string(fine) + "' mapped to two coarse types");
    }
    return *id;
  }
  auto cit = std::find(coarse_names_.begin(), coarse_names_.end(), coarse);
  int coarse_id;
  if (cit == coarse_names_.end()) {
    coarse_id = static_cast<int>(coarse_names_.size());
    coarse_names_.emplace_back(coarse);
  } else {
    coarse_id = static_cast<int>(cit - coarse_names_.begin());
  }
  fine_names_.emplace_back(fine);
  fine_to_coarse_.push_back(coarse_id);
  return static_cast<int>(fine_names_.size() - 1);
}

std::optional<int> TypeCatalog::find_fine(std::string_view fine) const {
  auto it = std::find(fine_names_.begin(), fine_names_.end(), fine);
  if (it == fine_names_.end()) return std::nullopt;
  return static_cast<int>(it - fine_names_.begin());
}

void TypeCatalog::set_entity_types(const std::string& entity, std::vector<int> fine_ids) {
  for (int id : fine_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= fine_names_.size()) {
      throw DomainError("fine type id " + std::to_string(id) + " not registered");
    }
  }
  std::sort(fine_ids.begin(), fine_ids.end());
  fine_ids.erase(std::unique(fine_ids.begin(), fine_ids.end()), fine_ids.end());
  entity_types_[entity] = std::move(fine_ids);
}

std::size_t TypeCatalog::type_count(Granularity g) const {
  return (g == Granularity::kFine ? fine_count() : coarse_count()) + 1;
}

int TypeCatalog::unk_id(Granularity g) const {
  return static_cast<int>(g == Granularity::kFine ? fine_count() : coarse_count());
}

const std::string& TypeCatalog::fine_name(int id) const {
  return fine_names_.at(static_cast<std::size_t>(id));
}

const std::string& TypeCatalog::coarse_name(int id) const {
  return coarse_names_.at(static_cast<std::size_t>(id));
}

std::string TypeCatalog::type_name(Granularity g, int id) const {
  if (id == unk_id(g)) return "UNK";
  return g == Granularity::kFine ? fine_name(id) : coarse_name(id);
}

std::vector<int> entity_types(const TypeCatalog& catalog, const std::string& entity,
                              Granularity granularity) {
  auto it = catalog.entities().find(entity);
  if (it == catalog.entities().end() || it->second.empty()) return {catalog.unk_id(granularity)};
  if (granularity == Granularity::kFine) return it->second;
  std::vector<int> coarse;
  for (int f : it->second) coarse.push_back(catalog.coarse_of(f));
  std::sort(coarse.begin(), coarse.end());
  coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());
  return coarse;
}

std::vector<int> class_counts(const std::vector<Bag>& bags, std::size_t n_classes) {
  std::vector<int> counts(n_classes, 0);
  for (const Bag& b : bags) {
    if (b.label >= 0 && static_cast<std::size_t>(b.label) < n_classes) ++counts[static_cast<std::size_t>(b.label)];
  }
  return counts;
}

}  // namespace dnnre
