#include "dnnre/corpus/io.h"

#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "dnnre/errors.h"

namespace dnnre {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  std::string w;
  while (in >> w) parts.push_back(w);
  return parts;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Index of the first occurrence of `needle` as a contiguous token run.
long find_span(const std::vector<std::string>& tokens, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > tokens.size()) return -1;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j) ok = tokens[i + j] == needle[j];
    if (ok) return static_cast<long>(i);
  }
  return -1;
}

long parse_long(const std::string& s, long line, const char* what) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  }
}

}  // namespace

RelationTable load_relations(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> names;
  std::string line;
  long no = 0;
  while (std::getline(in, line)) {
    ++no;
    strip_cr(line);
    if (line.empty()) throw ParseError("empty relation name", no);
    names.push_back(line);
  }
  if (names.empty()) throw ParseError("relation file " + path.string() + " is empty", 0);
  return RelationTable(std::move(names));
}

TypeCatalog load_types(const std::filesystem::path& type_path,
                       const std::filesystem::path& coarse_path) {
  TypeCatalog catalog;
  const bool mapped = !coarse_path.empty();
  std::string line;
  if (mapped) {
    auto in = open_in(coarse_path);
    long no = 0;
    while (std::getline(in, line)) {
      ++no;
      strip_cr(line);
      if (line.empty()) continue;
      auto cols = split(line, '\t');
      if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
        throw ParseError("coarse mapping needs 'fine<TAB>coarse'", no);
      }
      catalog.add_fine_type(cols[0], cols[1]);
    }
  }
  auto in = open_in(type_path);
  long no = 0;
  while (std::getline(in, line)) {
    ++no;
    strip_cr(line);
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[0].empty()) throw ParseError("type line needs 'entity<TAB>types'", no);
    std::vector<int> ids;
    if (!cols[1].empty()) {
      for (const std::string& name : split(cols[1], ',')) {
        if (name.empty()) throw ParseError("empty type name", no);
        if (mapped) {
          auto id = catalog.find_fine(name);
          if (!id) throw SchemaError("line " + std::to_string(no) + ": fine type '" + name +
                                     "' missing from coarse mapping");
          ids.push_back(*id);
        } else {
          ids.push_back(catalog.add_fine_type(name, name));
        }
      }
    }
    catalog.set_entity_types(cols[0], std::move(ids));
  }
  return catalog;
}

std::vector<Bag> load_bags(const std::filesystem::path& path, const RelationTable& relations,
                           Vocabulary& vocab, const LoadOptions& options, LoadStats* stats) {
  LoadStats local;
  LoadStats& st = stats ? *stats : local;
  auto in = open_in(path);
  using Key = std::tuple<std::string, std::string, int>;
  std::map<Key, Bag> grouped;
  std::string line;
  long no = 0;
  while (std::getline(in, line)) {
    ++no;
    strip_cr(line);
    if (line.empty()) continue;
    ++st.lines;
    auto cols = split(line, '\t');
    if (cols.size() != 6 && cols.size() != 8) {
      throw ParseError("expected 6 or 8 tab-separated columns, got " + std::to_string(cols.size()), no);
    }
    if (cols[0].empty() || cols[1].empty()) throw ParseError("empty entity id", no);
    auto rel = relations.find(cols[4]);
    if (!rel) throw SchemaError("line " + std::to_string(no) + ": unknown relation '" + cols[4] + "'");
    auto words = split_ws(cols[5]);
    if (words.empty()) throw ParseError("sentence has no tokens", no);
    auto head_span = split_ws(cols[2]);
    auto tail_span = split_ws(cols[3]);
    long hp, tp;
    if (cols.size() == 8) {
      hp = parse_long(cols[6], no, "head position");
      tp = parse_long(cols[7], no, "tail position");
      if (hp < 0 || tp < 0 || hp >= static_cast<long>(words.size()) ||
          tp >= static_cast<long>(words.size())) {
        throw ParseError("entity position outside sentence", no);
      }
    } else {
      hp = find_span(words, head_span);
      tp = find_span(words, tail_span);
    }
    if (hp < 0 || tp < 0 || hp == tp) {
      ++st.skipped_missing_entity;
      continue;
    }
    const std::size_t head_end = static_cast<std::size_t>(hp) + std::max<std::size_t>(1, head_span.size());
    const std::size_t tail_end = static_cast<std::size_t>(tp) + std::max<std::size_t>(1, tail_span.size());
    if (words.size() > options.max_sentence_length) {
      if (std::max(head_end, tail_end) > options.max_sentence_length) {
        ++st.dropped_too_long;
        continue;
      }
      words.resize(options.max_sentence_length);
    }
    Sentence s;
    s.head_pos = static_cast<int>(hp);
    s.tail_pos = static_cast<int>(tp);
    for (const std::string& w : words) s.tokens.push_back(vocab.add(w));
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) s.raw_text.push_back(' ');
      s.raw_text += words[i];
    }
    ++st.sentences;
    Bag& bag = grouped[Key{cols[0], cols[1], *rel}];
    if (bag.sentences.empty()) {
      bag.head = cols[0];
      bag.tail = cols[1];
      bag.label = *rel;
    }
    bag.sentences.push_back(std::move(s));
  }
  std::vector<Bag> bags;
  bags.reserve(grouped.size());
  for (auto& [key, bag] : grouped) bags.push_back(std::move(bag));
  st.bags = bags.size();
  return bags;
}

Corpus load_corpus(const std::filesystem::path& sentence_path,
                   const std::filesystem::path& type_path,
                   const std::filesystem::path& relation_path,
                   const std::filesystem::path& coarse_path, const LoadOptions& options) {
  Corpus c;
  c.relations = load_relations(relation_path);
  c.catalog = load_types(type_path, coarse_path);
  c.bags = load_bags(sentence_path, c.relations, c.vocab, options, &c.stats);
  return c;
}

std::vector<std::vector<double>> load_embeddings(const std::filesystem::path& path,
                                                 const Vocabulary& vocab, std::size_t dim) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows(vocab.size());
  std::string line;
  long no = 0;
  while (std::getline(in, line)) {
    ++no;
    strip_cr(line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("embedding line needs 'word<TAB>values'", no);
    auto id = vocab.find(std::string_view(line).substr(0, tab));
    if (!id) continue;
    std::istringstream vals(line.substr(tab + 1));
    std::vector<double> v;
    double x;
    while (vals >> x) v.push_back(x);
    if (!vals.eof()) throw ParseError("bad embedding value", no);
    if (v.size() != dim) {
      throw ParseError("embedding has " + std::to_string(v.size()) + " values, expected " +
                       std::to_string(dim), no);
    }
    rows[static_cast<std::size_t>(*id)] = std::move(v);
  }
  return rows;
}

void save_relations(const std::filesystem::path& path, const RelationTable& relations) {
  auto out = open_out(path);
  for (const auto& n : relations.names()) out << n << '\n';
}

void save_types(const std::filesystem::path& path, const TypeCatalog& catalog) {
  auto out = open_out(path);
  for (const auto& [entity, ids] : catalog.entities()) {
    out << entity << '\t';
    for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << catalog.fine_name(ids[i]);
    out << '\n';
  }
}

void save_coarse_mapping(const std::filesystem::path& path, const TypeCatalog& catalog) {
  auto out = open_out(path);
  for (std::size_t f = 0; f < catalog.fine_count(); ++f) {
    const int id = static_cast<int>(f);
    out << catalog.fine_name(id) << '\t' << catalog.coarse_name(catalog.coarse_of(id)) << '\n';
  }
}

void save_bags(const std::filesystem::path& path, const std::vector<Bag>& bags,
               const Vocabulary& vocab, const RelationTable& relations) {
  auto out = open_out(path);
  for (const Bag& bag : bags) {
    for (const Sentence& s : bag.sentences) {
      out << bag.head << '\t' << bag.tail << '\t'
          << vocab.token(s.tokens.at(static_cast<std::size_t>(s.head_pos))) << '\t'
          << vocab.token(s.tokens.at(static_cast<std::size_t>(s.tail_pos))) << '\t'
          << relations.name(bag.label) << '\t';
      if (!s.raw_text.empty()) {
        out << s.raw_text;
      } else {
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
          out << (i ? " " : "") << vocab.token(s.tokens[i]);
        }
      }
      out << '\t' << s.head_pos << '\t' << s.tail_pos << '\n';
    }
  }
}

}  // namespace dnnre
