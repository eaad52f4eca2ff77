#include "dnnre/eval/evaluate.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dnnre/errors.h"

namespace dnnre {

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<std::string> type_names(const TypeCatalog& catalog, const std::string& entity,
                                    Granularity g) {
  std::vector<std::string> out;
  for (int t : entity_types(catalog, entity, g)) out.push_back(catalog.type_name(g, t));
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> score_bags(const std::vector<Bag>& bags, const TypeCatalog& catalog,
                                            const ModelParams& params, const VariantFlags& flags) {
  std::vector<std::vector<double>> out;
  out.reserve(bags.size());
  for (const Bag& bag : bags) out.push_back(predict(bag, catalog, params, flags));
  return out;
}

EvalReport evaluate(const std::vector<Bag>& bags, const TypeCatalog& catalog,
                    const ModelParams& params, const VariantFlags& flags,
                    const std::vector<int>& train_counts, const EvalOptions& options) {
  EvalReport r;
  r.probs = score_bags(bags, catalog, params, flags);
  for (const Bag& b : bags) r.gold.push_back(b.label);
  r.predictions = predictions_from(r.probs);
  sort_predictions(r.predictions);
  r.curve = pr_curve(r.predictions, r.gold);
  r.auc_full = auc(r.curve, 1.0);
  r.auc_capped = auc(r.curve, options.recall_cap);
  for (std::size_t n : options.p_at) {
    std::optional<double> v;
    if (n <= r.curve.size()) v = p_at_n(r.predictions, r.gold, n);
    r.p_at.emplace_back(n, v);
  }
  std::vector<std::vector<int>> rankings;
  rankings.reserve(r.probs.size());
  for (const auto& p : r.probs) rankings.push_back(rank_classes(p));
  for (int max_train : options.max_train) {
    for (std::size_t k : options.hits_k) {
      HitsEntry e{max_train, k, std::nullopt};
      try {
        e.value = hits_at_k(rankings, r.gold, train_counts, max_train, k);
      } catch (const DomainError&) {
        // Nothing passes the filter; reported as n/a.
      }
      r.hits.push_back(e);
    }
  }
  return r;
}

double heldout_auc(const std::vector<Bag>& bags, const TypeCatalog& catalog,
                   const ModelParams& params, const VariantFlags& flags) {
  std::vector<int> gold;
  for (const Bag& b : bags) gold.push_back(b.label);
  const auto probs = score_bags(bags, catalog, params, flags);
  return auc(pr_curve(predictions_from(probs), gold), 1.0);
}

std::string format_metrics(const EvalReport& r, const EvalOptions& options) {
  std::ostringstream out;
  out << "bags: " << r.gold.size() << '\n';
  out << "auc: " << num(r.auc_full) << '\n';
  out << "auc_recall_lt_" << num(options.recall_cap) << ": " << num(r.auc_capped) << '\n';
  for (const auto& [n, v] : r.p_at) {
    out << "p_at_" << n << ": " << (v ? num(*v) : "n/a") << '\n';
  }
  int block = -1;
  for (const auto& h : r.hits) {
    if (h.max_train != block) {
      block = h.max_train;
      out << "# hits@k over relations with fewer than " << block << " training bags\n";
    }
    out << "hits_at_" << h.k << "_lt_" << h.max_train << ": " << (h.value ? num(*h.value) : "n/a")
        << '\n';
  }
  return out.str();
}

void write_report(const std::filesystem::path& dir, const EvalReport& r, const EvalOptions& options) {
  std::filesystem::create_directories(dir);
  std::string preds = "bag_id,class_id,confidence\n";
  for (const auto& p : r.predictions) {
    preds += std::to_string(p.bag) + "," + std::to_string(p.cls) + "," + num(p.confidence) + "\n";
  }
  write_file(dir / "predictions.csv", preds);
  std::string curve = "threshold,precision,recall\n";
  for (const auto& pt : r.curve) {
    curve += num(pt.threshold) + "," + num(pt.precision) + "," + num(pt.recall) + "\n";
  }
  write_file(dir / "pr_curve.csv", curve);
  write_file(dir / "metrics.txt", format_metrics(r, options));
}

CaseReport case_report(const Bag& bag, const TypeCatalog& catalog, const RelationTable& relations,
                       const CaseVariant& a, const CaseVariant& b, Granularity shown_types) {
  if (!a.params || !b.params) throw DomainError("case report needs two parameter sets");
  CaseReport r;
  r.head = bag.head;
  r.tail = bag.tail;
  for (const auto& s : bag.sentences) r.sentences.push_back(s.raw_text);
  r.head_types = type_names(catalog, bag.head, shown_types);
  r.tail_types = type_names(catalog, bag.tail, shown_types);
  r.gold = relations.name(bag.label);
  r.label_a = a.label;
  r.label_b = b.label;
  const auto gold = static_cast<std::size_t>(bag.label);
  r.confidence_a = predict(bag, catalog, *a.params, a.flags).at(gold);
  r.confidence_b = predict(bag, catalog, *b.params, b.flags).at(gold);
  return r;
}

std::string format_case(const CaseReport& r) {
  std::ostringstream out;
  out << "pair: " << r.head << " -> " << r.tail << '\n';
  out << "head types: " << join(r.head_types, ", ") << '\n';
  out << "tail types: " << join(r.tail_types, ", ") << '\n';
  out << "relation: " << r.gold << '\n';
  for (const auto& s : r.sentences) out << "  | " << s << '\n';
  out << r.label_a << ": " << num(r.confidence_a) << '\n';
  out << r.label_b << ": " << num(r.confidence_b) << '\n';
  return out.str();
}

}  // namespace dnnre
