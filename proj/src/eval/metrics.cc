#include "dnnre/eval/metrics.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "dnnre/errors.h"

namespace dnnre {

namespace {

bool hit(const Prediction& p, std::span<const int> gold) {
  if (p.bag >= gold.size()) {
    throw DomainError("prediction for bag " + std::to_string(p.bag) + " has no gold label");
  }
  return gold[p.bag] == p.cls;
}

std::vector<Prediction> ranked_positive(std::span<const Prediction> preds) {
  std::vector<Prediction> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    if (p.cls != 0) out.push_back(p);
  }
  sort_predictions(out);
  return out;
}

}  // namespace

void sort_predictions(std::vector<Prediction>& preds) {
  std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.bag != b.bag) return a.bag < b.bag;
    return a.cls < b.cls;
  });
}

std::vector<PRPoint> pr_curve(std::span<const Prediction> preds, std::span<const int> gold) {
  const auto positives = static_cast<std::size_t>(
      std::count_if(gold.begin(), gold.end(), [](int g) { return g != 0; }));
  if (positives == 0) throw DomainError("pr curve needs at least one gold non-NA bag");
  const auto ranked = ranked_positive(preds);
  std::vector<PRPoint> curve;
  curve.reserve(ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (hit(ranked[i], gold)) ++hits;
    curve.push_back({static_cast<double>(hits) / static_cast<double>(i + 1),
                     static_cast<double>(hits) / static_cast<double>(positives),
                     ranked[i].confidence});
  }
  return curve;
}

double auc(std::span<const PRPoint> points, double recall_cap) {
  if (!(recall_cap > 0.0)) throw DomainError("recall cap must be positive");
  if (points.empty()) throw DomainError("auc of an empty curve");
  double area = 0.0;
  double r0 = 0.0;
  double p0 = points.front().precision;
  for (const auto& pt : points) {
    if (pt.recall > recall_cap) {
      if (pt.recall > r0) {
        const double p_cut = p0 + (pt.precision - p0) * (recall_cap - r0) / (pt.recall - r0);
        area += (recall_cap - r0) * (p0 + p_cut) / 2.0;
      }
      return area;
    }
    area += (pt.recall - r0) * (p0 + pt.precision) / 2.0;
    r0 = pt.recall;
    p0 = pt.precision;
  }
  return area;
}

double p_at_n(std::span<const Prediction> preds, std::span<const int> gold, std::size_t n) {
  const auto ranked = ranked_positive(preds);
  if (n == 0 || n > ranked.size()) {
    throw DomainError("P@" + std::to_string(n) + " needs at least that many non-NA predictions (have " +
                      std::to_string(ranked.size()) + ")");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += hit(ranked[i], gold) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::vector<int> rank_classes(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return order;
}

double hits_at_k(std::span<const std::vector<int>> rankings, std::span<const int> gold,
                 std::span<const int> train_counts, int max_train, std::size_t k) {
  if (k == 0) throw DomainError("Hits@K needs K >= 1");
  if (rankings.size() != gold.size()) throw DomainError("one ranking per gold bag expected");
  std::size_t total = 0, hits = 0;
  for (std::size_t b = 0; b < gold.size(); ++b) {
    const int g = gold[b];
    if (g == 0) continue;
    if (g < 0 || static_cast<std::size_t>(g) >= train_counts.size()) {
      throw DomainError("gold class " + std::to_string(g) + " has no training count");
    }
    if (train_counts[static_cast<std::size_t>(g)] >= max_train) continue;
    ++total;
    const auto& r = rankings[b];
    const auto top = r.begin() + static_cast<std::ptrdiff_t>(std::min(k, r.size()));
    if (std::find(r.begin(), top, g) != top) ++hits;
  }
  if (total == 0) {
    throw DomainError("no test bag with a non-NA gold class having fewer than " +
                      std::to_string(max_train) + " training bags");
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<Prediction> predictions_from(std::span<const std::vector<double>> probs) {
  std::vector<Prediction> out;
  for (std::size_t b = 0; b < probs.size(); ++b) {
    for (std::size_t c = 1; c < probs[b].size(); ++c) {
      out.push_back({b, static_cast<int>(c), probs[b][c]});
    }
  }
  return out;
}

}  // namespace dnnre
