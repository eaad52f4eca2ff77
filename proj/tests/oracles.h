#ifndef DNNRE_TESTS_ORACLES_H_
#define DNNRE_TESTS_ORACLES_H_

// Brute-force reimplementations of the kernel and metric operations, kept
// deliberately naive: quadratic ranking, no shared helpers with src/.

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <vector>

#include "dnnre/eval/metrics.h"
#include "dnnre/random.h"

namespace dnnre::oracle {

// h is rows x cols, row-major. Columns [0,c1), [c1,c2), [c2,cols); an empty
// segment pools to 0.
inline std::vector<double> segment_max_pool(const std::vector<double>& h, std::size_t rows,
                                            std::size_t cols, std::size_t c1, std::size_t c2) {
  std::vector<double> out;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t lo[3] = {0, c1, c2}, hi[3] = {c1, c2, cols};
    for (int s = 0; s < 3; ++s) {
      double best = 0;
      for (std::size_t c = lo[s]; c < hi[s]; ++c) {
        if (c == lo[s] || h[r * cols + c] > best) best = h[r * cols + c];
      }
      out.push_back(best);
    }
  }
  return out;
}

inline std::vector<double> softmax(const std::vector<double>& x) {
  long double mx = x[0];
  for (double v : x) mx = v > mx ? v : mx;
  long double z = 0;
  for (double v : x) z += std::exp(static_cast<long double>(v) - mx);
  std::vector<double> out;
  for (double v : x) out.push_back(static_cast<double>(std::exp(static_cast<long double>(v) - mx) / z));
  return out;
}

// a ranks before b
inline bool before(const Prediction& a, const Prediction& b) {
  if (a.confidence > b.confidence) return true;
  if (a.confidence < b.confidence) return false;
  return a.bag < b.bag || (a.bag == b.bag && a.cls < b.cls);
}

// Position of every non-NA prediction by counting what precedes it.
inline std::vector<Prediction> ranked(const std::vector<Prediction>& preds) {
  std::vector<Prediction> pos;
  for (const auto& p : preds) if (p.cls != 0) pos.push_back(p);
  std::vector<Prediction> out(pos.size());
  for (const auto& p : pos) {
    std::size_t rank = 0;
    for (const auto& q : pos) rank += before(q, p) ? 1 : 0;
    out[rank] = p;
  }
  return out;
}

inline std::vector<PRPoint> pr_curve(const std::vector<Prediction>& preds, const std::vector<int>& gold) {
  std::size_t positives = 0;
  for (int g : gold) positives += g != 0;
  const auto r = ranked(preds);
  std::vector<PRPoint> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j <= i; ++j) hits += gold[r[j].bag] == r[j].cls;
    out.push_back({double(hits) / double(i + 1), double(hits) / double(positives), r[i].confidence});
  }
  return out;
}

// Piecewise-linear precision through (0, p_first) and every point, evaluated
// at recall x by locating the last knot at or before x.
inline double auc(const std::vector<PRPoint>& pts, double cap) {
  std::vector<double> xs{0.0}, ys{pts[0].precision};
  for (const auto& p : pts) {
    xs.push_back(p.recall);
    ys.push_back(p.precision);
  }
  double area = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double a = xs[i - 1], b = xs[i];
    if (a >= cap) break;
    if (b <= a) continue;
    const double hi = b < cap ? b : cap;
    const double slope = (ys[i] - ys[i - 1]) / (b - a);
    const double ya = ys[i - 1], yh = ys[i - 1] + slope * (hi - a);
    area += (hi - a) * (ya < yh ? ya : yh) + 0.5 * (hi - a) * std::abs(yh - ya);
  }
  return area;
}

inline double p_at_n(const std::vector<Prediction>& preds, const std::vector<int>& gold, std::size_t n) {
  const auto r = ranked(preds);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += gold[r[i].bag] == r[i].cls;
  return double(hits) / double(n);
}

// From scores, not rankings: the gold class is in the top k when fewer than k
// classes beat it (higher score, or equal score and lower id).
inline double hits_at_k(const std::vector<std::vector<double>>& scores, const std::vector<int>& gold,
                        const std::vector<int>& train_counts, int max_train, std::size_t k) {
  std::size_t total = 0, hits = 0;
  for (std::size_t b = 0; b < gold.size(); ++b) {
    const int g = gold[b];
    if (g == 0 || train_counts[g] >= max_train) continue;
    ++total;
    std::size_t beaten_by = 0;
    for (std::size_t c = 0; c < scores[b].size(); ++c) {
      const double s = scores[b][c], sg = scores[b][g];
      beaten_by += (s > sg || (s == sg && static_cast<int>(c) < g)) ? 1 : 0;
    }
    hits += beaten_by < k;
  }
  return double(hits) / double(total);
}

// Random small instance: bags with gold labels and a score per class, drawn
// on a coarse grid so ties are common.
struct MetricInstance {
  std::vector<int> gold;
  std::vector<std::vector<double>> scores;
  std::vector<Prediction> preds;
  std::vector<int> train_counts;
};

inline MetricInstance random_instance(Rng& rng, std::size_t max_preds = 20) {
  MetricInstance m;
  const std::size_t classes = 2 + uniform_index(rng, 4);
  const std::size_t bags = 1 + uniform_index(rng, std::max<std::size_t>(1, max_preds / (classes - 1)));
  const double grid = static_cast<double>(2 + uniform_index(rng, 6));
  for (std::size_t b = 0; b < bags; ++b) {
    m.gold.push_back(static_cast<int>(uniform_index(rng, classes)));
    std::vector<double> s(classes);
    for (double& v : s) v = static_cast<double>(uniform_index(rng, static_cast<std::uint64_t>(grid) + 1)) / grid;
    m.scores.push_back(s);
    for (std::size_t c = 1; c < classes; ++c) m.preds.push_back({b, static_cast<int>(c), s[c]});
  }
  if (std::count(m.gold.begin(), m.gold.end(), 0) == static_cast<long>(bags)) m.gold[0] = 1;
  shuffle(m.preds, rng);
  for (std::size_t c = 0; c < classes; ++c) m.train_counts.push_back(static_cast<int>(uniform_index(rng, 300)));
  return m;
}

}  // namespace dnnre::oracle

#endif  // DNNRE_TESTS_ORACLES_H_
