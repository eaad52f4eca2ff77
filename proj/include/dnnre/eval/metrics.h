#ifndef DNNRE_EVAL_METRICS_H_
#define DNNRE_EVAL_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

// Held-out ranking metrics. Gold labels are indexed by bag id; class 0 is NA.
namespace dnnre {

struct Prediction {
  std::size_t bag = 0;
  int cls = 0;  // never NA
  double confidence = 0.0;

  bool operator==(const Prediction&) const = default;
};

struct PRPoint {
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;  // confidence of the prediction that closes this point
};

// Confidence descending, then bag id, then class id.
void sort_predictions(std::vector<Prediction>& preds);

// One point per prediction after ranking. NA predictions are ignored.
std::vector<PRPoint> pr_curve(std::span<const Prediction> preds, std::span<const int> gold);

// Trapezoidal area under precision over recall in [0, recall_cap]. The curve
// starts at (recall 0, first precision) and is cut linearly at the cap.
double auc(std::span<const PRPoint> points, double recall_cap = 1.0);

// Share of hits among the N most confident predictions.
double p_at_n(std::span<const Prediction> preds, std::span<const int> gold, std::size_t n);

// Classes by descending score, ties to the lower id.
std::vector<int> rank_classes(std::span<const double> scores);

// Over bags whose gold class is not NA and has fewer than max_train training
// bags, the share whose gold class lies in the top k of its ranking.
double hits_at_k(std::span<const std::vector<int>> rankings, std::span<const int> gold,
                 std::span<const int> train_counts, int max_train, std::size_t k);

// Every non-NA (bag, class) pair with its test-mode probability.
std::vector<Prediction> predictions_from(std::span<const std::vector<double>> probs);

}  // namespace dnnre

#endif  // DNNRE_EVAL_METRICS_H_
