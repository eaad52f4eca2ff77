#ifndef DNNRE_EVAL_EVALUATE_H_
#define DNNRE_EVAL_EVALUATE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dnnre/corpus/corpus.h"
#include "dnnre/eval/metrics.h"
#include "dnnre/model/dynnet.h"

namespace dnnre {

// Full-scale reference figures for the dynamic model on the NYT benchmark.
// Kept for comparison in reports; no test asserts them.
namespace reported {
inline constexpr double kPAt100 = 85.0;
inline constexpr double kPAt200 = 83.0;
inline constexpr double kPAt300 = 82.7;
inline constexpr double kHitsAt10Under100 = 57.6;
inline constexpr double kHitsAt10Under200 = 64.1;
inline constexpr double kCaseConfidenceTyped[2] = {0.95, 0.96};
inline constexpr double kCaseConfidenceUntyped[2] = {0.71, 0.59};
}  // namespace reported

struct EvalOptions {
  double recall_cap = 0.4;
  std::vector<std::size_t> p_at = {100, 200, 300};
  std::vector<int> max_train = {100, 200};
  std::vector<std::size_t> hits_k = {10, 15, 20};
};

struct HitsEntry {
  int max_train = 0;
  std::size_t k = 0;
  std::optional<double> value;  // empty when no bag passes the filter
};

struct EvalReport {
  std::vector<std::vector<double>> probs;  // per bag, per class
  std::vector<int> gold;
  std::vector<Prediction> predictions;
  std::vector<PRPoint> curve;
  double auc_full = 0.0;
  double auc_capped = 0.0;
  std::vector<std::pair<std::size_t, std::optional<double>>> p_at;
  std::vector<HitsEntry> hits;
};

std::vector<std::vector<double>> score_bags(const std::vector<Bag>& bags, const TypeCatalog& catalog,
                                            const ModelParams& params, const VariantFlags& flags);

EvalReport evaluate(const std::vector<Bag>& bags, const TypeCatalog& catalog,
                    const ModelParams& params, const VariantFlags& flags,
                    const std::vector<int>& train_counts, const EvalOptions& options = {});

// Held-out AUC over the full recall range, as used for checkpoint selection.
double heldout_auc(const std::vector<Bag>& bags, const TypeCatalog& catalog,
                   const ModelParams& params, const VariantFlags& flags);

// predictions.csv, pr_curve.csv and metrics.txt.
void write_report(const std::filesystem::path& dir, const EvalReport& report,
                  const EvalOptions& options);
std::string format_metrics(const EvalReport& report, const EvalOptions& options);

// Gold-class confidence of one bag under two trained variants.
struct CaseVariant {
  const ModelParams* params = nullptr;
  VariantFlags flags;
  std::string label;
};

struct CaseReport {
  std::string head;
  std::string tail;
  std::vector<std::string> sentences;
  std::vector<std::string> head_types;
  std::vector<std::string> tail_types;
  std::string gold;
  std::string label_a, label_b;
  double confidence_a = 0.0;
  double confidence_b = 0.0;
};

CaseReport case_report(const Bag& bag, const TypeCatalog& catalog, const RelationTable& relations,
                       const CaseVariant& a, const CaseVariant& b,
                       Granularity shown_types = Granularity::kFine);
std::string format_case(const CaseReport& report);

}  // namespace dnnre

#endif  // DNNRE_EVAL_EVALUATE_H_
