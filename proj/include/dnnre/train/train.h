#ifndef DNNRE_TRAIN_TRAIN_H_
#define DNNRE_TRAIN_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dnnre/corpus/corpus.h"
#include "dnnre/model/dynnet.h"
#include "dnnre/numkernel/tape.h"
#include "dnnre/random.h"

namespace dnnre {

// Attention query used while training: the gold class only, or every class
// hypothesis as at test time.
enum class TrainAttention { kGold, kPerClass };

std::string_view train_attention_name(TrainAttention a);
TrainAttention parse_train_attention(std::string_view name);

struct TrainConfig {
  std::size_t batch_size = 160;
  double learning_rate = 1.0;
  double dropout_keep = 0.5;
  double l2 = 1e-5;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  double rho = 0.95;
  double eps = 1e-6;
  TrainAttention attention = TrainAttention::kGold;
};

void validate(const TrainConfig& cfg);

// Running averages of squared gradients and squared updates, one buffer per
// entry of parameters(params), in the same order.
struct AdadeltaState {
  std::vector<std::vector<double>> avg_sq_grad;
  std::vector<std::vector<double>> avg_sq_delta;

  bool operator==(const AdadeltaState&) const = default;
};

AdadeltaState init_adadelta(const ModelParams& params);

// One update from the gradients currently stored in the parameter tensors.
// Throws NumericError naming the group when a gradient is not finite.
void adadelta_step(std::span<const ParamRef> params, AdadeltaState& state, const TrainConfig& cfg);

// Sum of squares over the weights marked for decay.
Tensor l2_penalty(Tape& tape, std::span<const ParamRef> params);

// Inverted dropout mask: entries are 0 or 1/keep.
std::vector<double> dropout_mask(std::size_t size, double keep, Rng& rng);

// Mean train-mode cross-entropy over the batch plus cfg.l2 times the L2
// penalty. Dropout masks are drawn from rng.
Tensor loss(Tape& tape, std::span<const Bag* const> batch, const TypeCatalog& catalog,
            const ModelParams& params, const VariantFlags& flags, const TrainConfig& cfg, Rng& rng);
Tensor loss(Tape& tape, const std::vector<Bag>& batch, const TypeCatalog& catalog,
            const ModelParams& params, const VariantFlags& flags, const TrainConfig& cfg, Rng& rng);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean batch loss over the epoch
  double auc = 0.0;       // held-out AUC after the epoch

  bool operator==(const EpochRecord&) const = default;
};

struct FitResult {
  ModelParams best;         // parameters of the best held-out epoch (initial ones when epochs = 0)
  ModelParams last;
  AdadeltaState optimizer;  // state after the last epoch
  std::string rng_state;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// `params` is taken as the starting point and not modified.
FitResult fit(const std::vector<Bag>& train, const ModelParams& params, const VariantFlags& flags,
              const TrainConfig& cfg, const std::vector<Bag>& heldout, const TypeCatalog& catalog,
              const EpochCallback& on_epoch = {});

std::string format_epoch_log(const std::vector<EpochRecord>& log);

}  // namespace dnnre

#endif  // DNNRE_TRAIN_TRAIN_H_
