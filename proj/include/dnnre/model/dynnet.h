#ifndef DNNRE_MODEL_DYNNET_H_
#define DNNRE_MODEL_DYNNET_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dnnre/corpus/corpus.h"
#include "dnnre/model/dyngen.h"
#include "dnnre/model/encoder.h"

namespace dnnre {

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t type_dim = 50;
  // Relation vectors live in sentence space, so d_r is encoder.sentence_dim.
};

struct ModelParams {
  EncoderParams encoder;
  GeneratorParams generator;
  Tensor att;       // static r, [n, d_r]
  Tensor cls;       // static w, [n, d_r]
  Tensor cls_bias;  // b, [n]

  std::size_t class_count() const { return cls_bias.dim(0); }
};

ModelParams init_model(const ModelConfig& cfg, std::size_t vocab_size, std::size_t type_count,
                       std::size_t class_count, Rng& rng);

// Every trainable buffer with a stable name. `decay` marks tensors under L2;
// `skip_first_row` marks the word table whose PAD row is exempt.
struct ParamRef {
  std::string name;
  Tensor tensor;
  bool decay = true;
  bool skip_first_row = false;
};
std::vector<ParamRef> parameters(const ModelParams& params);

ModelParams clone_params(const ModelParams& params);

struct VariantFlags {
  bool dyn_att = true;
  bool dyn_cls = true;
  bool use_types = true;
  Granularity granularity = Granularity::kFine;
  AggregationStrategy strategy = AggregationStrategy::kAttention;

  // With types off, both dynamic parts are off.
  VariantFlags normalized() const;
  bool operator==(const VariantFlags&) const = default;
};

std::string describe(const VariantFlags& flags);

struct AttentionResult {
  Tensor z;        // [d_s]
  Tensor weights;  // [n_s]
};

// Selective attention of one query vector over sentence rows [n_s, d_s].
AttentionResult bag_attention(Tape& tape, const Tensor& sentences, const Tensor& query);

// [n_s, d_s]
Tensor encode_bag(Tape& tape, const Bag& bag, const EncoderParams& params);

// Type ids of the bag's pair at the flags' granularity.
struct PairTypes {
  std::vector<int> head;
  std::vector<int> tail;
};
PairTypes pair_types(const TypeCatalog& catalog, const Bag& bag, Granularity granularity);

// Decision values v [n]. With `gold` set the attention query is class gold
// only and every class scores the same z (training mode). Without it, class k
// scores the z produced by its own query (test mode). `keep_mask` (size d_s,
// already scaled by 1/keep; empty for none) multiplies every z.
Tensor forward_logits(Tape& tape, const Bag& bag, const PairTypes& types, const ModelParams& params,
                      const VariantFlags& flags, std::optional<int> gold,
                      std::span<const double> keep_mask = {});

// softmax(forward_logits)
Tensor forward_bag(Tape& tape, const Bag& bag, const TypeCatalog& catalog,
                   const ModelParams& params, const VariantFlags& flags,
                   std::optional<int> gold = std::nullopt, std::span<const double> keep_mask = {});

// Test-mode class probabilities without recording gradients.
std::vector<double> predict(const Bag& bag, const TypeCatalog& catalog, const ModelParams& params,
                            const VariantFlags& flags);

}  // namespace dnnre

#endif  // DNNRE_MODEL_DYNNET_H_
