#ifndef DNNRE_MODEL_DYNGEN_H_
#define DNNRE_MODEL_DYNGEN_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dnnre/corpus/corpus.h"
#include "dnnre/numkernel/tape.h"
#include "dnnre/numkernel/tensor.h"
#include "dnnre/random.h"

namespace dnnre {

enum class AggregationStrategy { kAttention, kAverage, kMax };

std::string_view strategy_name(AggregationStrategy s);
AggregationStrategy parse_strategy(std::string_view name);

// Which class vectors a generated parameter replaces.
enum class GeneratorTarget { kAttention, kClassifier };

// x W1 + b1 -> tanh -> W2 + b2, with W stored [in, out].
struct TwoLayer {
  Tensor w1, b1, w2, b2;
};

Tensor apply(Tape& tape, const TwoLayer& f, const Tensor& x);  // x: [in] or [rows, in]

struct GeneratorParams {
  Tensor type_emb;  // [type_count, d_t], row per type id incl. UNK
  Tensor w_t;       // [d_t, d_r]
  TwoLayer f_t;     // 2 d_t -> d_r -> d_r, shared by both targets
  TwoLayer f_d_att;
  TwoLayer f_d_cls;

  const TwoLayer& f_d(GeneratorTarget t) const {
    return t == GeneratorTarget::kAttention ? f_d_att : f_d_cls;
  }
};

GeneratorParams init_generator(std::size_t type_count, std::size_t type_dim, std::size_t rep_dim,
                               Rng& rng);

// Reduces the embeddings of a (deduplicated, sorted) type set to one [d_t]
// vector. Attention weights are softmax(t_i W_t rep).
Tensor aggregate_types(Tape& tape, std::span<const int> type_ids, const Tensor& class_rep,
                       const GeneratorParams& params, AggregationStrategy strategy);

// f_d(static_rep + f_t([head_agg; tail_agg])) -> [d_r]
Tensor generate_params(Tape& tape, const Tensor& static_rep, const Tensor& head_agg,
                       const Tensor& tail_agg, const GeneratorParams& params, GeneratorTarget target);

// Row k is the dynamic vector of class k given the pair's type sets; the
// aggregation is conditioned on static_reps row k. Computed as one batch.
Tensor class_dynamic_vectors(Tape& tape, std::span<const int> head_types,
                             std::span<const int> tail_types, const GeneratorParams& params,
                             const Tensor& static_reps, AggregationStrategy strategy,
                             GeneratorTarget target);

Tensor class_dynamic_vectors(Tape& tape, const TypeCatalog& catalog, const std::string& head,
                             const std::string& tail, Granularity granularity,
                             const GeneratorParams& params, const Tensor& static_reps,
                             AggregationStrategy strategy, GeneratorTarget target);

}  // namespace dnnre

#endif  // DNNRE_MODEL_DYNGEN_H_
