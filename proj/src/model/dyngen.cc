#include "dnnre/model/dyngen.h"

#include <algorithm>
#include <cmath>

#include "dnnre/errors.h"
#include "dnnre/numkernel/ops.h"

namespace dnnre {

namespace {

Tensor glorot(std::size_t in, std::size_t out, Rng& rng) {
  Tensor t({in, out}, true);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& v : t.mutable_values()) v = uniform(rng, -bound, bound);
  return t;
}

TwoLayer init_two_layer(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  return {glorot(in, hidden, rng), Tensor({hidden}, true), glorot(hidden, out, rng),
          Tensor({out}, true)};
}

std::vector<std::size_t> sorted_ids(std::span<const int> ids, std::size_t table_rows) {
  if (ids.empty()) throw DomainError("type set is empty; unknown entities must map to UNK");
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= table_rows) {
      throw DomainError("type id " + std::to_string(id) + " outside table of " +
                        std::to_string(table_rows));
    }
    out.push_back(static_cast<std::size_t>(id));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// [n, d_t]: one aggregated type vector per class row of reps.
Tensor aggregate_batch(Tape& tape, std::span<const int> ids, const Tensor& reps,
                       const GeneratorParams& params, AggregationStrategy strategy) {
  const auto rows = sorted_ids(ids, params.type_emb.dim(0));
  const Tensor types = nk::gather_rows(tape, params.type_emb, rows);  // [n_t, d_t]
  const std::size_t n = reps.dim(0);
  switch (strategy) {
    case AggregationStrategy::kAverage:
      return nk::tile_rows(tape, nk::mean_rows(tape, types), n);
    case AggregationStrategy::kMax:
      return nk::tile_rows(tape, nk::max_rows(tape, types), n);
    case AggregationStrategy::kAttention:
      break;
  }
  const Tensor u = nk::matmul_nt(tape, reps, params.w_t);            // [n, d_t], row k = W_t rep_k
  const Tensor weights = nk::softmax_rows(tape, nk::matmul_nt(tape, u, types));  // [n, n_t]
  return nk::matmul(tape, weights, types);
}

}  // namespace

std::string_view strategy_name(AggregationStrategy s) {
  switch (s) {
    case AggregationStrategy::kAttention: return "attention";
    case AggregationStrategy::kAverage: return "avg";
    case AggregationStrategy::kMax: return "max";
  }
  return "?";
}

AggregationStrategy parse_strategy(std::string_view name) {
  if (name == "attention") return AggregationStrategy::kAttention;
  if (name == "avg") return AggregationStrategy::kAverage;
  if (name == "max") return AggregationStrategy::kMax;
  throw ConfigError("unknown aggregation strategy '" + std::string(name) +
                    "' (expected attention, avg or max)");
}

Tensor apply(Tape& tape, const TwoLayer& f, const Tensor& x) {
  if (x.rank() == 1) {
    const Tensor h = nk::tanh(tape, nk::add(tape, nk::vecmat(tape, x, f.w1), f.b1));
    return nk::add(tape, nk::vecmat(tape, h, f.w2), f.b2);
  }
  const Tensor h = nk::tanh(tape, nk::add_row_bias(tape, nk::matmul(tape, x, f.w1), f.b1));
  return nk::add_row_bias(tape, nk::matmul(tape, h, f.w2), f.b2);
}

GeneratorParams init_generator(std::size_t type_count, std::size_t type_dim, std::size_t rep_dim,
                               Rng& rng) {
  if (type_count == 0 || type_dim == 0 || rep_dim == 0) {
    throw ConfigError("generator dimensions must be positive");
  }
  GeneratorParams p;
  p.type_emb = Tensor({type_count, type_dim}, true);
  for (double& v : p.type_emb.mutable_values()) v = uniform(rng, -0.25, 0.25);
  p.w_t = glorot(type_dim, rep_dim, rng);
  p.f_t = init_two_layer(2 * type_dim, rep_dim, rep_dim, rng);
  p.f_d_att = init_two_layer(rep_dim, rep_dim, rep_dim, rng);
  p.f_d_cls = init_two_layer(rep_dim, rep_dim, rep_dim, rng);
  return p;
}

Tensor aggregate_types(Tape& tape, std::span<const int> type_ids, const Tensor& class_rep,
                       const GeneratorParams& params, AggregationStrategy strategy) {
  const auto rows = sorted_ids(type_ids, params.type_emb.dim(0));
  const Tensor types = nk::gather_rows(tape, params.type_emb, rows);
  switch (strategy) {
    case AggregationStrategy::kAverage: return nk::mean_rows(tape, types);
    case AggregationStrategy::kMax: return nk::max_rows(tape, types);
    case AggregationStrategy::kAttention: break;
  }
  const Tensor u = nk::matvec(tape, params.w_t, class_rep);
  const Tensor weights = nk::softmax(tape, nk::matvec(tape, types, u));
  return nk::vecmat(tape, weights, types);
}

Tensor generate_params(Tape& tape, const Tensor& static_rep, const Tensor& head_agg,
                       const Tensor& tail_agg, const GeneratorParams& params, GeneratorTarget target) {
  const Tensor parts[] = {head_agg, tail_agg};
  const Tensor shift = apply(tape, params.f_t, nk::concat(tape, parts));
  return apply(tape, params.f_d(target), nk::add(tape, static_rep, shift));
}

Tensor class_dynamic_vectors(Tape& tape, std::span<const int> head_types,
                             std::span<const int> tail_types, const GeneratorParams& params,
                             const Tensor& static_reps, AggregationStrategy strategy,
                             GeneratorTarget target) {
  if (static_reps.rank() != 2) {
    throw DimensionError("static class vectors must be a matrix, got " +
                         nk::shape_string(static_reps.shape()));
  }
  const Tensor parts[] = {aggregate_batch(tape, head_types, static_reps, params, strategy),
                          aggregate_batch(tape, tail_types, static_reps, params, strategy)};
  const Tensor shift = apply(tape, params.f_t, nk::concat_cols(tape, parts));
  return apply(tape, params.f_d(target), nk::add(tape, static_reps, shift));
}

Tensor class_dynamic_vectors(Tape& tape, const TypeCatalog& catalog, const std::string& head,
                             const std::string& tail, Granularity granularity,
                             const GeneratorParams& params, const Tensor& static_reps,
                             AggregationStrategy strategy, GeneratorTarget target) {
  const auto h = entity_types(catalog, head, granularity);
  const auto t = entity_types(catalog, tail, granularity);
  return class_dynamic_vectors(tape, h, t, params, static_reps, strategy, target);
}

}  // namespace dnnre
