#include "dnnre/train/train.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "dnnre/errors.h"
#include "dnnre/eval/evaluate.h"
#include "dnnre/numkernel/ops.h"

namespace dnnre {

std::string_view train_attention_name(TrainAttention a) {
  return a == TrainAttention::kGold ? "gold" : "per_class";
}

TrainAttention parse_train_attention(std::string_view name) {
  if (name == "gold") return TrainAttention::kGold;
  if (name == "per_class") return TrainAttention::kPerClass;
  throw ConfigError("unknown training attention '" + std::string(name) +
                    "' (expected gold or per_class)");
}

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(cfg.dropout_keep > 0.0 && cfg.dropout_keep <= 1.0)) {
    throw ConfigError("dropout_keep must lie in (0, 1]");
  }
  if (!(cfg.l2 >= 0.0)) throw ConfigError("l2 must be non-negative");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (!(cfg.eps > 0.0)) throw ConfigError("eps must be positive");
}

AdadeltaState init_adadelta(const ModelParams& params) {
  AdadeltaState s;
  for (const auto& p : parameters(params)) {
    s.avg_sq_grad.emplace_back(p.tensor.size(), 0.0);
    s.avg_sq_delta.emplace_back(p.tensor.size(), 0.0);
  }
  return s;
}

void adadelta_step(std::span<const ParamRef> params, AdadeltaState& state, const TrainConfig& cfg) {
  if (state.avg_sq_grad.size() != params.size()) {
    throw DimensionError("optimizer state does not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto grad = params[i].tensor.grad();
    if (grad.empty()) continue;
    for (double g : grad) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + params[i].name);
    }
  }
  const double rho = cfg.rho, eps = cfg.eps;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].tensor;
    const auto grad = t.grad();
    auto& eg = state.avg_sq_grad[i];
    auto& ed = state.avg_sq_delta[i];
    auto x = t.mutable_values();
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double g = grad.empty() ? 0.0 : grad[j];
      eg[j] = rho * eg[j] + (1.0 - rho) * g * g;
      const double delta = std::sqrt(ed[j] + eps) / std::sqrt(eg[j] + eps) * g;
      ed[j] = rho * ed[j] + (1.0 - rho) * delta * delta;
      x[j] -= cfg.learning_rate * delta;
    }
  }
}

Tensor l2_penalty(Tape& tape, std::span<const ParamRef> params) {
  std::vector<Tensor> terms;
  for (const auto& p : params) {
    if (!p.decay) continue;
    const Tensor flat = nk::reshape(tape, p.tensor, {p.tensor.size()});
    if (p.skip_first_row) {
      std::vector<double> mask(p.tensor.size(), 1.0);
      std::fill_n(mask.begin(), p.tensor.dim(1), 0.0);
      terms.push_back(nk::dot(tape, nk::apply_mask(tape, flat, mask), flat));
    } else {
      terms.push_back(nk::dot(tape, flat, flat));
    }
  }
  if (terms.empty()) return Tensor::scalar(0.0);
  return nk::sum(tape, nk::concat(tape, terms));
}

std::vector<double> dropout_mask(std::size_t size, double keep, Rng& rng) {
  std::vector<double> mask(size);
  for (double& m : mask) m = bernoulli(rng, keep) ? 1.0 / keep : 0.0;
  return mask;
}

Tensor loss(Tape& tape, std::span<const Bag* const> batch, const TypeCatalog& catalog,
            const ModelParams& params, const VariantFlags& flags, const TrainConfig& cfg, Rng& rng) {
  if (batch.empty()) throw DomainError("loss of an empty batch");
  const std::size_t d_s = params.encoder.sentence_dim();
  std::vector<Tensor> terms;
  terms.reserve(batch.size());
  for (const Bag* bag : batch) {
    const PairTypes types =
        flags.use_types ? pair_types(catalog, *bag, flags.granularity) : PairTypes{};
    std::vector<double> mask;
    if (cfg.dropout_keep < 1.0) mask = dropout_mask(d_s, cfg.dropout_keep, rng);
    const std::optional<int> query =
        cfg.attention == TrainAttention::kGold ? std::optional<int>(bag->label) : std::nullopt;
    const Tensor v = forward_logits(tape, *bag, types, params, flags, query, mask);
    terms.push_back(nk::cross_entropy(tape, v, static_cast<std::size_t>(bag->label)));
  }
  Tensor data = nk::scale(tape, nk::sum(tape, nk::concat(tape, terms)),
                          1.0 / static_cast<double>(batch.size()));
  if (cfg.l2 == 0.0) return data;
  const auto refs = parameters(params);
  return nk::add(tape, data, nk::scale(tape, l2_penalty(tape, refs), cfg.l2));
}

Tensor loss(Tape& tape, const std::vector<Bag>& batch, const TypeCatalog& catalog,
            const ModelParams& params, const VariantFlags& flags, const TrainConfig& cfg, Rng& rng) {
  std::vector<const Bag*> ptrs;
  for (const Bag& b : batch) ptrs.push_back(&b);
  return loss(tape, ptrs, catalog, params, flags, cfg, rng);
}

FitResult fit(const std::vector<Bag>& train, const ModelParams& initial, const VariantFlags& flags,
              const TrainConfig& cfg, const std::vector<Bag>& heldout, const TypeCatalog& catalog,
              const EpochCallback& on_epoch) {
  validate(cfg);
  FitResult result;
  result.last = clone_params(initial);
  result.best = clone_params(initial);
  result.optimizer = init_adadelta(result.last);
  Rng rng(derive_seed(cfg.seed, "train.fit"));
  if (cfg.epochs > 0 && train.empty()) throw DomainError("no training bags");

  const auto refs = parameters(result.last);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double best_auc = -1.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const Bag*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      for (auto p : refs) p.tensor.zero_grad();
      Tape tape;
      const Tensor l = loss(tape, batch, catalog, result.last, flags, cfg, rng);
      if (!std::isfinite(l.item())) throw NumericError("loss diverged in epoch " + std::to_string(epoch));
      tape.backward(l);
      adadelta_step(refs, result.optimizer, cfg);
      total += l.item() * static_cast<double>(batch.size());
    }
    EpochRecord rec{epoch, total / static_cast<double>(train.size()), 0.0};
    rec.auc = heldout.empty() ? 0.0 : heldout_auc(heldout, catalog, result.last, flags);
    if (rec.auc > best_auc) {
      best_auc = rec.auc;
      result.best = clone_params(result.last);
      result.best_epoch = epoch;
    }
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  result.rng_state = serialize_rng(rng);
  return result;
}

std::string format_epoch_log(const std::vector<EpochRecord>& log) {
  std::string out = "epoch,loss,auc\n";
  char buf[96];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.epoch, r.loss, r.auc);
    out += buf;
  }
  return out;
}

}  // namespace dnnre
