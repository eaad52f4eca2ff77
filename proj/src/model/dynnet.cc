#include "dnnre/model/dynnet.h"

#include <cmath>

#include "dnnre/errors.h"
#include "dnnre/numkernel/ops.h"

namespace dnnre {

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t({rows, cols}, true);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : t.mutable_values()) v = uniform(rng, -bound, bound);
  return t;
}

void add_layer(std::vector<ParamRef>& out, const std::string& prefix, const TwoLayer& f) {
  out.push_back({prefix + ".w1", f.w1, true, false});
  out.push_back({prefix + ".b1", f.b1, false, false});
  out.push_back({prefix + ".w2", f.w2, true, false});
  out.push_back({prefix + ".b2", f.b2, false, false});
}

TwoLayer clone_layer(const TwoLayer& f) {
  return {f.w1.clone(), f.b1.clone(), f.w2.clone(), f.b2.clone()};
}

}  // namespace

ModelParams init_model(const ModelConfig& cfg, std::size_t vocab_size, std::size_t type_count,
                       std::size_t class_count, Rng& rng) {
  if (class_count == 0) throw ConfigError("model needs at least one relation class");
  ModelParams p;
  // Separate streams keep each block's initial values independent of the
  // sizes of the others.
  Rng enc_rng(derive_seed(rng(), "init.encoder"));
  Rng gen_rng(derive_seed(rng(), "init.generator"));
  Rng cls_rng(derive_seed(rng(), "init.classes"));
  p.encoder = init_encoder(cfg.encoder, vocab_size, enc_rng);
  const std::size_t d_r = cfg.encoder.sentence_dim;
  p.generator = init_generator(type_count, cfg.type_dim, d_r, gen_rng);
  p.att = uniform_matrix(class_count, d_r, cls_rng);
  p.cls = uniform_matrix(class_count, d_r, cls_rng);
  p.cls_bias = Tensor({class_count}, true);
  return p;
}

std::vector<ParamRef> parameters(const ModelParams& p) {
  std::vector<ParamRef> out;
  out.push_back({"encoder.word_emb", p.encoder.word_emb, true, true});
  out.push_back({"encoder.pos_emb1", p.encoder.pos_emb1, true, false});
  out.push_back({"encoder.pos_emb2", p.encoder.pos_emb2, true, false});
  out.push_back({"encoder.kernels", p.encoder.kernels, true, false});
  out.push_back({"encoder.kernel_bias", p.encoder.kernel_bias, false, false});
  out.push_back({"encoder.proj_weight", p.encoder.proj_weight, true, false});
  out.push_back({"encoder.proj_bias", p.encoder.proj_bias, false, false});
  out.push_back({"generator.type_emb", p.generator.type_emb, true, false});
  out.push_back({"generator.w_t", p.generator.w_t, true, false});
  add_layer(out, "generator.f_t", p.generator.f_t);
  add_layer(out, "generator.f_d_att", p.generator.f_d_att);
  add_layer(out, "generator.f_d_cls", p.generator.f_d_cls);
  out.push_back({"classes.att", p.att, true, false});
  out.push_back({"classes.cls", p.cls, true, false});
  out.push_back({"classes.bias", p.cls_bias, false, false});
  return out;
}

ModelParams clone_params(const ModelParams& p) {
  ModelParams c;
  c.encoder = p.encoder;
  c.encoder.word_emb = p.encoder.word_emb.clone();
  c.encoder.pos_emb1 = p.encoder.pos_emb1.clone();
  c.encoder.pos_emb2 = p.encoder.pos_emb2.clone();
  c.encoder.kernels = p.encoder.kernels.clone();
  c.encoder.kernel_bias = p.encoder.kernel_bias.clone();
  c.encoder.proj_weight = p.encoder.proj_weight.clone();
  c.encoder.proj_bias = p.encoder.proj_bias.clone();
  c.generator.type_emb = p.generator.type_emb.clone();
  c.generator.w_t = p.generator.w_t.clone();
  c.generator.f_t = clone_layer(p.generator.f_t);
  c.generator.f_d_att = clone_layer(p.generator.f_d_att);
  c.generator.f_d_cls = clone_layer(p.generator.f_d_cls);
  c.att = p.att.clone();
  c.cls = p.cls.clone();
  c.cls_bias = p.cls_bias.clone();
  return c;
}

VariantFlags VariantFlags::normalized() const {
  VariantFlags f = *this;
  if (!f.use_types) {
    f.dyn_att = f.dyn_cls = false;
    f.strategy = AggregationStrategy::kAttention;
    f.granularity = Granularity::kFine;
  }
  return f;
}

std::string describe(const VariantFlags& flags) {
  const VariantFlags f = flags.normalized();
  std::string out = "dyn_att=" + std::string(f.dyn_att ? "1" : "0") +
                    " dyn_cls=" + (f.dyn_cls ? "1" : "0") + " use_types=" + (f.use_types ? "1" : "0");
  out += " granularity=" + std::string(granularity_name(f.granularity));
  out += " strategy=" + std::string(strategy_name(f.strategy));
  return out;
}

AttentionResult bag_attention(Tape& tape, const Tensor& sentences, const Tensor& query) {
  if (!sentences.defined() || sentences.rank() != 2 || sentences.dim(0) == 0) {
    throw DomainError("bag attention needs at least one sentence");
  }
  const Tensor weights = nk::softmax(tape, nk::matvec(tape, sentences, query));
  return {nk::vecmat(tape, weights, sentences), weights};
}

Tensor encode_bag(Tape& tape, const Bag& bag, const EncoderParams& params) {
  if (bag.sentences.empty()) throw DomainError("bag " + bag.head + "/" + bag.tail + " is empty");
  std::vector<Tensor> rows;
  rows.reserve(bag.sentences.size());
  for (const Sentence& s : bag.sentences) rows.push_back(encode_sentence(tape, s, params));
  return nk::stack_rows(tape, rows);
}

PairTypes pair_types(const TypeCatalog& catalog, const Bag& bag, Granularity granularity) {
  return {entity_types(catalog, bag.head, granularity), entity_types(catalog, bag.tail, granularity)};
}

Tensor forward_logits(Tape& tape, const Bag& bag, const PairTypes& types, const ModelParams& params,
                      const VariantFlags& raw_flags, std::optional<int> gold,
                      std::span<const double> keep_mask) {
  const VariantFlags flags = raw_flags.normalized();
  const std::size_t n = params.class_count();
  const Tensor sentences = encode_bag(tape, bag, params.encoder);
  const AggregationStrategy strat = flags.strategy;
  const Tensor cls = flags.dyn_cls
                         ? class_dynamic_vectors(tape, types.head, types.tail, params.generator,
                                                 params.cls, strat, GeneratorTarget::kClassifier)
                         : params.cls;

  if (gold) {
    if (*gold < 0 || static_cast<std::size_t>(*gold) >= n) {
      throw DomainError("gold class " + std::to_string(*gold) + " outside [0, " +
                        std::to_string(n) + ")");
    }
    const Tensor gold_att = nk::row(tape, params.att, static_cast<std::size_t>(*gold));
    Tensor query = gold_att;
    if (flags.dyn_att) {
      const Tensor reps = nk::reshape(tape, gold_att, {1, gold_att.size()});
      query = nk::row(tape,
                      class_dynamic_vectors(tape, types.head, types.tail, params.generator, reps,
                                            strat, GeneratorTarget::kAttention),
                      0);
    }
    Tensor z = bag_attention(tape, sentences, query).z;
    if (!keep_mask.empty()) z = nk::apply_mask(tape, z, keep_mask);
    return nk::add(tape, nk::matvec(tape, cls, z), params.cls_bias);
  }

  const Tensor att = flags.dyn_att
                         ? class_dynamic_vectors(tape, types.head, types.tail, params.generator,
                                                 params.att, strat, GeneratorTarget::kAttention)
                         : params.att;
  const Tensor weights = nk::softmax_rows(tape, nk::matmul_nt(tape, att, sentences));  // [n, n_s]
  Tensor z = nk::matmul(tape, weights, sentences);                                      // [n, d_s]
  if (!keep_mask.empty()) {
    std::vector<double> tiled;
    tiled.reserve(z.size());
    for (std::size_t k = 0; k < n; ++k) tiled.insert(tiled.end(), keep_mask.begin(), keep_mask.end());
    z = nk::apply_mask(tape, z, tiled);
  }
  return nk::add(tape, nk::rowwise_dot(tape, cls, z), params.cls_bias);
}

Tensor forward_bag(Tape& tape, const Bag& bag, const TypeCatalog& catalog,
                   const ModelParams& params, const VariantFlags& flags, std::optional<int> gold,
                   std::span<const double> keep_mask) {
  const PairTypes types = flags.use_types ? pair_types(catalog, bag, flags.granularity) : PairTypes{};
  return nk::softmax(tape, forward_logits(tape, bag, types, params, flags, gold, keep_mask));
}

std::vector<double> predict(const Bag& bag, const TypeCatalog& catalog, const ModelParams& params,
                            const VariantFlags& flags) {
  Tape tape(false);
  const Tensor probs = forward_bag(tape, bag, catalog, params, flags);
  return {probs.values().begin(), probs.values().end()};
}

}  // namespace dnnre
