#include "dnnre/model/encoder.h"

#include <algorithm>
#include <cmath>

#include "dnnre/errors.h"
#include "dnnre/numkernel/ops.h"

namespace dnnre {

namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape), true);
  for (double& v : t.mutable_values()) v = uniform(rng, -bound, bound);
  return t;
}

}  // namespace

EncoderParams init_encoder(const EncoderConfig& cfg, std::size_t vocab_size, Rng& rng) {
  if (cfg.word_dim == 0 || cfg.position_dim == 0 || cfg.window == 0 || cfg.filters == 0 ||
      cfg.sentence_dim == 0 || cfg.max_distance < 0 || vocab_size < 2) {
    throw ConfigError("encoder dimensions must be positive");
  }
  EncoderParams p;
  p.max_distance = cfg.max_distance;
  const std::size_t positions = static_cast<std::size_t>(2 * cfg.max_distance + 1);
  p.word_emb = uniform_tensor({vocab_size, cfg.word_dim}, 0.25, rng);
  for (std::size_t j = 0; j < cfg.word_dim; ++j) p.word_emb.mutable_values()[j] = 0.0;
  p.pos_emb1 = uniform_tensor({positions, cfg.position_dim}, 0.25, rng);
  p.pos_emb2 = uniform_tensor({positions, cfg.position_dim}, 0.25, rng);
  const std::size_t fan_in = cfg.window * cfg.input_dim();
  p.kernels = uniform_tensor({cfg.filters, cfg.window, cfg.input_dim()},
                             std::sqrt(6.0 / static_cast<double>(fan_in + cfg.filters)), rng);
  p.kernel_bias = Tensor({cfg.filters}, true);
  p.proj_weight =
      uniform_tensor({3 * cfg.filters, cfg.sentence_dim},
                     std::sqrt(6.0 / static_cast<double>(3 * cfg.filters + cfg.sentence_dim)), rng);
  p.proj_bias = Tensor({cfg.sentence_dim}, true);
  return p;
}

std::size_t apply_pretrained(EncoderParams& params, const std::vector<std::vector<double>>& rows) {
  const std::size_t dim = params.word_emb.dim(1);
  if (rows.size() > params.word_emb.dim(0)) {
    throw DimensionError("pretrained table has more rows than the vocabulary");
  }
  auto table = params.word_emb.mutable_values();
  std::size_t copied = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].empty()) continue;
    if (rows[i].size() != dim) throw DimensionError("pretrained row width differs from d_w");
    std::copy(rows[i].begin(), rows[i].end(), table.begin() + static_cast<std::ptrdiff_t>(i * dim));
    ++copied;
  }
  return copied;
}

std::size_t position_index(int offset, int max_distance) {
  return static_cast<std::size_t>(std::clamp(offset, -max_distance, max_distance) + max_distance);
}

SegmentCuts segment_cuts(const Sentence& s) {
  const auto p1 = static_cast<std::size_t>(std::min(s.head_pos, s.tail_pos));
  const auto p2 = static_cast<std::size_t>(std::max(s.head_pos, s.tail_pos));
  return {p1 + 1, p2};
}

Tensor embed_tokens(Tape& tape, const Sentence& s, const EncoderParams& params) {
  const std::size_t n = s.tokens.size();
  if (n == 0) throw DomainError("cannot embed an empty sentence");
  std::vector<std::size_t> words(n), pos1(n), pos2(n);
  const std::size_t vocab = params.word_emb.dim(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (s.tokens[i] < 0 || static_cast<std::size_t>(s.tokens[i]) >= vocab) {
      throw DomainError("token id " + std::to_string(s.tokens[i]) + " outside vocabulary of " +
                        std::to_string(vocab));
    }
    words[i] = static_cast<std::size_t>(s.tokens[i]);
    const int at = static_cast<int>(i);
    pos1[i] = position_index(at - s.head_pos, params.max_distance);
    pos2[i] = position_index(at - s.tail_pos, params.max_distance);
  }
  const Tensor parts[] = {nk::gather_rows(tape, params.word_emb, words),
                          nk::gather_rows(tape, params.pos_emb1, pos1),
                          nk::gather_rows(tape, params.pos_emb2, pos2)};
  return nk::concat_cols(tape, parts);
}

Tensor encode_sentence(Tape& tape, const Sentence& s, const EncoderParams& params) {
  const Tensor x = embed_tokens(tape, s, params);
  const Tensor h = nk::conv1d(tape, x, params.kernels, params.kernel_bias);
  const SegmentCuts cuts = segment_cuts(s);
  const Tensor q = nk::tanh(tape, nk::segment_max_pool(tape, h, cuts.cut1, cuts.cut2));
  const Tensor flat = nk::reshape(tape, q, {q.size()});
  return nk::tanh(tape, nk::add(tape, nk::vecmat(tape, flat, params.proj_weight), params.proj_bias));
}

}  // namespace dnnre
