#ifndef DNNRE_MODEL_ENCODER_H_
#define DNNRE_MODEL_ENCODER_H_

#include <cstddef>
#include <vector>

#include "dnnre/corpus/corpus.h"
#include "dnnre/numkernel/tape.h"
#include "dnnre/numkernel/tensor.h"
#include "dnnre/random.h"

namespace dnnre {

struct EncoderConfig {
  std::size_t word_dim = 50;
  std::size_t position_dim = 5;
  std::size_t window = 3;
  std::size_t filters = 230;
  std::size_t sentence_dim = 690;
  int max_distance = 30;

  std::size_t input_dim() const { return word_dim + 2 * position_dim; }
};

// Piecewise CNN sentence encoder weights.
struct EncoderParams {
  Tensor word_emb;     // [vocab, d_w]
  Tensor pos_emb1;     // [2*max_distance+1, d_p], offsets from the head
  Tensor pos_emb2;     // same, offsets from the tail
  Tensor kernels;      // [m, window, d_w + 2*d_p]
  Tensor kernel_bias;  // [m]
  Tensor proj_weight;  // [3m, d_s]
  Tensor proj_bias;    // [d_s]
  int max_distance = 30;

  std::size_t sentence_dim() const { return proj_bias.dim(0); }
};

// Embeddings uniform in [-0.25, 0.25] (PAD row zero); conv and projection
// weights Glorot-uniform; biases zero.
EncoderParams init_encoder(const EncoderConfig& cfg, std::size_t vocab_size, Rng& rng);

// Copies pretrained rows (as returned by load_embeddings) over the word table.
// Empty rows are left alone. Returns the number of rows copied.
std::size_t apply_pretrained(EncoderParams& params, const std::vector<std::vector<double>>& rows);

// Index into the position tables for token i.
std::size_t position_index(int offset, int max_distance);

// Pooling cuts: segments are [0, p1], [p1+1, p2-1] and [p2, L-1] where
// p1 < p2 are the entity positions. Adjacent entities leave the middle empty.
struct SegmentCuts {
  std::size_t cut1;
  std::size_t cut2;
};
SegmentCuts segment_cuts(const Sentence& s);

// [L, d_w + 2*d_p]
Tensor embed_tokens(Tape& tape, const Sentence& s, const EncoderParams& params);
// [d_s]. No dropout inside the encoder.
Tensor encode_sentence(Tape& tape, const Sentence& s, const EncoderParams& params);

}  // namespace dnnre

#endif  // DNNRE_MODEL_ENCODER_H_
