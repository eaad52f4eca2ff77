#ifndef DNNRE_TESTS_TEST_UTIL_H_
#define DNNRE_TESTS_TEST_UTIL_H_

#include <vector>

#include "dnnre/corpus/corpus.h"
#include "dnnre/model/dynnet.h"
#include "dnnre/numkernel/tensor.h"
#include "dnnre/random.h"

namespace dnnre::testing {

inline nk::Tensor random_tensor(Rng& rng, nk::Shape shape, bool requires_grad = true,
                                double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(nk::shape_size(shape));
  for (double& x : v) x = uniform(rng, lo, hi);
  return nk::Tensor(std::move(shape), std::move(v), requires_grad);
}

inline std::vector<double> to_vec(const nk::Tensor& t) {
  return {t.values().begin(), t.values().end()};
}

// Dimensions of the smallest model used for gradient checks.
inline ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.encoder.word_dim = 4;
  cfg.encoder.position_dim = 2;
  cfg.encoder.window = 3;
  cfg.encoder.filters = 2;
  cfg.encoder.sentence_dim = 6;
  cfg.encoder.max_distance = 30;
  cfg.type_dim = 3;
  return cfg;
}

// Every buffer, biases and the PAD row included, drawn from [-bound, bound].
inline ModelParams random_model(Rng& rng, const ModelConfig& cfg, std::size_t vocab,
                                std::size_t types, std::size_t classes, double bound = 0.5) {
  ModelParams p = init_model(cfg, vocab, types, classes, rng);
  for (const auto& ref : parameters(p)) {
    Tensor t = ref.tensor;
    for (double& v : t.mutable_values()) v = uniform(rng, -bound, bound);
  }
  return p;
}

// Two fine types under one coarse type and one under another; "h" carries
// two types, "t" one, "u" none.
inline TypeCatalog tiny_catalog() {
  TypeCatalog cat;
  cat.add_fine_type("/person/doctor", "/person");
  cat.add_fine_type("/person/coach", "/person");
  cat.add_fine_type("/location/city", "/location");
  cat.set_entity_types("h", {0, 2});
  cat.set_entity_types("t", {1});
  return cat;
}

inline Sentence sentence(std::vector<int> tokens, int head, int tail) {
  Sentence s;
  s.tokens = std::move(tokens);
  s.head_pos = head;
  s.tail_pos = tail;
  return s;
}

inline Bag tiny_bag(int label = 1) {
  Bag b;
  b.head = "h";
  b.tail = "t";
  b.label = label;
  b.sentences.push_back(sentence({2, 3, 4, 5, 6}, 1, 3));
  b.sentences.push_back(sentence({6, 5, 2, 3}, 0, 2));
  return b;
}

}  // namespace dnnre::testing

#endif  // DNNRE_TESTS_TEST_UTIL_H_
