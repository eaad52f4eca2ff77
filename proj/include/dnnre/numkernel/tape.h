#ifndef DNNRE_NUMKERNEL_TAPE_H_
#define DNNRE_NUMKERNEL_TAPE_H_

#include <functional>
#include <vector>

#include "dnnre/numkernel/tensor.h"

namespace dnnre::nk {

// Records backward closures in forward order and replays them in reverse.
//
// A non-recording tape turns every op into a plain forward evaluation: no
// closures are stored and no gradient buffers are allocated for outputs.
// Gradients accumulate additively into whatever tensors the closures touch,
// so a tensor consumed twice receives the sum of both contributions.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  std::size_t size() const { return backward_.size(); }

  void record(std::function<void()> backward_fn);

  // Seeds d(output) = seed and runs every recorded closure newest-first.
  // output must hold exactly one value.
  void backward(Tensor output, double seed = 1.0);

 private:
  bool recording_;
  std::vector<std::function<void()>> backward_;
};

}  // namespace dnnre::nk

namespace dnnre {
using nk::Tape;
}  // namespace dnnre

#endif  // DNNRE_NUMKERNEL_TAPE_H_
