#include "dnnre/numkernel/tape.h"

#include "dnnre/errors.h"

namespace dnnre::nk {

void Tape::record(std::function<void()> backward_fn) {
  if (recording_) backward_.push_back(std::move(backward_fn));
}

void Tape::backward(Tensor output, double seed) {
  if (!recording_) throw DomainError("backward() on a non-recording tape");
  if (output.size() != 1) {
    throw DomainError("backward() needs a scalar output, got " + shape_string(output.shape()));
  }
  if (!output.requires_grad()) return;  // nothing upstream needs a gradient
  output.grad()[0] += seed;
  for (auto it = backward_.rbegin(); it != backward_.rend(); ++it) (*it)();
  backward_.clear();
}

}  // namespace dnnre::nk
