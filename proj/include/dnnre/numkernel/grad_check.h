#ifndef DNNRE_NUMKERNEL_GRAD_CHECK_H_
#define DNNRE_NUMKERNEL_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dnnre/numkernel/tape.h"
#include "dnnre/numkernel/tensor.h"

namespace dnnre::nk {

// Scalar-valued function of the tensors it closes over.
using ScalarFn = std::function<Tensor(Tape&)>;

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

// Compares reverse-mode gradients with central differences.
//
// For each coordinate x of each checked tensor the relative error is
//   |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
// with numeric = (f(x+step) - f(x-step)) / (2 step). Tensors must require
// gradients; their gradient buffers are zeroed before and after the check.
std::vector<GradCheckResult> grad_check(const ScalarFn& f, std::span<Tensor> tensors,
                                        std::span<const std::string> names, double step);

// Single-tensor form: f is evaluated at `point` (which is perturbed in place
// and restored). Returns the maximum relative error.
double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f, Tensor point,
                  double step);

}  // namespace dnnre::nk

#endif  // DNNRE_NUMKERNEL_GRAD_CHECK_H_
