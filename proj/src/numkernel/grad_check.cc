#include "dnnre/numkernel/grad_check.h"

#include <algorithm>
#include <cmath>

#include "dnnre/errors.h"

namespace dnnre::nk {
namespace {

double eval(const ScalarFn& f) {
  Tape tape(false);
  Tensor out = f(tape);
  if (out.size() != 1) throw DomainError("grad_check: function output is not scalar");
  return out.item();
}

}  // namespace

std::vector<GradCheckResult> grad_check(const ScalarFn& f, std::span<Tensor> tensors,
                                        std::span<const std::string> names, double step) {
  if (!(step > 0.0)) throw DomainError("grad_check: step must be positive");
  for (Tensor& t : tensors) {
    if (!t.requires_grad()) throw DomainError("grad_check: tensor does not require grad");
    t.zero_grad();
  }
  {
    Tape tape;
    Tensor out = f(tape);
    if (out.size() != 1) throw DomainError("grad_check: function output is not scalar");
    tape.backward(out);
  }
  std::vector<GradCheckResult> results;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    Tensor& t = tensors[k];
    std::vector<double> analytic(t.grad().begin(), t.grad().end());
    GradCheckResult r;
    r.name = k < names.size() ? names[k] : "tensor" + std::to_string(k);
    r.coordinates = t.size();
    auto v = t.mutable_values();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + step;
      const double fp = eval(f);
      v[i] = orig - step;
      const double fm = eval(f);
      v[i] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      const double err = std::abs(analytic[i] - numeric) /
                         std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
      r.max_rel_error = std::max(r.max_rel_error, err);
    }
    results.push_back(r);
  }
  for (Tensor& t : tensors) t.zero_grad();
  return results;
}

double grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f, Tensor point,
                  double step) {
  if (!point.requires_grad()) point.set_requires_grad(true);
  std::vector<Tensor> ts{point};
  const std::string name = "point";
  auto results = grad_check([&](Tape& tape) { return f(tape, point); }, ts,
                            std::span<const std::string>(&name, 1), step);
  return results[0].max_rel_error;
}

}  // namespace dnnre::nk
