#include "dnnre/numkernel/tensor.h"

#include <cmath>
#include <sstream>

#include "dnnre/errors.h"

namespace dnnre::nk {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, bool requires_grad)
    : Tensor(shape, std::vector<double>(shape_size(shape), 0.0), requires_grad) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : storage_(std::make_shared<Storage>()) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
  }
  if (shape.empty()) throw DimensionError("tensor rank must be at least 1");
  if (values.size() != shape_size(shape)) {
    throw DimensionError("tensor shape " + shape_string(shape) + " needs " +
                         std::to_string(shape_size(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  storage_->shape = std::move(shape);
  storage_->values = std::move(values);
  set_requires_grad(requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return Tensor({1}, {v}, requires_grad); }

Tensor Tensor::vector(std::vector<double> v, bool requires_grad) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v,
                      bool requires_grad) {
  return Tensor({rows, cols}, std::move(v), requires_grad);
}

double Tensor::item() const {
  if (size() != 1) throw DomainError("item() on tensor of shape " + shape_string(shape()));
  return storage_->values[0];
}

void Tensor::set_requires_grad(bool on) {
  storage_->requires_grad = on;
  if (on && storage_->grad.size() != storage_->values.size()) {
    storage_->grad.assign(storage_->values.size(), 0.0);
  }
  if (!on) storage_->grad.clear();
}

void Tensor::zero_grad() {
  std::fill(storage_->grad.begin(), storage_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  Tensor copy(storage_->shape, storage_->values, storage_->requires_grad);
  if (storage_->requires_grad) copy.storage_->grad = storage_->grad;
  return copy;
}

bool Tensor::all_finite() const {
  for (double v : storage_->values) {
    if (!std::isfinite(v)) return false;
  }
  for (double g : storage_->grad) {
    if (!std::isfinite(g)) return false;
  }
  return true;
}

}  // namespace dnnre::nk
