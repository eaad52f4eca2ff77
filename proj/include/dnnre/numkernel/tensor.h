#ifndef DNNRE_NUMKERNEL_TENSOR_H_
#define DNNRE_NUMKERNEL_TENSOR_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dnnre::nk {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major float64 array with an optional gradient buffer.
//
// Tensor is a handle: copies share storage. Parameters live across many
// tapes; intermediate results are created by ops and owned by whoever holds
// a handle (usually the tape's backward closures). Use clone() for a deep
// copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor vector(std::vector<double> v, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v,
                       bool requires_grad = false);

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return storage_->shape; }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return storage_->shape.at(axis); }
  std::size_t size() const { return storage_->values.size(); }

  std::span<const double> values() const { return storage_->values; }
  std::span<double> mutable_values() { return storage_->values; }
  double operator[](std::size_t i) const { return storage_->values[i]; }
  double at(std::size_t r, std::size_t c) const {
    return storage_->values[r * storage_->shape[1] + c];
  }
  // Value of a size-1 tensor.
  double item() const;

  bool requires_grad() const { return storage_->requires_grad; }
  // Allocates a zeroed gradient buffer if absent.
  void set_requires_grad(bool on);
  // Gradient storage is shared by every handle, so it is writable through
  // const handles (backward closures hold const copies).
  std::span<double> grad() const { return storage_->grad; }
  void zero_grad();

  Tensor clone() const;
  bool same_storage(const Tensor& other) const { return storage_ == other.storage_; }
  // True when every value (and gradient, if present) is finite.
  bool all_finite() const;

 private:
  struct Storage {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> storage_;
};

}  // namespace dnnre::nk

namespace dnnre {
using nk::Shape;
using nk::Tensor;
}  // namespace dnnre

#endif  // DNNRE_NUMKERNEL_TENSOR_H_
