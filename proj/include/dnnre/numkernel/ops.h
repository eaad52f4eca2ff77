#ifndef DNNRE_NUMKERNEL_OPS_H_
#define DNNRE_NUMKERNEL_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "dnnre/numkernel/tape.h"
#include "dnnre/numkernel/tensor.h"

// Differentiable operations. Every op takes the tape first; when the tape
// records and at least one input requires a gradient, the output requires a
// gradient and a backward closure is pushed. Rank-1 tensors are vectors
// shaped {n}; rank-2 tensors are row-major matrices shaped {rows, cols}.
namespace dnnre::nk {

// [m,k] x [k,n] -> [m,n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// [m,k] x [n,k]^T -> [m,n]
Tensor matmul_nt(Tape& tape, const Tensor& a, const Tensor& b);
// [k] x [k,n] -> [n]
Tensor vecmat(Tape& tape, const Tensor& x, const Tensor& w);
// [m,n] x [n] -> [m]
Tensor matvec(Tape& tape, const Tensor& w, const Tensor& x);
// [n] . [n] -> [1]
Tensor dot(Tape& tape, const Tensor& a, const Tensor& b);
// Row-wise dot products of two [m,n] matrices -> [m].
Tensor rowwise_dot(Tape& tape, const Tensor& a, const Tensor& b);

Tensor transpose(Tape& tape, const Tensor& a);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
// [m,n] + [n] broadcast over rows.
Tensor add_row_bias(Tape& tape, const Tensor& a, const Tensor& bias);
Tensor scale(Tape& tape, const Tensor& a, double factor);
// Elementwise product with a constant (non-differentiated) mask.
Tensor apply_mask(Tape& tape, const Tensor& a, std::span<const double> mask);
Tensor tanh(Tape& tape, const Tensor& a);

// Softmax of a vector, computed after subtracting the maximum.
Tensor softmax(Tape& tape, const Tensor& logits);
// Softmax applied independently to each row of a matrix.
Tensor softmax_rows(Tape& tape, const Tensor& logits);
// -log softmax(logits)[target] -> [1]
Tensor cross_entropy(Tape& tape, const Tensor& logits, std::size_t target);

// Concatenation of vectors.
Tensor concat(Tape& tape, std::span<const Tensor> parts);
// Column-wise concatenation of matrices with equal row counts.
Tensor concat_cols(Tape& tape, std::span<const Tensor> parts);
// Rows of a vector list stacked into a matrix.
Tensor stack_rows(Tape& tape, std::span<const Tensor> rows);
// table[ids[i], :] for each i -> [ids.size(), cols]
Tensor gather_rows(Tape& tape, const Tensor& table, std::span<const std::size_t> ids);
Tensor row(Tape& tape, const Tensor& a, std::size_t index);
// Vector [n] repeated into [count, n].
Tensor tile_rows(Tape& tape, const Tensor& v, std::size_t count);
Tensor reshape(Tape& tape, const Tensor& a, Shape shape);

// Column means / maxima of a matrix [m,n] -> [n]. Max ties go to the lowest row.
Tensor mean_rows(Tape& tape, const Tensor& a);
Tensor max_rows(Tape& tape, const Tensor& a);
Tensor sum(Tape& tape, const Tensor& a);

// 1-D convolution over a sequence x [L, d] with kernels [m, w, d] and bias
// [m]; zero padding of (w-1)/2 rows on the left and the rest on the right,
// so the output [m, L] has one column per input position.
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& kernels, const Tensor& bias);

// Per-row maxima of h [m, L] over three segments [0,cut1), [cut1,cut2),
// [cut2,L) -> [m, 3]. An empty segment yields 0. Gradient flows only to the
// first maximal position of each non-empty segment.
Tensor segment_max_pool(Tape& tape, const Tensor& h, std::size_t cut1, std::size_t cut2);

}  // namespace dnnre::nk

#endif  // DNNRE_NUMKERNEL_OPS_H_
