#include "dnnre/numkernel/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dnnre/errors.h"

namespace dnnre::nk {
namespace {

bool needs_grad(const Tape& tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape.recording()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

bool needs_grad(const Tape& tape, std::span<const Tensor> inputs) {
  if (!tape.recording()) return false;
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) return true;
  }
  return false;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + shape_string(t.shape()));
  }
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                       " and " + shape_string(b.shape()));
}

// out[m,n] += a[m,k] * b[k,n]
void gemm_nn(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* o = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* br = b + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
}

// out[m,n] += a[m,k] * b[n,k]^T
void gemm_nt(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* br = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      out[i * n + j] += s;
    }
  }
}

// out[k,n] += a[m,k]^T * b[m,n]
void gemm_tn(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a + i * k;
    const double* br = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ar[p];
      if (av == 0.0) continue;
      double* o = out + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul", a, b);
  const bool g = needs_grad(tape, {&a, &b});
  Tensor out({m, n}, g);
  gemm_nn(a.values().data(), b.values().data(), out.mutable_values().data(), m, k, n);
  if (g) {
    tape.record([a, b, out, m, k, n]() mutable {
      if (a.requires_grad()) gemm_nt(out.grad().data(), b.values().data(), a.grad().data(), m, n, k);
      if (b.requires_grad()) gemm_tn(a.values().data(), out.grad().data(), b.grad().data(), m, k, n);
    });
  }
  return out;
}

Tensor matmul_nt(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) mismatch("matmul_nt", a, b);
  const bool g = needs_grad(tape, {&a, &b});
  Tensor out({m, n}, g);
  gemm_nt(a.values().data(), b.values().data(), out.mutable_values().data(), m, k, n);
  if (g) {
    tape.record([a, b, out, m, k, n]() mutable {
      // dA = dC * B, dB = dC^T * A
      if (a.requires_grad()) gemm_nn(out.grad().data(), b.values().data(), a.grad().data(), m, n, k);
      if (b.requires_grad()) gemm_tn(out.grad().data(), a.values().data(), b.grad().data(), m, n, k);
    });
  }
  return out;
}

Tensor vecmat(Tape& tape, const Tensor& x, const Tensor& w) {
  require_rank(x, 1, "vecmat");
  require_rank(w, 2, "vecmat");
  const std::size_t k = x.dim(0), n = w.dim(1);
  if (w.dim(0) != k) mismatch("vecmat", x, w);
  const bool g = needs_grad(tape, {&x, &w});
  Tensor out({n}, g);
  gemm_nn(x.values().data(), w.values().data(), out.mutable_values().data(), 1, k, n);
  if (g) {
    tape.record([x, w, out, k, n]() mutable {
      if (x.requires_grad()) gemm_nt(out.grad().data(), w.values().data(), x.grad().data(), 1, n, k);
      if (w.requires_grad()) gemm_tn(x.values().data(), out.grad().data(), w.grad().data(), 1, k, n);
    });
  }
  return out;
}

Tensor matvec(Tape& tape, const Tensor& w, const Tensor& x) {
  require_rank(w, 2, "matvec");
  require_rank(x, 1, "matvec");
  const std::size_t m = w.dim(0), n = w.dim(1);
  if (x.dim(0) != n) mismatch("matvec", w, x);
  const bool g = needs_grad(tape, {&w, &x});
  Tensor out({m}, g);
  gemm_nt(w.values().data(), x.values().data(), out.mutable_values().data(), m, n, 1);
  if (g) {
    tape.record([w, x, out, m, n]() mutable {
      if (w.requires_grad()) gemm_nn(out.grad().data(), x.values().data(), w.grad().data(), m, 1, n);
      if (x.requires_grad()) gemm_tn(out.grad().data(), w.values().data(), x.grad().data(), m, 1, n);
    });
  }
  return out;
}

Tensor dot(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 1, "dot");
  require_rank(b, 1, "dot");
  if (a.size() != b.size()) mismatch("dot", a, b);
  const bool g = needs_grad(tape, {&a, &b});
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  Tensor out = Tensor::scalar(s, g);
  if (g) {
    tape.record([a, b, out]() mutable {
      const double d = out.grad()[0];
      if (a.requires_grad()) {
        for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += d * b[i];
      }
      if (b.requires_grad()) {
        for (std::size_t i = 0; i < b.size(); ++i) b.grad()[i] += d * a[i];
      }
    });
  }
  return out;
}

Tensor rowwise_dot(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "rowwise_dot");
  if (a.shape() != b.shape()) mismatch("rowwise_dot", a, b);
  const std::size_t m = a.dim(0), n = a.dim(1);
  const bool g = needs_grad(tape, {&a, &b});
  Tensor out({m}, g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * b[i * n + j];
    ov[i] = s;
  }
  if (g) {
    tape.record([a, b, out, m, n]() mutable {
      for (std::size_t i = 0; i < m; ++i) {
        const double d = out.grad()[i];
        for (std::size_t j = 0; j < n; ++j) {
          if (a.requires_grad()) a.grad()[i * n + j] += d * b[i * n + j];
          if (b.requires_grad()) b.grad()[i * n + j] += d * a[i * n + j];
        }
      }
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const bool g = needs_grad(tape, {&a});
  Tensor out({n, m}, g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) ov[j * m + i] = a[i * n + j];
  if (g) {
    tape.record([a, out, m, n]() mutable {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a.grad()[i * n + j] += out.grad()[j * m + i];
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("add", a, b);
  const bool g = needs_grad(tape, {&a, &b});
  Tensor out(a.shape(), g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < a.size(); ++i) ov[i] = a[i] + b[i];
  if (g) {
    tape.record([a, b, out]() mutable {
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (a.requires_grad()) a.grad()[i] += out.grad()[i];
        if (b.requires_grad()) b.grad()[i] += out.grad()[i];
      }
    });
  }
  return out;
}

Tensor add_row_bias(Tape& tape, const Tensor& a, const Tensor& bias) {
  require_rank(a, 2, "add_row_bias");
  require_rank(bias, 1, "add_row_bias");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (bias.size() != n) mismatch("add_row_bias", a, bias);
  const bool g = needs_grad(tape, {&a, &bias});
  Tensor out(a.shape(), g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) ov[i * n + j] = a[i * n + j] + bias[j];
  if (g) {
    tape.record([a, bias, out, m, n]() mutable {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double d = out.grad()[i * n + j];
          if (a.requires_grad()) a.grad()[i * n + j] += d;
          if (bias.requires_grad()) bias.grad()[j] += d;
        }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  const bool g = needs_grad(tape, {&a});
  Tensor out(a.shape(), g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < a.size(); ++i) ov[i] = a[i] * factor;
  if (g) {
    tape.record([a, out, factor]() mutable {
      for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += factor * out.grad()[i];
    });
  }
  return out;
}

Tensor apply_mask(Tape& tape, const Tensor& a, std::span<const double> mask) {
  if (mask.size() != a.size()) {
    throw DimensionError("apply_mask: mask of " + std::to_string(mask.size()) +
                         " values for tensor " + shape_string(a.shape()));
  }
  const bool g = needs_grad(tape, {&a});
  Tensor out(a.shape(), g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < a.size(); ++i) ov[i] = a[i] * mask[i];
  if (g) {
    std::vector<double> m(mask.begin(), mask.end());
    tape.record([a, out, m = std::move(m)]() mutable {
      for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += m[i] * out.grad()[i];
    });
  }
  return out;
}

Tensor tanh(Tape& tape, const Tensor& a) {
  const bool g = needs_grad(tape, {&a});
  Tensor out(a.shape(), g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < a.size(); ++i) ov[i] = std::tanh(a[i]);
  if (g) {
    tape.record([a, out]() mutable {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double y = out[i];
        a.grad()[i] += (1.0 - y * y) * out.grad()[i];
      }
    });
  }
  return out;
}

namespace {

void softmax_into(const double* in, double* out, std::size_t n) {
  double mx = in[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - mx);
    z += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

// dx_i = y_i (dy_i - sum_j y_j dy_j)
void softmax_backward(const double* y, const double* dy, double* dx, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += y[j] * dy[j];
  for (std::size_t i = 0; i < n; ++i) dx[i] += y[i] * (dy[i] - s);
}

}  // namespace

Tensor softmax(Tape& tape, const Tensor& logits) {
  require_rank(logits, 1, "softmax");
  const bool g = needs_grad(tape, {&logits});
  Tensor out(logits.shape(), g);
  softmax_into(logits.values().data(), out.mutable_values().data(), logits.size());
  if (g) {
    tape.record([logits, out]() mutable {
      softmax_backward(out.values().data(), out.grad().data(), logits.grad().data(), out.size());
    });
  }
  return out;
}

Tensor softmax_rows(Tape& tape, const Tensor& logits) {
  require_rank(logits, 2, "softmax_rows");
  const std::size_t m = logits.dim(0), n = logits.dim(1);
  const bool g = needs_grad(tape, {&logits});
  Tensor out(logits.shape(), g);
  for (std::size_t i = 0; i < m; ++i) {
    softmax_into(logits.values().data() + i * n, out.mutable_values().data() + i * n, n);
  }
  if (g) {
    tape.record([logits, out, m, n]() mutable {
      for (std::size_t i = 0; i < m; ++i) {
        softmax_backward(out.values().data() + i * n, out.grad().data() + i * n,
                         logits.grad().data() + i * n, n);
      }
    });
  }
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& logits, std::size_t target) {
  require_rank(logits, 1, "cross_entropy");
  const std::size_t n = logits.size();
  if (target >= n) {
    throw DomainError("cross_entropy: target " + std::to_string(target) + " outside [0, " +
                      std::to_string(n) + ")");
  }
  double mx = logits[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += std::exp(logits[i] - mx);
  const double log_z = std::log(z);
  const double lse = mx + log_z;
  const bool g = needs_grad(tape, {&logits});
  Tensor out = Tensor::scalar((mx - logits[target]) + log_z, g);
  if (g) {
    tape.record([logits, out, target, lse, n]() mutable {
      const double d = out.grad()[0];
      for (std::size_t i = 0; i < n; ++i) {
        const double p = std::exp(logits[i] - lse);
        logits.grad()[i] += d * (p - (i == target ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

Tensor concat(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw DomainError("concat: no inputs");
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_rank(p, 1, "concat");
    total += p.size();
  }
  const bool g = needs_grad(tape, parts);
  Tensor out({total}, g);
  auto ov = out.mutable_values();
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    std::copy(p.values().begin(), p.values().end(), ov.begin() + offset);
    offset += p.size();
  }
  if (g) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.record([inputs, out]() mutable {
      std::size_t off = 0;
      for (Tensor& p : inputs) {
        if (p.requires_grad()) {
          for (std::size_t i = 0; i < p.size(); ++i) p.grad()[i] += out.grad()[off + i];
        }
        off += p.size();
      }
    });
  }
  return out;
}

Tensor concat_cols(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw DomainError("concat_cols: no inputs");
  const std::size_t m = parts[0].rank() == 2 ? parts[0].dim(0) : 0;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != m) mismatch("concat_cols", parts[0], p);
    total += p.dim(1);
  }
  const bool g = needs_grad(tape, parts);
  Tensor out({m, total}, g);
  auto ov = out.mutable_values();
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t c = p.dim(1);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < c; ++j) ov[i * total + offset + j] = p[i * c + j];
    offset += c;
  }
  if (g) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.record([inputs, out, m, total]() mutable {
      std::size_t off = 0;
      for (Tensor& p : inputs) {
        const std::size_t c = p.dim(1);
        if (p.requires_grad()) {
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) p.grad()[i * c + j] += out.grad()[i * total + off + j];
        }
        off += c;
      }
    });
  }
  return out;
}

Tensor stack_rows(Tape& tape, std::span<const Tensor> rows) {
  if (rows.empty()) throw DomainError("stack_rows: no inputs");
  const std::size_t n = rows[0].size();
  for (const Tensor& r : rows) {
    require_rank(r, 1, "stack_rows");
    if (r.size() != n) mismatch("stack_rows", rows[0], r);
  }
  const std::size_t m = rows.size();
  const bool g = needs_grad(tape, rows);
  Tensor out({m, n}, g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < m; ++i) std::copy(rows[i].values().begin(), rows[i].values().end(), ov.begin() + i * n);
  if (g) {
    std::vector<Tensor> inputs(rows.begin(), rows.end());
    tape.record([inputs, out, n]() mutable {
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!inputs[i].requires_grad()) continue;
        for (std::size_t j = 0; j < n; ++j) inputs[i].grad()[j] += out.grad()[i * n + j];
      }
    });
  }
  return out;
}

Tensor gather_rows(Tape& tape, const Tensor& table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "gather_rows");
  if (ids.empty()) throw DomainError("gather_rows: no ids");
  const std::size_t rows = table.dim(0), n = table.dim(1);
  for (std::size_t id : ids) {
    if (id >= rows) {
      throw DomainError("gather_rows: id " + std::to_string(id) + " outside table " +
                        shape_string(table.shape()));
    }
  }
  const bool g = needs_grad(tape, {&table});
  Tensor out({ids.size(), n}, g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(table.values().begin() + ids[i] * n, n, ov.begin() + i * n);
  }
  if (g) {
    std::vector<std::size_t> idx(ids.begin(), ids.end());
    tape.record([table, out, idx = std::move(idx), n]() mutable {
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) table.grad()[idx[i] * n + j] += out.grad()[i * n + j];
    });
  }
  return out;
}

Tensor row(Tape& tape, const Tensor& a, std::size_t index) {
  require_rank(a, 2, "row");
  const std::size_t n = a.dim(1);
  if (index >= a.dim(0)) {
    throw DomainError("row: index " + std::to_string(index) + " outside " + shape_string(a.shape()));
  }
  const bool g = needs_grad(tape, {&a});
  Tensor out({n}, g);
  std::copy_n(a.values().begin() + index * n, n, out.mutable_values().begin());
  if (g) {
    tape.record([a, out, index, n]() mutable {
      for (std::size_t j = 0; j < n; ++j) a.grad()[index * n + j] += out.grad()[j];
    });
  }
  return out;
}

Tensor tile_rows(Tape& tape, const Tensor& v, std::size_t count) {
  require_rank(v, 1, "tile_rows");
  if (count == 0) throw DomainError("tile_rows: count must be positive");
  const std::size_t n = v.size();
  const bool g = needs_grad(tape, {&v});
  Tensor out({count, n}, g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < count; ++i) std::copy(v.values().begin(), v.values().end(), ov.begin() + i * n);
  if (g) {
    tape.record([v, out, count, n]() mutable {
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < n; ++j) v.grad()[j] += out.grad()[i * n + j];
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                         shape_string(shape));
  }
  const bool g = needs_grad(tape, {&a});
  Tensor out(std::move(shape), std::vector<double>(a.values().begin(), a.values().end()), g);
  if (g) {
    tape.record([a, out]() mutable {
      for (std::size_t i = 0; i < a.size(); ++i) a.grad()[i] += out.grad()[i];
    });
  }
  return out;
}

Tensor mean_rows(Tape& tape, const Tensor& a) {
  require_rank(a, 2, "mean_rows");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const bool g = needs_grad(tape, {&a});
  Tensor out({n}, g);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) ov[j] += a[i * n + j];
  for (std::size_t j = 0; j < n; ++j) ov[j] /= static_cast<double>(m);
  if (g) {
    tape.record([a, out, m, n]() mutable {
      const double inv = 1.0 / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a.grad()[i * n + j] += inv * out.grad()[j];
    });
  }
  return out;
}

Tensor max_rows(Tape& tape, const Tensor& a) {
  require_rank(a, 2, "max_rows");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const bool g = needs_grad(tape, {&a});
  Tensor out({n}, g);
  auto ov = out.mutable_values();
  std::vector<std::size_t> arg(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    double best = a[j];
    for (std::size_t i = 1; i < m; ++i) {
      if (a[i * n + j] > best) {
        best = a[i * n + j];
        arg[j] = i;
      }
    }
    ov[j] = best;
  }
  if (g) {
    tape.record([a, out, arg = std::move(arg), n]() mutable {
      for (std::size_t j = 0; j < n; ++j) a.grad()[arg[j] * n + j] += out.grad()[j];
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& a) {
  const bool g = needs_grad(tape, {&a});
  double s = 0.0;
  for (double v : a.values()) s += v;
  Tensor out = Tensor::scalar(s, g);
  if (g) {
    tape.record([a, out]() mutable {
      const double d = out.grad()[0];
      for (double& x : a.grad()) x += d;
    });
  }
  return out;
}

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& kernels, const Tensor& bias) {
  require_rank(x, 2, "conv1d");
  require_rank(kernels, 3, "conv1d");
  require_rank(bias, 1, "conv1d");
  const std::size_t len = x.dim(0), d = x.dim(1);
  const std::size_t m = kernels.dim(0), w = kernels.dim(1);
  if (kernels.dim(2) != d) mismatch("conv1d", x, kernels);
  if (bias.size() != m) mismatch("conv1d", kernels, bias);
  const long left = static_cast<long>((w - 1) / 2);
  const bool g = needs_grad(tape, {&x, &kernels, &bias});
  Tensor out({m, len}, g);
  auto ov = out.mutable_values();
  const double* xv = x.values().data();
  const double* kv = kernels.values().data();
  for (std::size_t f = 0; f < m; ++f) {
    for (std::size_t j = 0; j < len; ++j) {
      double s = bias[f];
      for (std::size_t o = 0; o < w; ++o) {
        const long pos = static_cast<long>(j) - left + static_cast<long>(o);
        if (pos < 0 || pos >= static_cast<long>(len)) continue;
        const double* xr = xv + static_cast<std::size_t>(pos) * d;
        const double* kr = kv + (f * w + o) * d;
        for (std::size_t c = 0; c < d; ++c) s += kr[c] * xr[c];
      }
      ov[f * len + j] = s;
    }
  }
  if (g) {
    tape.record([x, kernels, bias, out, len, d, m, w, left]() mutable {
      const bool gx = x.requires_grad(), gk = kernels.requires_grad(), gb = bias.requires_grad();
      for (std::size_t f = 0; f < m; ++f) {
        for (std::size_t j = 0; j < len; ++j) {
          const double dy = out.grad()[f * len + j];
          if (dy == 0.0) continue;
          if (gb) bias.grad()[f] += dy;
          for (std::size_t o = 0; o < w; ++o) {
            const long pos = static_cast<long>(j) - left + static_cast<long>(o);
            if (pos < 0 || pos >= static_cast<long>(len)) continue;
            const std::size_t xo = static_cast<std::size_t>(pos) * d;
            const std::size_t ko = (f * w + o) * d;
            for (std::size_t c = 0; c < d; ++c) {
              if (gk) kernels.grad()[ko + c] += dy * x[xo + c];
              if (gx) x.grad()[xo + c] += dy * kernels[ko + c];
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor segment_max_pool(Tape& tape, const Tensor& h, std::size_t cut1, std::size_t cut2) {
  require_rank(h, 2, "segment_max_pool");
  const std::size_t m = h.dim(0), len = h.dim(1);
  if (cut1 > cut2 || cut2 > len) {
    throw DomainError("segment_max_pool: cuts (" + std::to_string(cut1) + ", " +
                      std::to_string(cut2) + ") invalid for length " + std::to_string(len));
  }
  const std::size_t bounds[4] = {0, cut1, cut2, len};
  const bool g = needs_grad(tape, {&h});
  Tensor out({m, 3}, g);
  auto ov = out.mutable_values();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> arg(m * 3, kNone);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t s = 0; s < 3; ++s) {
      if (bounds[s] == bounds[s + 1]) continue;  // empty segment stays 0
      std::size_t best = bounds[s];
      for (std::size_t j = bounds[s] + 1; j < bounds[s + 1]; ++j) {
        if (h[i * len + j] > h[i * len + best]) best = j;
      }
      arg[i * 3 + s] = best;
      ov[i * 3 + s] = h[i * len + best];
    }
  }
  if (g) {
    tape.record([h, out, arg = std::move(arg), m, len]() mutable {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t s = 0; s < 3; ++s) {
          const std::size_t j = arg[i * 3 + s];
          if (j != kNone) h.grad()[i * len + j] += out.grad()[i * 3 + s];
        }
    });
  }
  return out;
}

}  // namespace dnnre::nk
