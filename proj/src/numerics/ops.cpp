#include "graphite/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphite/errors.hpp"

namespace graphite::num::ops {

namespace {

using NodePtr = std::shared_ptr<Node>;

Var record(const char* op, Tensor value, std::vector<NodePtr> inputs,
           std::function<void(Node&)> backward_fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite output in ") + op);
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  const bool needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                      [](const NodePtr& n) { return n->requires_grad; });
  if (needs_grad) {
    node->requires_grad = true;
    node->is_leaf = false;
    node->inputs = std::move(inputs);
    node->backward_fn = std::move(backward_fn);
  }
  return Var(std::move(node));
}

[[noreturn]] void shape_error(const char* op, const Var& a, const Var& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) +
                       " and " + to_string(b.shape()));
}

void require_rank2(const char* op, const Var& a) {
  if (a.value().rank() != 2) {
    throw DimensionError(std::string(op) + " needs a matrix, got shape " + to_string(a.shape()));
  }
}

void require_square(const char* op, const Var& a) {
  require_rank2(op, a);
  if (a.value().rows() != a.value().cols()) {
    throw DimensionError(std::string(op) + " needs a square matrix, got " + to_string(a.shape()));
  }
}

// How the second operand of an elementwise op lines up with the first.
enum class Broadcast { kSame, kRow, kScalar };

Broadcast broadcast_mode(const char* op, const Var& a, const Var& b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.shape() == y.shape()) return Broadcast::kSame;
  if (y.size() == 1) return Broadcast::kScalar;
  if (y.rows() == 1 && y.cols() == x.cols()) return Broadcast::kRow;
  shape_error(op, a, b);
}

inline std::size_t b_index(Broadcast mode, std::size_t i, std::size_t cols) {
  switch (mode) {
    case Broadcast::kSame: return i;
    case Broadcast::kRow: return i % cols;
    case Broadcast::kScalar: return 0;
  }
  return 0;
}

// Elementwise binary op given forward f(x, y) and partials df/dx, df/dy.
template <typename F, typename Dx, typename Dy>
Var binary(const char* op, const Var& a, const Var& b, F f, Dx dfdx, Dy dfdy) {
  const Broadcast mode = broadcast_mode(op, a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const std::size_t cols = x.cols();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i], y[b_index(mode, i, cols)]);
  return record(op, std::move(out), {a.node(), b.node()},
                [mode, cols, dfdx, dfdy](Node& self) {
                  Node& na = *self.inputs[0];
                  Node& nb = *self.inputs[1];
                  const Tensor& x = na.value;
                  const Tensor& y = nb.value;
                  for (std::size_t i = 0; i < x.size(); ++i) {
                    const std::size_t j = b_index(mode, i, cols);
                    const double g = self.grad[i];
                    if (na.requires_grad) na.grad[i] += g * dfdx(x[i], y[j]);
                    if (nb.requires_grad) nb.grad[j] += g * dfdy(x[i], y[j]);
                  }
                });
}

template <typename F, typename D>
Var unary(const char* op, const Var& a, F f, D dfdx_from_xy) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return record(op, std::move(out), {a.node()}, [dfdx_from_xy](Node& self) {
    Node& na = *self.inputs[0];
    for (std::size_t i = 0; i < na.value.size(); ++i) {
      na.grad[i] += self.grad[i] * dfdx_from_xy(na.value[i], self.value[i]);
    }
  });
}

// c(m x n) += a(m x k) * b(k x n)
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c(m x k) += g(m x n) * b(k x n)^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      c[i * k + p] += acc;
    }
  }
}

// c(k x n) += a(m x k)^T * g(m x n)
void gemm_tn(const double* a, const double* g, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * gi[j];
    }
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  const std::size_t m = a.value().rows();
  const std::size_t k = a.value().cols();
  const std::size_t n = b.value().cols();
  if (b.value().rows() != k) shape_error("matmul", a, b);
  Tensor out({m, n});
  gemm_nn(a.value().data().data(), b.value().data().data(), out.data().data(), m, k, n);
  return record("matmul", std::move(out), {a.node(), b.node()}, [m, k, n](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    const double* g = self.grad.data().data();
    if (na.requires_grad) gemm_nt(g, nb.value.data().data(), na.grad.data().data(), m, k, n);
    if (nb.requires_grad) gemm_tn(na.value.data().data(), g, nb.grad.data().data(), m, k, n);
  });
}

Var add(const Var& a, const Var& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var div(const Var& a, const Var& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; }, [](double x, double y) { return -x / (y * y); });
}

Var scale(const Var& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var relu(const Var& a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var exp(const Var& a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var softmax(const Var& a) {
  const Tensor& x = a.value();
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    const double hi = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - hi);
      total += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return record("softmax", std::move(out), {a.node()}, [rows, cols](Node& self) {
    Node& na = *self.inputs[0];
    for (std::size_t r = 0; r < rows; ++r) {
      auto y = self.value.row(r);
      auto g = self.grad.row(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[c] * y[c];
      auto dx = na.grad.row(r);
      for (std::size_t c = 0; c < cols; ++c) dx[c] += y[c] * (g[c] - dot);
    }
  });
}

Var concat(const Var& a, const Var& b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rank() != y.rank() || x.rows() != y.rows()) shape_error("concat", a, b);
  const std::size_t rows = x.rows();
  const std::size_t ca = x.cols();
  const std::size_t cb = y.cols();
  Shape shape = x.shape();
  shape.back() = ca + cb;
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(x.row(r).begin(), x.row(r).end(), out.row(r).begin());
    std::copy(y.row(r).begin(), y.row(r).end(), out.row(r).begin() + ca);
  }
  return record("concat", std::move(out), {a.node(), b.node()}, [rows, ca, cb](Node& self) {
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    for (std::size_t r = 0; r < rows; ++r) {
      auto g = self.grad.row(r);
      if (na.requires_grad) {
        auto d = na.grad.row(r);
        for (std::size_t c = 0; c < ca; ++c) d[c] += g[c];
      }
      if (nb.requires_grad) {
        auto d = nb.grad.row(r);
        for (std::size_t c = 0; c < cb; ++c) d[c] += g[ca + c];
      }
    }
  });
}

Var sum(const Var& a, std::size_t axis) {
  const Tensor& x = a.value();
  if (axis >= x.rank()) {
    throw DimensionError("sum: axis " + std::to_string(axis) + " out of range for shape " +
                         to_string(x.shape()));
  }
  if (x.rank() == 1) return sum_all(a);
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  Tensor out(axis == 0 ? Shape{1, cols} : Shape{rows, 1});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[axis == 0 ? c : r] += x.at(r, c);
  }
  return record("sum", std::move(out), {a.node()}, [axis, rows, cols](Node& self) {
    Node& na = *self.inputs[0];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) na.grad.at(r, c) += self.grad[axis == 0 ? c : r];
    }
  });
}

Var sum_all(const Var& a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return record("sum_all", Tensor::scalar(total), {a.node()}, [](Node& self) {
    Node& na = *self.inputs[0];
    const double g = self.grad[0];
    for (double& d : na.grad.data()) d += g;
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return record("mean", Tensor::scalar(total / n), {a.node()}, [n](Node& self) {
    Node& na = *self.inputs[0];
    const double g = self.grad[0] / n;
    for (double& d : na.grad.data()) d += g;
  });
}

Var squared_difference(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) shape_error("squared_difference", a, b);
  return binary(
      "squared_difference", a, b,
      [](double x, double y) { return (x - y) * (x - y); },
      [](double x, double y) { return 2.0 * (x - y); },
      [](double x, double y) { return -2.0 * (x - y); });
}

Var trace(const Var& a) {
  require_square("trace", a);
  const std::size_t n = a.value().rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += a.value().at(i, i);
  return record("trace", Tensor::scalar(total), {a.node()}, [n](Node& self) {
    Node& na = *self.inputs[0];
    for (std::size_t i = 0; i < n; ++i) na.grad.at(i, i) += self.grad[0];
  });
}

Var transpose(const Var& a) {
  require_rank2("transpose", a);
  const std::size_t rows = a.value().rows();
  const std::size_t cols = a.value().cols();
  Tensor out({cols, rows});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out.at(c, r) = a.value().at(r, c);
  }
  return record("transpose", std::move(out), {a.node()}, [rows, cols](Node& self) {
    Node& na = *self.inputs[0];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) na.grad.at(r, c) += self.grad.at(c, r);
    }
  });
}

Var frobenius_norm(const Var& a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v * v;
  const double norm = std::sqrt(total);
  return record("frobenius_norm", Tensor::scalar(norm), {a.node()}, [norm](Node& self) {
    if (norm == 0.0) return;
    Node& na = *self.inputs[0];
    const double g = self.grad[0] / norm;
    for (std::size_t i = 0; i < na.value.size(); ++i) na.grad[i] += g * na.value[i];
  });
}

Var gather_sum(const Var& a, const IndexGroups& groups) {
  const Tensor& x = a.value();
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  if (groups.empty()) throw DimensionError("gather_sum: no output rows requested");
  for (const auto& group : groups) {
    for (std::size_t idx : group) {
      if (idx >= rows) {
        throw DimensionError("gather_sum: row index " + std::to_string(idx) +
                             " out of range for " + to_string(x.shape()));
      }
    }
  }
  Tensor out({groups.size(), cols});
  for (std::size_t j = 0; j < groups.size(); ++j) {
    auto o = out.row(j);
    for (std::size_t idx : groups[j]) {
      auto in = x.row(idx);
      for (std::size_t c = 0; c < cols; ++c) o[c] += in[c];
    }
  }
  return record("gather_sum", std::move(out), {a.node()}, [groups, cols](Node& self) {
    Node& na = *self.inputs[0];
    for (std::size_t j = 0; j < groups.size(); ++j) {
      auto g = self.grad.row(j);
      for (std::size_t idx : groups[j]) {
        auto d = na.grad.row(idx);
        for (std::size_t c = 0; c < cols; ++c) d[c] += g[c];
      }
    }
  });
}

Var pairwise_squared_distances(const Var& x) {
  const Tensor& v = x.value();
  const std::size_t n = v.rows();
  const std::size_t d = v.cols();
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = v.at(i, k) - v.at(j, k);
        acc += diff * diff;
      }
      out.at(i, j) = acc;
      out.at(j, i) = acc;
    }
  }
  return record("pairwise_squared_distances", std::move(out), {x.node()}, [n, d](Node& self) {
    Node& nx = *self.inputs[0];
    const Tensor& v = nx.value;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = 2.0 * (self.grad.at(i, j) + self.grad.at(j, i));
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = w * (v.at(i, k) - v.at(j, k));
          nx.grad.at(i, k) += diff;
          nx.grad.at(j, k) -= diff;
        }
      }
    }
  });
}

namespace {

// out = H m H, written into `out` (may not alias m).
void center_into(const Tensor& m, Tensor& out) {
  const std::size_t n = m.rows();
  std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m.at(i, j);
      row_mean[i] += v;
      col_mean[j] += v;
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    grand += row_mean[i];
    row_mean[i] *= inv;
    col_mean[i] *= inv;
  }
  grand *= inv * inv;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = m.at(i, j) - row_mean[i] - col_mean[j] + grand;
    }
  }
}

}  // namespace

Var double_center(const Var& k) {
  require_square("double_center", k);
  Tensor out(k.shape());
  center_into(k.value(), out);
  return record("double_center", std::move(out), {k.node()}, [](Node& self) {
    Node& nk = *self.inputs[0];
    // H is symmetric, so the adjoint of K -> HKH is G -> HGH.
    Tensor centered(self.grad.shape());
    center_into(self.grad, centered);
    for (std::size_t i = 0; i < centered.size(); ++i) nk.grad[i] += centered[i];
  });
}

}  // namespace graphite::num::ops
