/*
 * Copyright 2026 The pairdis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pairdis/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "pairdis/error.hpp"

namespace pairdis::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatrixMap(t.data().data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

MatrixMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatrixMap(t.data().data(), static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

Tape& same_tape(const Var& a, const Var& b, std::string_view op) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands live on different tapes");
  }
  return a.tape();
}

void require_same_shape(const Var& a, const Var& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_rank2(const Var& a, std::string_view op) {
  if (a.value().rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank 2, got " +
                         shape_string(a.shape()));
  }
}

void accumulate(Tensor* dst, const Tensor& src) {
  if (!dst) return;
  auto d = dst->data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

// Elementwise op where the local derivative depends on input x and output y.
template <typename Fwd, typename Deriv>
Var unary(const Var& a, std::string_view op, Fwd fwd, Deriv deriv) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return a.tape().record(op, std::move(y), {a},
                         [&x, deriv](const Tensor& g, std::span<Tensor* const> pg) {
                           if (!pg[0]) return;
                           auto d = pg[0]->data();
                           for (std::size_t i = 0; i < d.size(); ++i) {
                             d[i] += g[i] * deriv(x[i]);
                           }
                         });
}

}  // namespace

double stable_sigmoid(double x) noexcept {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// ---------------------------------------------------------------------------
// Var / Gradients / Tape

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("var: use of an unbound variable");
  return tape_->nodes_[id_].value;
}

bool Var::requires_grad() const { return tape_ && tape_->nodes_[id_].requires_grad; }

Tensor Gradients::of(const Var& v) const {
  if (v.id() < present_.size() && present_[v.id()]) return grads_[v.id()];
  return Tensor::zeros(v.shape());
}

bool Gradients::has(const Var& v) const {
  return v.id() < present_.size() && present_[v.id()];
}

Var Tape::variable(Tensor value) {
  if (!value.all_finite()) throw NumericError("variable: non-finite leaf value");
  nodes_.push_back(Node{std::move(value), {}, {}, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("constant: non-finite leaf value");
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Tensor value, std::vector<Var> parents,
                 BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + ": produced a non-finite value");
  }
  Node node;
  node.value = std::move(value);
  node.parents.reserve(parents.size());
  for (const Var& p : parents) {
    if (&p.tape() != this) throw ContractError(std::string(op) + ": foreign operand");
    node.parents.push_back(p.id());
    node.requires_grad = node.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(const Var& root) const {
  if (&root.tape() != this) throw ContractError("backward: root is on another tape");
  if (root.value().size() != 1) {
    throw ContractError("backward: root must be scalar, got shape " +
                        shape_string(root.shape()));
  }
  Gradients out;
  const std::size_t n = nodes_.size();
  out.grads_.resize(n);
  out.present_.assign(n, 0);

  auto ensure = [&](std::size_t id) -> Tensor* {
    if (!nodes_[id].requires_grad) return nullptr;
    if (!out.present_[id]) {
      out.grads_[id] = Tensor::zeros(nodes_[id].value.shape());
      out.present_[id] = 1;
    }
    return &out.grads_[id];
  };

  if (!nodes_[root.id()].requires_grad) return out;
  ensure(root.id())->data()[0] = 1.0;

  std::vector<Tensor*> parent_grads;
  for (std::size_t k = root.id() + 1; k-- > 0;) {
    const Node& node = nodes_[k];
    if (!out.present_[k] || !node.backward) continue;
    parent_grads.clear();
    for (std::size_t p : node.parents) parent_grads.push_back(ensure(p));
    node.backward(out.grads_[k], parent_grads);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Primitives

Var matmul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b, "matmul");
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(1);
  if (b.value().dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  Tensor y({m, n});
  as_matrix(y, m, n).noalias() = as_matrix(a.value(), m, k) * as_matrix(b.value(), k, n);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  return tape.record("matmul", std::move(y), {a, b},
                     [&av, &bv, m, k, n](const Tensor& g, std::span<Tensor* const> pg) {
                       const auto gm = as_matrix(g, m, n);
                       if (pg[0]) {
                         as_matrix(*pg[0], m, k).noalias() +=
                             gm * as_matrix(bv, k, n).transpose();
                       }
                       if (pg[1]) {
                         as_matrix(*pg[1], k, n).noalias() +=
                             as_matrix(av, m, k).transpose() * gm;
                       }
                     });
}

Var add(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b, "add");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() == bv.shape()) {
    Tensor y = av;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
    return tape.record("add", std::move(y), {a, b},
                       [](const Tensor& g, std::span<Tensor* const> pg) {
                         accumulate(pg[0], g);
                         accumulate(pg[1], g);
                       });
  }
  if (av.rank() == 2 && bv.rank() == 1 && av.dim(1) == bv.dim(0)) {
    const std::size_t rows = av.dim(0), cols = av.dim(1);
    Tensor y = av;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] += bv[c];
    return tape.record("add", std::move(y), {a, b},
                       [rows, cols](const Tensor& g, std::span<Tensor* const> pg) {
                         accumulate(pg[0], g);
                         if (pg[1]) {
                           auto d = pg[1]->data();
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t c = 0; c < cols; ++c) d[c] += g[r * cols + c];
                         }
                       });
  }
  throw DimensionError("add: cannot combine " + shape_string(av.shape()) + " and " +
                       shape_string(bv.shape()));
}

Var sub(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b, "sub");
  require_same_shape(a, b, "sub");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return tape.record("sub", std::move(y), {a, b},
                     [](const Tensor& g, std::span<Tensor* const> pg) {
                       accumulate(pg[0], g);
                       if (pg[1]) {
                         auto d = pg[1]->data();
                         for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i];
                       }
                     });
}

Var mul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return tape.record("mul", std::move(y), {a, b},
                     [&av, &bv](const Tensor& g, std::span<Tensor* const> pg) {
                       if (pg[0]) {
                         auto d = pg[0]->data();
                         for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * bv[i];
                       }
                       if (pg[1]) {
                         auto d = pg[1]->data();
                         for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * av[i];
                       }
                     });
}

Var scale(const Var& a, double factor) {
  Tensor y = a.value();
  for (double& v : y.data()) v *= factor;
  return a.tape().record("scale", std::move(y), {a},
                         [factor](const Tensor& g, std::span<Tensor* const> pg) {
                           if (!pg[0]) return;
                           auto d = pg[0]->data();
                           for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * g[i];
                         });
}

Var add_scalar(const Var& a, double offset) {
  Tensor y = a.value();
  for (double& v : y.data()) v += offset;
  return a.tape().record("add_scalar", std::move(y), {a},
                         [](const Tensor& g, std::span<Tensor* const> pg) {
                           accumulate(pg[0], g);
                         });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var exp(const Var& a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(const Var& a) {
  for (double v : a.value().data()) {
    if (!(v > 0.0)) throw DomainError("log: non-positive input");
  }
  return unary(
      a, "log", [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var sigmoid(const Var& a) {
  return unary(a, "sigmoid", stable_sigmoid, [](double x) {
    const double s = stable_sigmoid(x);
    return s * (1.0 - s);
  });
}

Var tanh(const Var& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

Var softplus(const Var& a) { return unary(a, "softplus", stable_softplus, stable_sigmoid); }

Var relu(const Var& a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var square(const Var& a) {
  return unary(
      a, "square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var clamp(const Var& a, double lo, double hi) {
  if (lo > hi) throw ContractError("clamp: lo > hi");
  return a.tape().record(
      "clamp",
      [&] {
        Tensor y = a.value();
        for (double& v : y.data()) v = std::clamp(v, lo, hi);
        return y;
      }(),
      {a},
      [&x = a.value(), lo, hi](const Tensor& g, std::span<Tensor* const> pg) {
        if (!pg[0]) return;
        auto d = pg[0]->data();
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (x[i] >= lo && x[i] <= hi) d[i] += g[i];
        }
      });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record("sum", Tensor::scalar(s), {a},
                         [](const Tensor& g, std::span<Tensor* const> pg) {
                           if (!pg[0]) return;
                           for (double& d : pg[0]->data()) d += g[0];
                         });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var sum_last(const Var& a) {
  require_rank2(a, "sum_last");
  const std::size_t rows = a.value().dim(0), cols = a.value().dim(1);
  Tensor y({rows});
  const Tensor& x = a.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += x[r * cols + c];
    y[r] = s;
  }
  return a.tape().record("sum_last", std::move(y), {a},
                         [rows, cols](const Tensor& g, std::span<Tensor* const> pg) {
                           if (!pg[0]) return;
                           auto d = pg[0]->data();
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += g[r];
                         });
}

Var concat_last(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b, "concat_last");
  require_rank2(a, "concat_last");
  require_rank2(b, "concat_last");
  const std::size_t rows = a.value().dim(0);
  if (b.value().dim(0) != rows) {
    throw DimensionError("concat_last: row counts differ " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
  const std::size_t ca = a.value().dim(1), cb = b.value().dim(1), c = ca + cb;
  Tensor y({rows, c});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < ca; ++j) y[r * c + j] = a.value()[r * ca + j];
    for (std::size_t j = 0; j < cb; ++j) y[r * c + ca + j] = b.value()[r * cb + j];
  }
  return tape.record("concat_last", std::move(y), {a, b},
                     [rows, ca, cb, c](const Tensor& g, std::span<Tensor* const> pg) {
                       for (std::size_t r = 0; r < rows; ++r) {
                         if (pg[0])
                           for (std::size_t j = 0; j < ca; ++j)
                             pg[0]->data()[r * ca + j] += g[r * c + j];
                         if (pg[1])
                           for (std::size_t j = 0; j < cb; ++j)
                             pg[1]->data()[r * cb + j] += g[r * c + ca + j];
                       }
                     });
}

Var slice_last(const Var& a, std::size_t begin, std::size_t count) {
  require_rank2(a, "slice_last");
  const std::size_t rows = a.value().dim(0), cols = a.value().dim(1);
  if (begin + count > cols) {
    throw DimensionError("slice_last: columns [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") exceed " + std::to_string(cols));
  }
  Tensor y({rows, count});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < count; ++j) y[r * count + j] = a.value()[r * cols + begin + j];
  return a.tape().record(
      "slice_last", std::move(y), {a},
      [rows, cols, begin, count](const Tensor& g, std::span<Tensor* const> pg) {
        if (!pg[0]) return;
        auto d = pg[0]->data();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < count; ++j) d[r * cols + begin + j] += g[r * count + j];
      });
}

Var gather_rows(const Var& a, std::span<const std::size_t> idx) {
  require_rank2(a, "gather_rows");
  const std::size_t rows = a.value().dim(0), cols = a.value().dim(1);
  std::vector<std::size_t> index(idx.begin(), idx.end());
  Tensor y({index.size(), cols});
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(index[k]) +
                           " out of range " + std::to_string(rows));
    }
    for (std::size_t c = 0; c < cols; ++c) y[k * cols + c] = a.value()[index[k] * cols + c];
  }
  return a.tape().record("gather_rows", std::move(y), {a},
                         [index = std::move(index), cols](const Tensor& g,
                                                          std::span<Tensor* const> pg) {
                           if (!pg[0]) return;
                           auto d = pg[0]->data();
                           for (std::size_t k = 0; k < index.size(); ++k)
                             for (std::size_t c = 0; c < cols; ++c)
                               d[index[k] * cols + c] += g[k * cols + c];
                         });
}

Var sq_dist_rows(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b, "sq_dist_rows");
  require_rank2(a, "sq_dist_rows");
  require_same_shape(a, b, "sq_dist_rows");
  const std::size_t rows = a.value().dim(0), cols = a.value().dim(1);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor y({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double diff = av[r * cols + c] - bv[r * cols + c];
      s += diff * diff;
    }
    y[r] = s;
  }
  return tape.record("sq_dist_rows", std::move(y), {a, b},
                     [&av, &bv, rows, cols](const Tensor& g, std::span<Tensor* const> pg) {
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < cols; ++c) {
                           const std::size_t i = r * cols + c;
                           const double d = 2.0 * (av[i] - bv[i]) * g[r];
                           if (pg[0]) pg[0]->data()[i] += d;
                           if (pg[1]) pg[1]->data()[i] -= d;
                         }
                       }
                     });
}

Var map_elementwise(const Var& a, std::string_view op, double (*f)(double),
                    double (*df)(double)) {
  return unary(a, op, f, df);
}

}  // namespace pairdis::ad
