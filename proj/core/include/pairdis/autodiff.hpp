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

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairdis/tensor.hpp"

namespace pairdis::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Tensor::Shape& shape() const { return value().shape(); }
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// d(root)/d(node) for every node touched by the backward sweep.
class Gradients {
 public:
  /// Gradient with the shape of v; zeros when v is not on a path to the root.
  Tensor of(const Var& v) const;
  bool has(const Var& v) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
  std::vector<char> present_;
  std::vector<Tensor::Shape> shapes_;
};

/// Accumulates the parent gradients of one node. parent_grads[k] is null when
/// parent k does not require a gradient.
using BackwardFn =
    std::function<void(const Tensor& grad_out, std::span<Tensor* const> parent_grads)>;

/// Linear record of primitive operations, built per minibatch and discarded.
/// Nodes are appended in evaluation order, so reverse insertion order is a
/// reverse topological order. Single-threaded.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable leaf (a parameter or an input we want gradients for).
  Var variable(Tensor value);
  /// Leaf with no gradient.
  Var constant(Tensor value);

  /// Appends a node produced by op. Throws NumericError if value is not finite.
  /// The backward closure is dropped when no parent requires a gradient.
  Var record(std::string_view op, Tensor value, std::vector<Var> parents,
             BackwardFn backward);

  /// Reverse sweep from a scalar root. Throws ContractError otherwise.
  Gradients backward(const Var& root) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    Tensor value;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;
};

// Primitives. Every function records one node on the tape of its operands.

Var matmul(const Var& a, const Var& b);
/// Elementwise sum; b may also be a [n] bias broadcast over the rows of a [batch, n].
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var neg(const Var& a);
Var exp(const Var& a);
/// Natural log; throws DomainError on non-positive input.
Var log(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
/// log(1 + e^x) in overflow-free form.
Var softplus(const Var& a);
Var relu(const Var& a);
Var square(const Var& a);
/// Gradient passes inside [lo, hi] and is zero outside.
Var clamp(const Var& a, double lo, double hi);

/// Scalar sum / mean over every element.
Var sum(const Var& a);
Var mean(const Var& a);
/// [batch, n] -> [batch], summing each row.
Var sum_last(const Var& a);

Var concat_last(const Var& a, const Var& b);
/// Columns [begin, begin + count) of a [batch, n] tensor.
Var slice_last(const Var& a, std::size_t begin, std::size_t count);
/// Rows a[idx[k]] for each k; backward scatters and accumulates.
Var gather_rows(const Var& a, std::span<const std::size_t> idx);
/// ||a_k - b_k||^2 per row: [batch, d] x [batch, d] -> [batch].
Var sq_dist_rows(const Var& a, const Var& b);

/// Elementwise op given its value and derivative as functions of the input.
Var map_elementwise(const Var& a, std::string_view op, double (*f)(double),
                    double (*df)(double));

// Scalar kernels shared with non-taped code.
double stable_sigmoid(double x) noexcept;
double stable_softplus(double x) noexcept;

}  // namespace pairdis::ad
