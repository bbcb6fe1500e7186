// Copyright 2026 The Taxocomp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "taxo/rng.hpp"

// A small reverse-mode differentiation engine over dense vectors and
// matrices. Computations are recorded on a Tape; Tape::backward walks the
// records in reverse and accumulates gradients. Parameters live in a
// ParameterStore and are referenced, never copied, by the tape.
namespace taxo::ad {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
  std::string to_string() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline Shape vec(std::size_t n) { return {n, 1}; }

template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(Shape s, T fill = T(0)) : shape(s), values(s.size(), fill) {}
  Tensor(Shape s, std::vector<T> v);

  std::size_t size() const { return values.size(); }
  T& at(std::size_t r, std::size_t c) { return values[r * shape.cols + c]; }
  const T& at(std::size_t r, std::size_t c) const { return values[r * shape.cols + c]; }
};

using ParamId = std::size_t;

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  std::vector<T> grad;
  std::vector<T> momentum;
  bool grad_ready = false;
};

// Named trainable tensors plus their optimizer slots.
template <typename T>
class ParameterStore {
 public:
  // Throws ConfigError on a duplicate name.
  ParamId add(std::string name, Tensor<T> init);

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](ParamId id) { return params_[id]; }
  const Parameter<T>& operator[](ParamId id) const { return params_[id]; }
  std::optional<ParamId> find(const std::string& name) const;
  std::size_t scalar_count() const;

  // Zeroes gradients and marks them populated.
  void zero_grad();
  void clear_grad_flags();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter<T>> params_;
  std::unordered_map<std::string, ParamId> by_name_;
};

// Per-worker gradient accumulators shaped like a ParameterStore.
template <typename T>
class GradientBuffer {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(const ParameterStore<T>& store);
  void zero();
  std::vector<T>& operator[](ParamId id) { return grads_[id]; }
  const std::vector<T>& operator[](ParamId id) const { return grads_[id]; }
  std::size_t size() const { return grads_.size(); }

  // Adds into store gradients and marks them populated.
  void add_into(ParameterStore<T>& store) const;

 private:
  std::vector<std::vector<T>> grads_;
};

struct Var {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
};

template <typename T>
class Tape {
 public:
  // Without a gradient buffer parameters are treated as constants.
  explicit Tape(const ParameterStore<T>& params, GradientBuffer<T>* grads = nullptr);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void clear();
  std::size_t node_count() const { return nodes_.size(); }

  Var param(ParamId id);
  Var constant(std::span<const T> values, Shape shape);
  Var constant(std::span<const T> values) { return constant(values, vec(values.size())); }
  Var constant(std::initializer_list<T> values) {
    return constant(std::span<const T>(values.begin(), values.size()));
  }
  // Leaf whose gradient is tracked; used by gradient checks on inputs.
  Var variable(std::span<const T> values, Shape shape);

  Shape shape(Var v) const { return nodes_.at(v.index).shape; }
  std::span<const T> value(Var v) const;
  std::vector<T> copy(Var v) const;
  T item(Var v) const;
  // Empty span when the node carries no gradient.
  std::span<const T> grad(Var v) const;

  // d(loss)/d(node) for every recorded node; loss must be a scalar.
  void backward(Var loss);

  // --- operations ---------------------------------------------------------
  Var matvec(Var w, Var x);
  // w x + b; b may be an invalid Var.
  Var linear(Var w, Var x, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, Var s);  // s is a scalar node
  Var scale(Var x, T c);
  Var one_minus(Var x);
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts) {
    return concat(std::span<const Var>(parts.begin(), parts.size()));
  }
  Var slice(Var x, std::size_t offset, std::size_t length);
  // Row r of a matrix, as a vector.
  Var row(Var table, std::size_t r);
  Var mean(std::span<const Var> xs);
  Var maximum(std::span<const Var> xs);
  Var weighted_sum(Var weights, std::span<const Var> xs);
  Var softmax(Var x);
  Var dot(Var a, Var b);
  Var sum(std::span<const Var> scalars);
  Var sum(std::initializer_list<Var> scalars) {
    return sum(std::span<const Var>(scalars.begin(), scalars.size()));
  }
  // -log softmax(logits)[target]
  Var nll_softmax(Var logits, std::size_t target);
  // -(y log p + (1 - y) log(1 - p)) with p clamped to [1e-7, 1 - 1e-7].
  Var binary_cross_entropy(Var p, int y);
  // Zeroes each element with probability `rate` and scales survivors by
  // 1 / (1 - rate). Identity for rate 0.
  Var dropout(Var x, double rate, Rng& rng);
  // One GRU step. wi: 3H x I, wh: 3H x H, bi / bh: 3H; gate order r, z, n.
  Var gru_cell(Var x, Var h, Var wi, Var wh, Var bi, Var bh);

 private:
  struct Node {
    Shape shape;
    const T* value = nullptr;
    T* grad = nullptr;
    bool needs_grad = false;
    bool external_grad = false;
    std::function<void()> back;
  };

  T* alloc(std::size_t n, T fill = T(0));
  Var push(Shape shape, const T* value, bool needs_grad);
  Node& node(Var v) { return nodes_.at(v.index); }
  const Node& node(Var v) const { return nodes_.at(v.index); }
  void expect_same(const char* op, Var a, Var b) const;

  const ParameterStore<T>* params_;
  GradientBuffer<T>* grads_;
  std::vector<Node> nodes_;
  // Bump allocator; chunks are reused across clear().
  std::vector<std::vector<T>> chunks_;
  std::size_t chunk_ = 0;
  std::size_t used_ = 0;
  std::vector<std::uint32_t> param_nodes_;
};

}  // namespace taxo::ad
