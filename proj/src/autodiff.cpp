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

#include "taxo/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taxo/errors.hpp"
#include "taxo/kernels.hpp"

namespace taxo::ad {

std::string Shape::to_string() const {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape s, std::vector<T> v) : shape(s), values(std::move(v)) {
  if (values.size() != shape.size()) {
    throw ShapeError("tensor " + shape.to_string() + " given " + std::to_string(values.size()) +
                     " values");
  }
}

// --- ParameterStore -------------------------------------------------------

template <typename T>
ParamId ParameterStore<T>::add(std::string name, Tensor<T> init) {
  if (by_name_.contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  const ParamId id = params_.size();
  by_name_.emplace(name, id);
  Parameter<T> p;
  p.name = std::move(name);
  p.grad.assign(init.size(), T(0));
  p.momentum.assign(init.size(), T(0));
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return id;
}

template <typename T>
std::optional<ParamId> ParameterStore<T>::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

template <typename T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) {
    std::fill(p.grad.begin(), p.grad.end(), T(0));
    p.grad_ready = true;
  }
}

template <typename T>
void ParameterStore<T>::clear_grad_flags() {
  for (auto& p : params_) p.grad_ready = false;
}

template <typename T>
GradientBuffer<T>::GradientBuffer(const ParameterStore<T>& store) {
  grads_.reserve(store.size());
  for (const auto& p : store) grads_.emplace_back(p.value.size(), T(0));
}

template <typename T>
void GradientBuffer<T>::zero() {
  for (auto& g : grads_) std::fill(g.begin(), g.end(), T(0));
}

template <typename T>
void GradientBuffer<T>::add_into(ParameterStore<T>& store) const {
  for (ParamId i = 0; i < grads_.size(); ++i) {
    auto& p = store[i];
    if (!p.grad_ready) {
      std::fill(p.grad.begin(), p.grad.end(), T(0));
      p.grad_ready = true;
    }
    const auto& g = grads_[i];
    for (std::size_t k = 0; k < g.size(); ++k) p.grad[k] += g[k];
  }
}

// --- Tape bookkeeping -----------------------------------------------------

template <typename T>
Tape<T>::Tape(const ParameterStore<T>& params, GradientBuffer<T>* grads)
    : params_(&params), grads_(grads), param_nodes_(params.size(), UINT32_MAX) {}

template <typename T>
void Tape<T>::clear() {
  nodes_.clear();
  chunk_ = 0;
  used_ = 0;
  std::fill(param_nodes_.begin(), param_nodes_.end(), UINT32_MAX);
}

template <typename T>
T* Tape<T>::alloc(std::size_t n, T fill) {
  constexpr std::size_t kChunk = 1u << 16;
  if (chunks_.empty()) chunks_.emplace_back(std::max(n, kChunk));
  if (chunks_[chunk_].size() - used_ < n) {
    ++chunk_;
    used_ = 0;
    if (chunk_ == chunks_.size()) {
      chunks_.emplace_back(std::max(n, kChunk));
    } else if (chunks_[chunk_].size() < n) {
      chunks_[chunk_].assign(std::max(n, kChunk), T(0));
    }
  }
  T* p = chunks_[chunk_].data() + used_;
  used_ += n;
  std::fill(p, p + n, fill);
  return p;
}

template <typename T>
Var Tape<T>::push(Shape shape, const T* value, bool needs_grad) {
  if (nodes_.size() >= UINT32_MAX - 1) throw ShapeError("tape overflow");
  Node n;
  n.shape = shape;
  n.value = value;
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
void Tape<T>::expect_same(const char* op, Var a, Var b) const {
  if (node(a).shape != node(b).shape) {
    throw ShapeError(std::string(op) + ": " + node(a).shape.to_string() + " vs " +
                     node(b).shape.to_string());
  }
}

template <typename T>
Var Tape<T>::param(ParamId id) {
  if (id >= params_->size()) throw ConfigError("unknown parameter id");
  if (param_nodes_[id] != UINT32_MAX) return Var{param_nodes_[id]};
  const auto& p = (*params_)[id];
  Var v = push(p.value.shape, p.value.values.data(), grads_ != nullptr);
  if (grads_ != nullptr) {
    node(v).grad = (*grads_)[id].data();
    node(v).external_grad = true;
  }
  param_nodes_[id] = v.index;
  return v;
}

template <typename T>
Var Tape<T>::constant(std::span<const T> values, Shape shape) {
  if (values.size() != shape.size()) throw ShapeError("constant: size mismatch");
  T* buf = alloc(values.size());
  std::copy(values.begin(), values.end(), buf);
  return push(shape, buf, false);
}

template <typename T>
Var Tape<T>::variable(std::span<const T> values, Shape shape) {
  if (values.size() != shape.size()) throw ShapeError("variable: size mismatch");
  T* buf = alloc(values.size());
  std::copy(values.begin(), values.end(), buf);
  return push(shape, buf, true);
}

template <typename T>
std::span<const T> Tape<T>::value(Var v) const {
  const auto& n = node(v);
  return {n.value, n.shape.size()};
}

template <typename T>
std::vector<T> Tape<T>::copy(Var v) const {
  auto s = value(v);
  return {s.begin(), s.end()};
}

template <typename T>
T Tape<T>::item(Var v) const {
  const auto& n = node(v);
  if (n.shape.size() != 1) throw ShapeError("item: not a scalar " + n.shape.to_string());
  return n.value[0];
}

template <typename T>
std::span<const T> Tape<T>::grad(Var v) const {
  const auto& n = node(v);
  if (n.grad == nullptr) return {};
  return {n.grad, n.shape.size()};
}

template <typename T>
void Tape<T>::backward(Var loss) {
  if (node(loss).shape.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + node(loss).shape.to_string());
  }
  for (std::uint32_t i = 0; i <= loss.index; ++i) {
    auto& n = nodes_[i];
    if (n.needs_grad && !n.external_grad) n.grad = alloc(n.shape.size());
  }
  if (!node(loss).needs_grad) return;
  node(loss).grad[0] += T(1);
  for (std::uint32_t i = loss.index + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.needs_grad && n.back) n.back();
  }
}

// --- operations -----------------------------------------------------------

template <typename T>
Var Tape<T>::matvec(Var w, Var x) {
  const Shape ws = node(w).shape;
  const Shape xs = node(x).shape;
  if (xs.cols != 1 || ws.cols != xs.rows) {
    throw ShapeError("matvec: " + ws.to_string() + " * " + xs.to_string());
  }
  T* y = alloc(ws.rows);
  kernels::matvec(node(w).value, node(x).value, y, ws.rows, ws.cols, false);
  const bool ng = node(w).needs_grad || node(x).needs_grad;
  Var out = push(vec(ws.rows), y, ng);
  if (ng) {
    node(out).back = [this, w, x, out, ws] {
      const T* g = node(out).grad;
      if (node(w).needs_grad) kernels::outer_acc(g, node(x).value, node(w).grad, ws.rows, ws.cols);
      if (node(x).needs_grad) kernels::matvec_t_acc(node(w).value, g, node(x).grad, ws.rows, ws.cols);
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::linear(Var w, Var x, Var b) {
  Var y = matvec(w, x);
  return b.valid() ? add(y, b) : y;
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  expect_same("add", a, b);
  const std::size_t n = node(a).shape.size();
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = node(a).value[i] + node(b).value[i];
  const bool ng = node(a).needs_grad || node(b).needs_grad;
  Var out = push(node(a).shape, y, ng);
  if (ng) {
    node(out).back = [this, a, b, out, n] {
      const T* g = node(out).grad;
      if (node(a).needs_grad) for (std::size_t i = 0; i < n; ++i) node(a).grad[i] += g[i];
      if (node(b).needs_grad) for (std::size_t i = 0; i < n; ++i) node(b).grad[i] += g[i];
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::sub(Var a, Var b) {
  expect_same("sub", a, b);
  const std::size_t n = node(a).shape.size();
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = node(a).value[i] - node(b).value[i];
  const bool ng = node(a).needs_grad || node(b).needs_grad;
  Var out = push(node(a).shape, y, ng);
  if (ng) {
    node(out).back = [this, a, b, out, n] {
      const T* g = node(out).grad;
      if (node(a).needs_grad) for (std::size_t i = 0; i < n; ++i) node(a).grad[i] += g[i];
      if (node(b).needs_grad) for (std::size_t i = 0; i < n; ++i) node(b).grad[i] -= g[i];
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::mul(Var a, Var b) {
  expect_same("mul", a, b);
  const std::size_t n = node(a).shape.size();
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = node(a).value[i] * node(b).value[i];
  const bool ng = node(a).needs_grad || node(b).needs_grad;
  Var out = push(node(a).shape, y, ng);
  if (ng) {
    node(out).back = [this, a, b, out, n] {
      const T* g = node(out).grad;
      if (node(a).needs_grad) {
        for (std::size_t i = 0; i < n; ++i) node(a).grad[i] += g[i] * node(b).value[i];
      }
      if (node(b).needs_grad) {
        for (std::size_t i = 0; i < n; ++i) node(b).grad[i] += g[i] * node(a).value[i];
      }
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::scale(Var x, Var s) {
  if (node(s).shape.size() != 1) {
    throw ShapeError("scale: factor must be scalar, got " + node(s).shape.to_string());
  }
  const std::size_t n = node(x).shape.size();
  const T c = node(s).value[0];
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = node(x).value[i] * c;
  const bool ng = node(x).needs_grad || node(s).needs_grad;
  Var out = push(node(x).shape, y, ng);
  if (ng) {
    node(out).back = [this, x, s, out, n] {
      const T* g = node(out).grad;
      const T c = node(s).value[0];
      if (node(x).needs_grad) for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += g[i] * c;
      if (node(s).needs_grad) node(s).grad[0] += kernels::dot(g, node(x).value, n);
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::scale(Var x, T c) {
  const std::size_t n = node(x).shape.size();
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = node(x).value[i] * c;
  const bool ng = node(x).needs_grad;
  Var out = push(node(x).shape, y, ng);
  if (ng) {
    node(out).back = [this, x, out, n, c] {
      const T* g = node(out).grad;
      for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += g[i] * c;
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::one_minus(Var x) {
  const std::size_t n = node(x).shape.size();
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = T(1) - node(x).value[i];
  const bool ng = node(x).needs_grad;
  Var out = push(node(x).shape, y, ng);
  if (ng) {
    node(out).back = [this, x, out, n] {
      const T* g = node(out).grad;
      for (std::size_t i = 0; i < n; ++i) node(x).grad[i] -= g[i];
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::tanh(Var x) {
  const std::size_t n = node(x).shape.size();
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(node(x).value[i]);
  const bool ng = node(x).needs_grad;
  Var out = push(node(x).shape, y, ng);
  if (ng) {
    node(out).back = [this, x, out, n] {
      const T* g = node(out).grad;
      const T* y = node(out).value;
      for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += g[i] * (T(1) - y[i] * y[i]);
    };
  }
  return out;
}

namespace {
template <typename T>
T logistic(T v) {
  return v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
}
}  // namespace

template <typename T>
Var Tape<T>::sigmoid(Var x) {
  const std::size_t n = node(x).shape.size();
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = logistic(node(x).value[i]);
  const bool ng = node(x).needs_grad;
  Var out = push(node(x).shape, y, ng);
  if (ng) {
    node(out).back = [this, x, out, n] {
      const T* g = node(out).grad;
      const T* y = node(out).value;
      for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += g[i] * y[i] * (T(1) - y[i]);
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  std::size_t n = 0;
  bool ng = false;
  for (Var p : parts) {
    if (node(p).shape.cols != 1) throw ShapeError("concat: non-vector " + node(p).shape.to_string());
    n += node(p).shape.size();
    ng = ng || node(p).needs_grad;
  }
  T* y = alloc(n);
  std::size_t off = 0;
  for (Var p : parts) {
    const std::size_t k = node(p).shape.size();
    std::copy(node(p).value, node(p).value + k, y + off);
    off += k;
  }
  Var out = push(vec(n), y, ng);
  if (ng) {
    std::vector<Var> inputs(parts.begin(), parts.end());
    node(out).back = [this, inputs = std::move(inputs), out] {
      const T* g = node(out).grad;
      std::size_t off = 0;
      for (Var p : inputs) {
        const std::size_t k = node(p).shape.size();
        if (node(p).needs_grad) for (std::size_t i = 0; i < k; ++i) node(p).grad[i] += g[off + i];
        off += k;
      }
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::slice(Var x, std::size_t offset, std::size_t length) {
  if (offset + length > node(x).shape.size()) {
    throw ShapeError("slice: [" + std::to_string(offset) + "," + std::to_string(offset + length) +
                     ") of " + node(x).shape.to_string());
  }
  const bool ng = node(x).needs_grad;
  Var out = push(vec(length), node(x).value + offset, ng);
  if (ng) {
    node(out).back = [this, x, out, offset, length] {
      const T* g = node(out).grad;
      for (std::size_t i = 0; i < length; ++i) node(x).grad[offset + i] += g[i];
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::row(Var table, std::size_t r) {
  const Shape s = node(table).shape;
  if (r >= s.rows) {
    throw ShapeError("row: index " + std::to_string(r) + " of " + s.to_string());
  }
  const bool ng = node(table).needs_grad;
  Var out = push(vec(s.cols), node(table).value + r * s.cols, ng);
  if (ng) {
    node(out).back = [this, table, out, r, s] {
      const T* g = node(out).grad;
      T* dst = node(table).grad + r * s.cols;
      for (std::size_t i = 0; i < s.cols; ++i) dst[i] += g[i];
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::mean(std::span<const Var> xs) {
  if (xs.empty()) throw ShapeError("mean: no inputs");
  const Shape s = node(xs[0]).shape;
  bool ng = false;
  for (Var x : xs) {
    expect_same("mean", xs[0], x);
    ng = ng || node(x).needs_grad;
  }
  const std::size_t n = s.size();
  const T inv = T(1) / static_cast<T>(xs.size());
  T* y = alloc(n);
  for (Var x : xs) for (std::size_t i = 0; i < n; ++i) y[i] += node(x).value[i];
  for (std::size_t i = 0; i < n; ++i) y[i] *= inv;
  Var out = push(s, y, ng);
  if (ng) {
    std::vector<Var> inputs(xs.begin(), xs.end());
    node(out).back = [this, inputs = std::move(inputs), out, n, inv] {
      const T* g = node(out).grad;
      for (Var x : inputs) {
        if (node(x).needs_grad) for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += g[i] * inv;
      }
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::maximum(std::span<const Var> xs) {
  if (xs.empty()) throw ShapeError("maximum: no inputs");
  const Shape s = node(xs[0]).shape;
  bool ng = false;
  for (Var x : xs) {
    expect_same("maximum", xs[0], x);
    ng = ng || node(x).needs_grad;
  }
  const std::size_t n = s.size();
  T* y = alloc(n);
  std::vector<std::uint32_t> arg(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = node(xs[0]).value[i];
    for (std::uint32_t k = 1; k < xs.size(); ++k) {
      if (node(xs[k]).value[i] > y[i]) {
        y[i] = node(xs[k]).value[i];
        arg[i] = k;
      }
    }
  }
  Var out = push(s, y, ng);
  if (ng) {
    std::vector<Var> inputs(xs.begin(), xs.end());
    node(out).back = [this, inputs = std::move(inputs), arg = std::move(arg), out, n] {
      const T* g = node(out).grad;
      for (std::size_t i = 0; i < n; ++i) {
        Var x = inputs[arg[i]];
        if (node(x).needs_grad) node(x).grad[i] += g[i];
      }
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::weighted_sum(Var weights, std::span<const Var> xs) {
  if (xs.empty()) throw ShapeError("weighted_sum: no inputs");
  if (node(weights).shape.size() != xs.size()) {
    throw ShapeError("weighted_sum: " + node(weights).shape.to_string() + " weights for " +
                     std::to_string(xs.size()) + " inputs");
  }
  const Shape s = node(xs[0]).shape;
  bool ng = node(weights).needs_grad;
  for (Var x : xs) {
    expect_same("weighted_sum", xs[0], x);
    ng = ng || node(x).needs_grad;
  }
  const std::size_t n = s.size();
  T* y = alloc(n);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const T w = node(weights).value[k];
    for (std::size_t i = 0; i < n; ++i) y[i] += w * node(xs[k]).value[i];
  }
  Var out = push(s, y, ng);
  if (ng) {
    std::vector<Var> inputs(xs.begin(), xs.end());
    node(out).back = [this, weights, inputs = std::move(inputs), out, n] {
      const T* g = node(out).grad;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        Var x = inputs[k];
        if (node(weights).needs_grad) node(weights).grad[k] += kernels::dot(g, node(x).value, n);
        if (node(x).needs_grad) {
          const T w = node(weights).value[k];
          for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += w * g[i];
        }
      }
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::softmax(Var x) {
  const std::size_t n = node(x).shape.size();
  if (n == 0) throw ShapeError("softmax: empty input");
  const T* v = node(x).value;
  const T mx = *std::max_element(v, v + n);
  T* y = alloc(n);
  T total = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::exp(v[i] - mx);
    total += y[i];
  }
  for (std::size_t i = 0; i < n; ++i) y[i] /= total;
  const bool ng = node(x).needs_grad;
  Var out = push(node(x).shape, y, ng);
  if (ng) {
    node(out).back = [this, x, out, n] {
      const T* g = node(out).grad;
      const T* y = node(out).value;
      const T gy = kernels::dot(g, y, n);
      for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += y[i] * (g[i] - gy);
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::dot(Var a, Var b) {
  expect_same("dot", a, b);
  const std::size_t n = node(a).shape.size();
  T* y = alloc(1);
  y[0] = kernels::dot(node(a).value, node(b).value, n);
  const bool ng = node(a).needs_grad || node(b).needs_grad;
  Var out = push(vec(1), y, ng);
  if (ng) {
    node(out).back = [this, a, b, out, n] {
      const T g = node(out).grad[0];
      if (node(a).needs_grad) for (std::size_t i = 0; i < n; ++i) node(a).grad[i] += g * node(b).value[i];
      if (node(b).needs_grad) for (std::size_t i = 0; i < n; ++i) node(b).grad[i] += g * node(a).value[i];
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::sum(std::span<const Var> scalars) {
  T* y = alloc(1);
  bool ng = false;
  for (Var s : scalars) {
    if (node(s).shape.size() != 1) throw ShapeError("sum: non-scalar " + node(s).shape.to_string());
    y[0] += node(s).value[0];
    ng = ng || node(s).needs_grad;
  }
  Var out = push(vec(1), y, ng);
  if (ng) {
    std::vector<Var> inputs(scalars.begin(), scalars.end());
    node(out).back = [this, inputs = std::move(inputs), out] {
      const T g = node(out).grad[0];
      for (Var s : inputs) {
        if (node(s).needs_grad) node(s).grad[0] += g;
      }
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::nll_softmax(Var logits, std::size_t target) {
  const std::size_t n = node(logits).shape.size();
  if (target >= n) {
    throw ShapeError("nll_softmax: target " + std::to_string(target) + " of " +
                     node(logits).shape.to_string());
  }
  const T* v = node(logits).value;
  const T mx = *std::max_element(v, v + n);
  T total = T(0);
  for (std::size_t i = 0; i < n; ++i) total += std::exp(v[i] - mx);
  const T lse = mx + std::log(total);
  T* y = alloc(1);
  y[0] = lse - v[target];
  const bool ng = node(logits).needs_grad;
  Var out = push(vec(1), y, ng);
  if (ng) {
    node(out).back = [this, logits, out, n, target, lse] {
      const T g = node(out).grad[0];
      const T* v = node(logits).value;
      T* d = node(logits).grad;
      for (std::size_t i = 0; i < n; ++i) d[i] += g * std::exp(v[i] - lse);
      d[target] -= g;
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::binary_cross_entropy(Var p, int y) {
  if (node(p).shape.size() != 1) {
    throw ShapeError("binary_cross_entropy: non-scalar " + node(p).shape.to_string());
  }
  constexpr T kLo = T(1e-7);
  constexpr T kHi = T(1) - T(1e-7);
  const T raw = node(p).value[0];
  const T q = std::clamp(raw, kLo, kHi);
  const T label = y ? T(1) : T(0);
  T* out_v = alloc(1);
  out_v[0] = -(label * std::log(q) + (T(1) - label) * std::log(T(1) - q));
  const bool ng = node(p).needs_grad;
  Var out = push(vec(1), out_v, ng);
  if (ng) {
    const bool clamped = raw < kLo || raw > kHi;
    node(out).back = [this, p, out, q, label, clamped] {
      if (clamped) return;
      node(p).grad[0] += node(out).grad[0] * (-label / q + (T(1) - label) / (T(1) - q));
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::dropout(Var x, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const std::size_t n = node(x).shape.size();
  const T keep_scale = T(1) / static_cast<T>(1.0 - rate);
  T* mask = alloc(n);
  T* y = alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = rng.bernoulli(rate) ? T(0) : keep_scale;
    y[i] = node(x).value[i] * mask[i];
  }
  const bool ng = node(x).needs_grad;
  Var out = push(node(x).shape, y, ng);
  if (ng) {
    node(out).back = [this, x, out, n, mask] {
      const T* g = node(out).grad;
      for (std::size_t i = 0; i < n; ++i) node(x).grad[i] += g[i] * mask[i];
    };
  }
  return out;
}

template <typename T>
Var Tape<T>::gru_cell(Var x, Var h, Var wi, Var wh, Var bi, Var bh) {
  const std::size_t in = node(x).shape.size();
  const std::size_t hid = node(h).shape.size();
  const std::size_t g3 = 3 * hid;
  if (node(wi).shape != Shape{g3, in} || node(wh).shape != Shape{g3, hid} ||
      node(bi).shape.size() != g3 || node(bh).shape.size() != g3) {
    throw ShapeError("gru_cell: x" + node(x).shape.to_string() + " h" + node(h).shape.to_string() +
                     " wi" + node(wi).shape.to_string() + " wh" + node(wh).shape.to_string() +
                     " bi" + node(bi).shape.to_string() + " bh" + node(bh).shape.to_string());
  }
  // saved: gi (3H) gh (3H) r z n
  T* gi = alloc(g3);
  T* gh = alloc(g3);
  kernels::matvec(node(wi).value, node(x).value, gi, g3, in, false);
  kernels::matvec(node(wh).value, node(h).value, gh, g3, hid, false);
  for (std::size_t i = 0; i < g3; ++i) {
    gi[i] += node(bi).value[i];
    gh[i] += node(bh).value[i];
  }
  T* r = alloc(hid);
  T* z = alloc(hid);
  T* nn = alloc(hid);
  T* y = alloc(hid);
  const T* hv = node(h).value;
  for (std::size_t k = 0; k < hid; ++k) {
    r[k] = logistic(gi[k] + gh[k]);
    z[k] = logistic(gi[hid + k] + gh[hid + k]);
    nn[k] = std::tanh(gi[2 * hid + k] + r[k] * gh[2 * hid + k]);
    y[k] = (T(1) - z[k]) * nn[k] + z[k] * hv[k];
  }
  const bool ng = node(x).needs_grad || node(h).needs_grad || node(wi).needs_grad ||
                  node(wh).needs_grad || node(bi).needs_grad || node(bh).needs_grad;
  Var out = push(vec(hid), y, ng);
  if (ng) {
    node(out).back = [this, x, h, wi, wh, bi, bh, out, in, hid, gh, r, z, nn] {
      const std::size_t g3 = 3 * hid;
      const T* g = node(out).grad;
      const T* hv = node(h).value;
      std::vector<T> dgi(g3), dgh(g3);
      for (std::size_t k = 0; k < hid; ++k) {
        const T dn = g[k] * (T(1) - z[k]);
        const T dz = g[k] * (hv[k] - nn[k]);
        const T dn_pre = dn * (T(1) - nn[k] * nn[k]);
        const T dr = dn_pre * gh[2 * hid + k];
        const T dr_pre = dr * r[k] * (T(1) - r[k]);
        const T dz_pre = dz * z[k] * (T(1) - z[k]);
        dgi[k] = dr_pre;
        dgh[k] = dr_pre;
        dgi[hid + k] = dz_pre;
        dgh[hid + k] = dz_pre;
        dgi[2 * hid + k] = dn_pre;
        dgh[2 * hid + k] = dn_pre * r[k];
      }
      if (node(h).needs_grad) {
        T* dh = node(h).grad;
        for (std::size_t k = 0; k < hid; ++k) dh[k] += g[k] * z[k];
        kernels::matvec_t_acc(node(wh).value, dgh.data(), dh, g3, hid);
      }
      if (node(x).needs_grad) kernels::matvec_t_acc(node(wi).value, dgi.data(), node(x).grad, g3, in);
      if (node(wi).needs_grad) kernels::outer_acc(dgi.data(), node(x).value, node(wi).grad, g3, in);
      if (node(wh).needs_grad) kernels::outer_acc(dgh.data(), hv, node(wh).grad, g3, hid);
      if (node(bi).needs_grad) for (std::size_t i = 0; i < g3; ++i) node(bi).grad[i] += dgi[i];
      if (node(bh).needs_grad) for (std::size_t i = 0; i < g3; ++i) node(bh).grad[i] += dgh[i];
    };
  }
  return out;
}

template struct Tensor<float>;
template struct Tensor<double>;
template class ParameterStore<float>;
template class ParameterStore<double>;
template class GradientBuffer<float>;
template class GradientBuffer<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace taxo::ad
