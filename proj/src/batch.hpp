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

#include <algorithm>
#include <cstddef>
#include <exception>
#include <vector>

#include "taxo/autodiff.hpp"

#ifdef TAXO_HAVE_OPENMP
#include <omp.h>
#endif

namespace taxo::detail {

// Work is cut into at most kMaxShards fixed shards (item i goes to shard
// i mod S) and shard buffers are summed in shard order, so gradients do not
// depend on the number of threads.
inline constexpr std::size_t kMaxShards = 8;

template <typename T>
class ShardedGradients {
 public:
  explicit ShardedGradients(const ad::ParameterStore<T>& store)
      : buffers_(kMaxShards, ad::GradientBuffer<T>(store)) {}

  // fn(tape, i) returns the scalar loss of item i. Fills store gradients
  // with the sum over items and returns each item's loss value.
  template <typename F>
  std::vector<double> run(ad::ParameterStore<T>& store, std::size_t n, F&& fn, bool parallel) {
    std::vector<double> losses(n, 0.0);
    const std::size_t shards = std::min(n, kMaxShards);
    std::vector<std::exception_ptr> errors(shards);
    auto work = [&](std::size_t s) {
      try {
        buffers_[s].zero();
        ad::Tape<T> tape(store, &buffers_[s]);
        for (std::size_t i = s; i < n; i += shards) {
          tape.clear();
          ad::Var loss = fn(tape, i);
          losses[i] = static_cast<double>(tape.item(loss));
          tape.backward(loss);
        }
      } catch (...) {
        errors[s] = std::current_exception();
      }
    };
#ifdef TAXO_HAVE_OPENMP
    if (parallel && shards > 1) {
#pragma omp parallel for schedule(static, 1)
      for (std::size_t s = 0; s < shards; ++s) work(s);
    } else {
      for (std::size_t s = 0; s < shards; ++s) work(s);
    }
#else
    (void)parallel;
    for (std::size_t s = 0; s < shards; ++s) work(s);
#endif
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    store.zero_grad();
    for (std::size_t s = 0; s < shards; ++s) buffers_[s].add_into(store);
    return losses;
  }

 private:
  std::vector<ad::GradientBuffer<T>> buffers_;
};

template <typename T>
void scale_grads(ad::ParameterStore<T>& store, T factor) {
  for (auto& p : store) {
    for (auto& g : p.grad) g *= factor;
  }
}

}  // namespace taxo::detail
