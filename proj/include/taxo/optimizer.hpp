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

#include "taxo/autodiff.hpp"

namespace taxo {

struct OptimizerConfig {
  double base_lr = 0.25;
  double min_lr = 0.05;
  double cycle_epochs = 5.0;
  double momentum = 0.9;
  double dropout_rate = 0.3;
  std::size_t epochs = 50;
  // Global gradient-norm clip applied before each step; 0 disables.
  double clip_norm = 5.0;

  // Throws ConfigError unless 0 < min_lr <= base_lr, 0 <= dropout < 1,
  // cycle_epochs > 0 and 0 <= momentum < 1.
  void validate() const;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

// Cosine annealing with warm restarts:
// min + (base - min) * (1 + cos(pi * (epoch mod cycle) / cycle)) / 2.
// `epoch` may be fractional to anneal within an epoch.
double learning_rate(const OptimizerConfig& cfg, double epoch);

// Scales gradients so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
template <typename T>
double clip_grad_norm(ad::ParameterStore<T>& store, double max_norm);

// buf = momentum * buf + grad; value -= lr(epoch) * buf.
// Throws UninitializedGradient if any gradient was never populated.
template <typename T>
void sgd_step(ad::ParameterStore<T>& store, const OptimizerConfig& cfg, double epoch);

}  // namespace taxo
