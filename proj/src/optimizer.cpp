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

#include "taxo/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "taxo/errors.hpp"

namespace taxo {

void OptimizerConfig::validate() const {
  if (!(min_lr > 0.0 && min_lr <= base_lr)) throw ConfigError("need 0 < min_lr <= base_lr");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("need 0 <= dropout < 1");
  if (!(cycle_epochs > 0.0)) throw ConfigError("cycle_epochs must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("need 0 <= momentum < 1");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be >= 0");
}

double learning_rate(const OptimizerConfig& cfg, double epoch) {
  const double phase = std::fmod(epoch, cfg.cycle_epochs) / cfg.cycle_epochs;
  return cfg.min_lr + (cfg.base_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * phase)) / 2.0;
}

template <typename T>
double clip_grad_norm(ad::ParameterStore<T>& store, double max_norm) {
  double sq = 0.0;
  for (const auto& p : store) {
    for (T g : p.grad) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto& p : store) {
      for (T& g : p.grad) g *= factor;
    }
  }
  return norm;
}

template <typename T>
void sgd_step(ad::ParameterStore<T>& store, const OptimizerConfig& cfg, double epoch) {
  for (const auto& p : store) {
    if (!p.grad_ready) throw UninitializedGradient("parameter '" + p.name + "'");
  }
  const T lr = static_cast<T>(learning_rate(cfg, epoch));
  const T mu = static_cast<T>(cfg.momentum);
  for (auto& p : store) {
    auto& values = p.value.values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      p.momentum[i] = mu * p.momentum[i] + p.grad[i];
      values[i] -= lr * p.momentum[i];
    }
  }
  store.clear_grad_flags();
}

template double clip_grad_norm<float>(ad::ParameterStore<float>&, double);
template double clip_grad_norm<double>(ad::ParameterStore<double>&, double);
template void sgd_step<float>(ad::ParameterStore<float>&, const OptimizerConfig&, double);
template void sgd_step<double>(ad::ParameterStore<double>&, const OptimizerConfig&, double);

}  // namespace taxo
