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

#include <cmath>

#include "taxo/autodiff.hpp"
#include "taxo/rng.hpp"

namespace taxo::detail {

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename T>
ad::Tensor<T> uniform_init(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  ad::Tensor<T> t(shape);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.values) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
  return t;
}

template <typename T>
ad::Tensor<T> normal_init(ad::Shape shape, double stddev, Rng& rng) {
  ad::Tensor<T> t(shape);
  for (auto& v : t.values) v = static_cast<T>(rng.normal(0.0, stddev));
  return t;
}

}  // namespace taxo::detail
