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

// Dense inner loops used by the autodiff tape. Each kernel has a serial
// reference and an OpenMP version; both compute every output element with the
// same operation order, so results are bitwise identical and the reference
// stays usable as a test oracle.
namespace taxo::kernels {

// Row-major W is rows x cols.
namespace serial {
// y = W x (+ y when accumulate)
template <typename T>
void matvec(const T* w, const T* x, T* y, std::size_t rows, std::size_t cols, bool accumulate);
// y += W^T g
template <typename T>
void matvec_t_acc(const T* w, const T* g, T* y, std::size_t rows, std::size_t cols);
// W += g x^T
template <typename T>
void outer_acc(const T* g, const T* x, T* w, std::size_t rows, std::size_t cols);
}  // namespace serial

namespace parallel {
template <typename T>
void matvec(const T* w, const T* x, T* y, std::size_t rows, std::size_t cols, bool accumulate);
template <typename T>
void matvec_t_acc(const T* w, const T* g, T* y, std::size_t rows, std::size_t cols);
template <typename T>
void outer_acc(const T* g, const T* x, T* w, std::size_t rows, std::size_t cols);
}  // namespace parallel

// Work (rows * cols) above which the dispatchers below use the OpenMP
// versions, provided no parallel region is already active.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

bool openmp_enabled();
int max_threads();

template <typename T>
void matvec(const T* w, const T* x, T* y, std::size_t rows, std::size_t cols, bool accumulate);
template <typename T>
void matvec_t_acc(const T* w, const T* g, T* y, std::size_t rows, std::size_t cols);
template <typename T>
void outer_acc(const T* g, const T* x, T* w, std::size_t rows, std::size_t cols);

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  // Eight independent partial sums let the compiler vectorize without
  // reassociation flags; the combine order is fixed.
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace taxo::kernels
