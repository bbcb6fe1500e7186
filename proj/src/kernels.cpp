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

#include "taxo/kernels.hpp"

#include <algorithm>

#ifdef TAXO_HAVE_OPENMP
#include <omp.h>
#endif

namespace taxo::kernels {

namespace serial {

template <typename T>
void matvec(const T* w, const T* x, T* y, std::size_t rows, std::size_t cols, bool accumulate) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T v = dot(w + i * cols, x, cols);
    y[i] = accumulate ? y[i] + v : v;
  }
}

template <typename T>
void matvec_t_acc(const T* w, const T* g, T* y, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T gi = g[i];
    if (gi == T(0)) continue;
    const T* row = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * gi;
  }
}

template <typename T>
void outer_acc(const T* g, const T* x, T* w, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T gi = g[i];
    if (gi == T(0)) continue;
    T* row = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

}  // namespace serial

namespace parallel {

template <typename T>
void matvec(const T* w, const T* x, T* y, std::size_t rows, std::size_t cols, bool accumulate) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const T v = dot(w + r * cols, x, cols);
    y[r] = accumulate ? y[r] + v : v;
  }
}

template <typename T>
void matvec_t_acc(const T* w, const T* g, T* y, std::size_t rows, std::size_t cols) {
  // Columns are split across threads; each keeps the serial row order.
  constexpr std::ptrdiff_t kBlock = 64;
  const auto blocks = static_cast<std::ptrdiff_t>((cols + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const auto lo = static_cast<std::size_t>(b * kBlock);
    const std::size_t hi = std::min(cols, lo + static_cast<std::size_t>(kBlock));
    for (std::size_t i = 0; i < rows; ++i) {
      const T gi = g[i];
      if (gi == T(0)) continue;
      const T* row = w + i * cols;
      for (std::size_t j = lo; j < hi; ++j) y[j] += row[j] * gi;
    }
  }
}

template <typename T>
void outer_acc(const T* g, const T* x, T* w, std::size_t rows, std::size_t cols) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const T gi = g[r];
    if (gi == T(0)) continue;
    T* row = w + r * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

}  // namespace parallel

bool openmp_enabled() {
#ifdef TAXO_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef TAXO_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

bool use_parallel(std::size_t rows, std::size_t cols) {
#ifdef TAXO_HAVE_OPENMP
  return rows * cols >= kParallelThreshold && !omp_in_parallel() && omp_get_max_threads() > 1;
#else
  (void)rows;
  (void)cols;
  return false;
#endif
}

}  // namespace

template <typename T>
void matvec(const T* w, const T* x, T* y, std::size_t rows, std::size_t cols, bool accumulate) {
  if (use_parallel(rows, cols)) {
    parallel::matvec(w, x, y, rows, cols, accumulate);
  } else {
    serial::matvec(w, x, y, rows, cols, accumulate);
  }
}

template <typename T>
void matvec_t_acc(const T* w, const T* g, T* y, std::size_t rows, std::size_t cols) {
  if (use_parallel(rows, cols)) {
    parallel::matvec_t_acc(w, g, y, rows, cols);
  } else {
    serial::matvec_t_acc(w, g, y, rows, cols);
  }
}

template <typename T>
void outer_acc(const T* g, const T* x, T* w, std::size_t rows, std::size_t cols) {
  if (use_parallel(rows, cols)) {
    parallel::outer_acc(g, x, w, rows, cols);
  } else {
    serial::outer_acc(g, x, w, rows, cols);
  }
}

#define TAXO_INSTANTIATE(T)                                                                 \
  template void serial::matvec<T>(const T*, const T*, T*, std::size_t, std::size_t, bool);  \
  template void serial::matvec_t_acc<T>(const T*, const T*, T*, std::size_t, std::size_t);  \
  template void serial::outer_acc<T>(const T*, const T*, T*, std::size_t, std::size_t);     \
  template void parallel::matvec<T>(const T*, const T*, T*, std::size_t, std::size_t, bool); \
  template void parallel::matvec_t_acc<T>(const T*, const T*, T*, std::size_t, std::size_t); \
  template void parallel::outer_acc<T>(const T*, const T*, T*, std::size_t, std::size_t);   \
  template void matvec<T>(const T*, const T*, T*, std::size_t, std::size_t, bool);          \
  template void matvec_t_acc<T>(const T*, const T*, T*, std::size_t, std::size_t);          \
  template void outer_acc<T>(const T*, const T*, T*, std::size_t, std::size_t);

TAXO_INSTANTIATE(float)
TAXO_INSTANTIATE(double)

#undef TAXO_INSTANTIATE

}  // namespace taxo::kernels
