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

#include <doctest.h>

#include <cstring>
#include <vector>

#include "taxo/kernels.hpp"
#include "taxo/rng.hpp"

#ifdef TAXO_HAVE_OPENMP
#include <omp.h>
#endif

using namespace taxo;

namespace {

template <typename T>
std::vector<T> random_values(std::size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.normal(0.0, 1.0));
  return v;
}

template <typename T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

// Forces several threads even on a single-core machine.
struct ThreadScope {
  ThreadScope() {
#ifdef TAXO_HAVE_OPENMP
    saved = omp_get_max_threads();
    omp_set_num_threads(4);
#endif
  }
  ~ThreadScope() {
#ifdef TAXO_HAVE_OPENMP
    omp_set_num_threads(saved);
#endif
  }
  int saved = 1;
};

template <typename T>
void compare_kernels(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  const auto w = random_values<T>(rows * cols, rng);
  const auto x = random_values<T>(cols, rng);
  const auto g = random_values<T>(rows, rng);
  const auto y0 = random_values<T>(rows, rng);
  const auto z0 = random_values<T>(cols, rng);

  for (bool acc : {false, true}) {
    auto ys = y0, yp = y0, yd = y0;
    kernels::serial::matvec(w.data(), x.data(), ys.data(), rows, cols, acc);
    kernels::parallel::matvec(w.data(), x.data(), yp.data(), rows, cols, acc);
    kernels::matvec(w.data(), x.data(), yd.data(), rows, cols, acc);
    CHECK(bitwise_equal(ys, yp));
    CHECK(bitwise_equal(ys, yd));
  }
  auto zs = z0, zp = z0, zd = z0;
  kernels::serial::matvec_t_acc(w.data(), g.data(), zs.data(), rows, cols);
  kernels::parallel::matvec_t_acc(w.data(), g.data(), zp.data(), rows, cols);
  kernels::matvec_t_acc(w.data(), g.data(), zd.data(), rows, cols);
  CHECK(bitwise_equal(zs, zp));
  CHECK(bitwise_equal(zs, zd));

  auto ws = w, wp = w, wd = w;
  kernels::serial::outer_acc(g.data(), x.data(), ws.data(), rows, cols);
  kernels::parallel::outer_acc(g.data(), x.data(), wp.data(), rows, cols);
  kernels::outer_acc(g.data(), x.data(), wd.data(), rows, cols);
  CHECK(bitwise_equal(ws, wp));
  CHECK(bitwise_equal(ws, wd));
}

}  // namespace

TEST_CASE("serial and parallel kernels agree bit for bit") {
  ThreadScope threads;
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{1, 1}, {3, 7}, {17, 33}, {64, 200},
                      {300, 300}, {601, 129}, {1024, 77}}) {
    CAPTURE(r);
    CAPTURE(c);
    compare_kernels<float>(r, c, r * 31 + c);
    compare_kernels<double>(r, c, r * 17 + c);
  }
}

TEST_CASE("matvec against a hand product") {
  const double w[] = {1, 2, 3, 4, 5, 6};
  const double x[] = {1, 0, -1};
  double y[2] = {10, 20};
  kernels::serial::matvec(w, x, y, 2, 3, false);
  CHECK(y[0] == -2.0);
  CHECK(y[1] == -2.0);
  kernels::serial::matvec(w, x, y, 2, 3, true);
  CHECK(y[0] == -4.0);
  double z[3] = {0, 0, 0};
  const double g[] = {1, 1};
  kernels::serial::matvec_t_acc(w, g, z, 2, 3);
  CHECK(z[0] == 5.0);
  CHECK(z[2] == 9.0);
  double m[6] = {};
  kernels::serial::outer_acc(g, x, m, 2, 3);
  CHECK(m[0] == 1.0);
  CHECK(m[5] == -1.0);
}

TEST_CASE("dot handles every tail length") {
  for (std::size_t n = 0; n < 20; ++n) {
    std::vector<double> a(n), b(n);
    double expect = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(i + 1);
      b[i] = 0.5;
      expect += a[i] * b[i];
    }
    CHECK(kernels::dot(a.data(), b.data(), n) == expect);
  }
}
