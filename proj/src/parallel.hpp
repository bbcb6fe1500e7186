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
#include <exception>

#include "taxo/pipeline.hpp"

namespace taxo::detail {

// Runs body(i, tape) for i in [0, n), in parallel when asked, each worker
// with its own inference tape. The first exception is rethrown.
template <typename F>
void for_each_index(const ModelState& state, std::size_t n, bool parallel, F&& body) {
  std::exception_ptr error;
#ifdef TAXO_HAVE_OPENMP
  if (parallel && n > 1) {
#pragma omp parallel
    {
      ad::Tape<float> tape(state.model.params());
#pragma omp for schedule(dynamic, 1)
      for (std::size_t i = 0; i < n; ++i) {
        try {
          tape.clear();
          body(i, tape);
        } catch (...) {
#pragma omp critical(taxo_pipeline_error)
          if (!error) error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#else
  (void)parallel;
#endif
  ad::Tape<float> tape(state.model.params());
  for (std::size_t i = 0; i < n; ++i) {
    tape.clear();
    body(i, tape);
  }
}

}  // namespace taxo::detail
