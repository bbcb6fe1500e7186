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

#include <stdexcept>
#include <string>

namespace taxo {

// Every failure raised by the library derives from Error, so callers that
// only care about "data problem vs. bug" can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TAXO_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    explicit Name(const std::string& m)  \
        : Error(#Name ": " + m) {}       \
  }

TAXO_DEFINE_ERROR(CyclicTaxonomy);
TAXO_DEFINE_ERROR(UnknownConcept);
TAXO_DEFINE_ERROR(DuplicateConcept);
TAXO_DEFINE_ERROR(InvalidPosition);
TAXO_DEFINE_ERROR(TaxonomyTooSmall);
TAXO_DEFINE_ERROR(NoContext);
TAXO_DEFINE_ERROR(ShapeError);
TAXO_DEFINE_ERROR(UninitializedGradient);
TAXO_DEFINE_ERROR(EmptySentence);
TAXO_DEFINE_ERROR(MissingAnchor);
TAXO_DEFINE_ERROR(ConfigError);
TAXO_DEFINE_ERROR(VocabMismatch);
TAXO_DEFINE_ERROR(IOError);
TAXO_DEFINE_ERROR(FormatError);
TAXO_DEFINE_ERROR(ExtractionContractViolation);

#undef TAXO_DEFINE_ERROR

}  // namespace taxo
