// Copyright 2026 The Rocoforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROCOFORGE_ERRORS_H_
#define ROCOFORGE_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rocoforge {

// Root of every error the library throws. Callers that only need to report
// can catch this; the CLI maps a few subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

#define ROCOFORGE_DEFINE_ERROR(Name) \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

ROCOFORGE_DEFINE_ERROR(ValidationError);
ROCOFORGE_DEFINE_ERROR(IoError);
ROCOFORGE_DEFINE_ERROR(IndexError);
ROCOFORGE_DEFINE_ERROR(ShapeError);

// concept_registry
ROCOFORGE_DEFINE_ERROR(RegistryError);
ROCOFORGE_DEFINE_ERROR(UnmappedWord);
ROCOFORGE_DEFINE_ERROR(NoCandidate);

// embedding_provider
ROCOFORGE_DEFINE_ERROR(ProviderUnavailable);
ROCOFORGE_DEFINE_ERROR(ProviderContractViolation);
ROCOFORGE_DEFINE_ERROR(CacheError);

// ei_scorer
ROCOFORGE_DEFINE_ERROR(NumericalDegeneracy);
ROCOFORGE_DEFINE_ERROR(NoSourceWord);
ROCOFORGE_DEFINE_ERROR(EmptyConsensus);

// caption_forge / image_forge
ROCOFORGE_DEFINE_ERROR(NoOpSubstitution);
ROCOFORGE_DEFINE_ERROR(InvalidImage);

// eval_harness
ROCOFORGE_DEFINE_ERROR(ManifestError);
ROCOFORGE_DEFINE_ERROR(UndefinedDropRate);
ROCOFORGE_DEFINE_ERROR(MissingEmbedding);

#undef ROCOFORGE_DEFINE_ERROR

}  // namespace rocoforge

#endif  // ROCOFORGE_ERRORS_H_
