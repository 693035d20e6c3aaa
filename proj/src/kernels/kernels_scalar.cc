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

#include "rocoforge/kernels.h"

namespace rocoforge::kernels::scalar {

namespace {

float Dot(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void DotRows(const float* query, const float* rows, std::size_t count, std::size_t dim,
             float* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = Dot(query, rows + r * dim, dim);
}

std::size_t ArgMaxFirst(const float* values, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void BlendU8(const std::uint8_t* orig, const std::uint8_t* fake, std::uint8_t* out, std::size_t n,
             std::uint32_t orig_q16) {
  const std::uint32_t fake_q16 = kBlendOne - orig_q16;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t v = orig_q16 * orig[i] + fake_q16 * fake[i] + (kBlendOne >> 1);
    out[i] = static_cast<std::uint8_t>(v >> 16);
  }
}

}  // namespace

const KernelTable kTable = {&Dot, &DotRows, &ArgMaxFirst, &BlendU8};

}  // namespace rocoforge::kernels::scalar
