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

#ifndef ROCOFORGE_KERNELS_H_
#define ROCOFORGE_KERNELS_H_

// Data-parallel inner loops shared by the similarity, ranking and image
// blending code. Each kernel has a scalar reference implementation and
// vectorized variants; the variant is chosen once at runtime from CPU
// features and can be pinned with ROCOFORGE_ISA=scalar|avx2|neon.
//
// Contracts:
//  * ArgMaxFirst and BlendU8 are bit-identical across variants.
//  * Dot/DotRows differ from scalar only by float summation order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace rocoforge::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  float (*dot)(const float* a, const float* b, std::size_t n);
  void (*dot_rows)(const float* query, const float* rows, std::size_t count, std::size_t dim,
                   float* out);
  std::size_t (*argmax_first)(const float* values, std::size_t n);
  void (*blend_u8)(const std::uint8_t* orig, const std::uint8_t* fake, std::uint8_t* out,
                   std::size_t n, std::uint32_t orig_q16);
};

// Fixed-point scale used by BlendU8 weights.
inline constexpr std::uint32_t kBlendOne = 1u << 16;

bool IsaAvailable(Isa isa);
std::string_view IsaName(Isa isa);

// Table for a specific variant; throws if it is not available on this CPU.
const KernelTable& Table(Isa isa);

// Variant selected for this process.
Isa ActiveIsa();
const KernelTable& Active();

// Overrides the selected variant (tests and benchmarking).
void ForceIsa(Isa isa);

inline float Dot(std::span<const float> a, std::span<const float> b) {
  return Active().dot(a.data(), b.data(), a.size());
}

// out[r] = <query, rows[r*dim .. r*dim+dim)> for r in [0, count).
inline void DotRows(std::span<const float> query, std::span<const float> rows, std::size_t dim,
                    std::span<float> out) {
  Active().dot_rows(query.data(), rows.data(), out.size(), dim, out.data());
}

// Index of the first maximal element; n must be > 0.
inline std::size_t ArgMaxFirst(std::span<const float> values) {
  return Active().argmax_first(values.data(), values.size());
}

// out = (orig_q16 * orig + (2^16 - orig_q16) * fake + 2^15) >> 16 per byte.
inline void BlendU8(std::span<const std::uint8_t> orig, std::span<const std::uint8_t> fake,
                    std::span<std::uint8_t> out, std::uint32_t orig_q16) {
  Active().blend_u8(orig.data(), fake.data(), out.data(), out.size(), orig_q16);
}

// Quantizes a blend weight in [0,1] to BlendU8's fixed-point scale.
std::uint32_t BlendWeightQ16(double lambda);

namespace scalar {
extern const KernelTable kTable;
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
extern const KernelTable kTable;
}
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
namespace neon {
extern const KernelTable kTable;
}
#endif

}  // namespace rocoforge::kernels

#endif  // ROCOFORGE_KERNELS_H_
