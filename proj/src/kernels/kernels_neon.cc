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

#include <arm_neon.h>

#include "rocoforge/kernels.h"

namespace rocoforge::kernels::neon {

namespace {

float Dot(const float* a, const float* b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
  }
  float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void DotRows(const float* query, const float* rows, std::size_t count, std::size_t dim,
             float* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = Dot(query, rows + r * dim, dim);
}

std::size_t ArgMaxFirst(const float* values, std::size_t n) {
  float best = values[0];
  std::size_t i = 0;
  if (n >= 4) {
    float32x4_t vmax = vld1q_f32(values);
    for (i = 4; i + 4 <= n; i += 4) vmax = vmaxq_f32(vmax, vld1q_f32(values + i));
    best = vmaxvq_f32(vmax);
  }
  for (std::size_t j = i; j < n; ++j) best = values[j] > best ? values[j] : best;
  for (std::size_t j = 0; j < n; ++j) {
    if (values[j] == best) return j;
  }
  return 0;
}

void BlendU8(const std::uint8_t* orig, const std::uint8_t* fake, std::uint8_t* out, std::size_t n,
             std::uint32_t orig_q16) {
  const std::uint32_t fake_q16 = kBlendOne - orig_q16;
  const uint32x4_t wo = vdupq_n_u32(orig_q16);
  const uint32x4_t wf = vdupq_n_u32(fake_q16);
  const uint32x4_t half = vdupq_n_u32(kBlendOne >> 1);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const uint16x8_t o = vmovl_u8(vld1_u8(orig + i));
    const uint16x8_t f = vmovl_u8(vld1_u8(fake + i));
    uint32x4_t lo =
        vmlaq_u32(vmulq_u32(vmovl_u16(vget_low_u16(o)), wo), vmovl_u16(vget_low_u16(f)), wf);
    uint32x4_t hi =
        vmlaq_u32(vmulq_u32(vmovl_u16(vget_high_u16(o)), wo), vmovl_u16(vget_high_u16(f)), wf);
    lo = vshrq_n_u32(vaddq_u32(lo, half), 16);
    hi = vshrq_n_u32(vaddq_u32(hi, half), 16);
    const uint16x8_t words = vcombine_u16(vqmovn_u32(lo), vqmovn_u32(hi));
    vst1_u8(out + i, vqmovn_u16(words));
  }
  for (; i < n; ++i) {
    const std::uint32_t v = orig_q16 * orig[i] + fake_q16 * fake[i] + (kBlendOne >> 1);
    out[i] = static_cast<std::uint8_t>(v >> 16);
  }
}

}  // namespace

const KernelTable kTable = {&Dot, &DotRows, &ArgMaxFirst, &BlendU8};

}  // namespace rocoforge::kernels::neon
