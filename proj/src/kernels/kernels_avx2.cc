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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "rocoforge/kernels.h"

namespace rocoforge::kernels::avx2 {

namespace {

inline float HorizontalSum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

float Dot(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  if (i + 8 <= n) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    i += 8;
  }
  float acc = HorizontalSum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void DotRows(const float* query, const float* rows, std::size_t count, std::size_t dim,
             float* out) {
  for (std::size_t r = 0; r < count; ++r) out[r] = Dot(query, rows + r * dim, dim);
}

std::size_t ArgMaxFirst(const float* values, std::size_t n) {
  std::size_t i = 0;
  float best = values[0];
  if (n >= 8) {
    __m256 vmax = _mm256_loadu_ps(values);
    for (i = 8; i + 8 <= n; i += 8) vmax = _mm256_max_ps(vmax, _mm256_loadu_ps(values + i));
    alignas(32) float lanes[8];
    _mm256_store_ps(lanes, vmax);
    best = lanes[0];
    for (float lane : lanes) best = lane > best ? lane : best;
  }
  for (std::size_t j = i; j < n; ++j) best = values[j] > best ? values[j] : best;

  // Second pass: first position equal to the maximum.
  const __m256 target = _mm256_set1_ps(best);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const int mask =
        _mm256_movemask_ps(_mm256_cmp_ps(_mm256_loadu_ps(values + j), target, _CMP_EQ_OQ));
    if (mask != 0) return j + static_cast<std::size_t>(__builtin_ctz(mask));
  }
  for (; j < n; ++j) {
    if (values[j] == best) return j;
  }
  return 0;
}

void BlendU8(const std::uint8_t* orig, const std::uint8_t* fake, std::uint8_t* out, std::size_t n,
             std::uint32_t orig_q16) {
  const __m256i wo = _mm256_set1_epi32(static_cast<int>(orig_q16));
  const __m256i wf = _mm256_set1_epi32(static_cast<int>(kBlendOne - orig_q16));
  const __m256i half = _mm256_set1_epi32(static_cast<int>(kBlendOne >> 1));
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i o =
        _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(orig + i)));
    const __m256i f =
        _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(fake + i)));
    __m256i v = _mm256_add_epi32(_mm256_mullo_epi32(o, wo), _mm256_mullo_epi32(f, wf));
    v = _mm256_srli_epi32(_mm256_add_epi32(v, half), 16);
    const __m128i words =
        _mm_packus_epi32(_mm256_castsi256_si128(v), _mm256_extracti128_si256(v, 1));
    _mm_storel_epi64(reinterpret_cast<__m128i*>(out + i), _mm_packus_epi16(words, words));
  }
  const std::uint32_t fake_q16 = kBlendOne - orig_q16;
  for (; i < n; ++i) {
    const std::uint32_t v = orig_q16 * orig[i] + fake_q16 * fake[i] + (kBlendOne >> 1);
    out[i] = static_cast<std::uint8_t>(v >> 16);
  }
}

}  // namespace

const KernelTable kTable = {&Dot, &DotRows, &ArgMaxFirst, &BlendU8};

}  // namespace rocoforge::kernels::avx2
