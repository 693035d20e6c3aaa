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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "rocoforge/random.h"

namespace rocoforge::kernels {
namespace {

std::vector<Isa> VectorIsas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (IsaAvailable(isa)) out.push_back(isa);
  }
  return out;
}

std::vector<float> RandomFloats(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.Uniform(-1.0, 1.0));
  return v;
}

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(IsaAvailable(Isa::kScalar));
  EXPECT_EQ(IsaName(Isa::kScalar), "scalar");
  EXPECT_NE(Active().dot, nullptr);
}

TEST(Kernels, ScalarDotMatchesDoubleReference) {
  Rng rng(1);
  for (std::size_t n : {1u, 3u, 8u, 17u, 64u, 513u}) {
    const auto a = RandomFloats(rng, n);
    const auto b = RandomFloats(rng, n);
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref += static_cast<double>(a[i]) * b[i];
    EXPECT_NEAR(scalar::kTable.dot(a.data(), b.data(), n), ref, 1e-5) << n;
  }
}

TEST(Kernels, VectorDotWithinToleranceOfScalar) {
  Rng rng(2);
  for (Isa isa : VectorIsas()) {
    const KernelTable& t = Table(isa);
    for (std::size_t n = 1; n < 300; n += 7) {
      const auto a = RandomFloats(rng, n);
      const auto b = RandomFloats(rng, n);
      const float s = scalar::kTable.dot(a.data(), b.data(), n);
      EXPECT_NEAR(t.dot(a.data(), b.data(), n), s, 1e-5f * std::sqrt(static_cast<float>(n)))
          << IsaName(isa) << " n=" << n;
    }
  }
}

TEST(Kernels, VectorDotRowsWithinToleranceOfScalar) {
  Rng rng(3);
  for (Isa isa : VectorIsas()) {
    for (std::size_t dim : {5u, 16u, 64u, 67u}) {
      const std::size_t rows = 37;
      const auto q = RandomFloats(rng, dim);
      const auto m = RandomFloats(rng, rows * dim);
      std::vector<float> want(rows), got(rows);
      scalar::kTable.dot_rows(q.data(), m.data(), rows, dim, want.data());
      Table(isa).dot_rows(q.data(), m.data(), rows, dim, got.data());
      for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(got[r], want[r], 1e-5f);
    }
  }
}

TEST(Kernels, ArgMaxFirstPicksEarliestMaximum) {
  const std::vector<float> v = {0.1f, 0.7f, -1.0f, 0.7f, 0.2f};
  EXPECT_EQ(scalar::kTable.argmax_first(v.data(), v.size()), 1u);
  const std::vector<float> same(40, 0.5f);
  EXPECT_EQ(scalar::kTable.argmax_first(same.data(), same.size()), 0u);
}

TEST(Kernels, VectorArgMaxBitIdenticalToScalar) {
  Rng rng(4);
  for (Isa isa : VectorIsas()) {
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 1 + rng.UniformIndex(130);
      std::vector<float> v(n);
      // Few distinct values so ties are common.
      for (auto& x : v) x = static_cast<float>(rng.UniformIndex(5)) * 0.25f - 0.5f;
      EXPECT_EQ(Table(isa).argmax_first(v.data(), n), scalar::kTable.argmax_first(v.data(), n))
          << IsaName(isa) << " trial " << trial;
    }
  }
}

TEST(Kernels, BlendEndpointsAndMidpoint) {
  const std::vector<std::uint8_t> a(50, 255), b(50, 0);
  std::vector<std::uint8_t> out(50);
  scalar::kTable.blend_u8(a.data(), b.data(), out.data(), out.size(), kBlendOne);
  EXPECT_EQ(out, a);
  scalar::kTable.blend_u8(a.data(), b.data(), out.data(), out.size(), 0);
  EXPECT_EQ(out, b);
  scalar::kTable.blend_u8(a.data(), b.data(), out.data(), out.size(), BlendWeightQ16(0.5));
  for (auto x : out) EXPECT_TRUE(x == 127 || x == 128);
}

TEST(Kernels, VectorBlendBitIdenticalToScalar) {
  Rng rng(5);
  for (Isa isa : VectorIsas()) {
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng.UniformIndex(300);
      std::vector<std::uint8_t> a(n), b(n), want(n), got(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = static_cast<std::uint8_t>(rng.UniformIndex(256));
        b[i] = static_cast<std::uint8_t>(rng.UniformIndex(256));
      }
      const auto w = static_cast<std::uint32_t>(rng.UniformIndex(kBlendOne + 1));
      scalar::kTable.blend_u8(a.data(), b.data(), want.data(), n, w);
      Table(isa).blend_u8(a.data(), b.data(), got.data(), n, w);
      EXPECT_EQ(got, want) << IsaName(isa) << " n=" << n << " w=" << w;
    }
  }
}

TEST(Kernels, BlendWeightQuantization) {
  EXPECT_EQ(BlendWeightQ16(1.0), kBlendOne);
  EXPECT_EQ(BlendWeightQ16(0.0), 0u);
  EXPECT_EQ(BlendWeightQ16(0.5), kBlendOne / 2);
}

TEST(Kernels, ForceIsaSwitchesActiveTable) {
  const Isa before = ActiveIsa();
  ForceIsa(Isa::kScalar);
  EXPECT_EQ(ActiveIsa(), Isa::kScalar);
  EXPECT_EQ(&Active(), &scalar::kTable);
  ForceIsa(before);
  EXPECT_EQ(ActiveIsa(), before);
}

}  // namespace
}  // namespace rocoforge::kernels
