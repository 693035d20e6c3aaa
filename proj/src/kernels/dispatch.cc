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

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "rocoforge/errors.h"
#include "rocoforge/kernels.h"

namespace rocoforge::kernels {

namespace {

Isa DetectIsa() {
  if (const char* env = std::getenv("ROCOFORGE_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && IsaAvailable(Isa::kAvx2)) return Isa::kAvx2;
    if (want == "neon" && IsaAvailable(Isa::kNeon)) return Isa::kNeon;
  }
  if (IsaAvailable(Isa::kAvx2)) return Isa::kAvx2;
  if (IsaAvailable(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<const KernelTable*>& ActiveSlot() {
  static std::atomic<const KernelTable*> slot{&Table(DetectIsa())};
  return slot;
}

std::atomic<Isa>& ActiveIsaSlot() {
  static std::atomic<Isa> slot{DetectIsa()};
  return slot;
}

}  // namespace

bool IsaAvailable(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__) || defined(__ARM_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& Table(Isa isa) {
  if (!IsaAvailable(isa)) {
    throw Error("kernel variant " + std::string(IsaName(isa)) + " not available");
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2:
      return avx2::kTable;
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
    case Isa::kNeon:
      return neon::kTable;
#endif
    default:
      return scalar::kTable;
  }
}

Isa ActiveIsa() { return ActiveIsaSlot().load(); }

const KernelTable& Active() { return *ActiveSlot().load(std::memory_order_relaxed); }

void ForceIsa(Isa isa) {
  const KernelTable* table = &Table(isa);
  ActiveSlot().store(table);
  ActiveIsaSlot().store(isa);
}

std::uint32_t BlendWeightQ16(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("blend weight outside [0,1]");
  return static_cast<std::uint32_t>(std::lround(lambda * kBlendOne));
}

}  // namespace rocoforge::kernels
