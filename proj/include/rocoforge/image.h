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

#ifndef ROCOFORGE_IMAGE_H_
#define ROCOFORGE_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rocoforge {

// 8-bit interleaved RGB.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  static constexpr int kChannels = 3;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const {
    return &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  bool operator==(const Image&) const = default;
};

// Decodes PNG or JPEG (sniffed from the magic bytes). Gray and alpha inputs
// are converted to RGB. Throws InvalidImage.
Image DecodeImage(std::span<const std::uint8_t> bytes);
Image ReadImage(const std::filesystem::path& path);

// Lossless PNG with fixed encoder settings, so equal pixels give equal bytes.
std::vector<std::uint8_t> EncodePng(const Image& image);
void WritePngAtomic(const Image& image, const std::filesystem::path& path);

// Bilinear resampling with half-pixel centers and edge clamping. Returns a
// copy when the size already matches.
Image ResizeBilinear(const Image& src, int width, int height);

}  // namespace rocoforge

#endif  // ROCOFORGE_IMAGE_H_
