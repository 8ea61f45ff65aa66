// Copyright 2026 The Restoragent Authors.
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

#ifndef RESTORAGENT_IMAGE_H_
#define RESTORAGENT_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace restoragent {

// Planar RGB raster with intensities normalized to [0,1]. Plane c occupies
// data[c*w*h, (c+1)*w*h). Construction validates shape and range, so any
// ImageBuf that exists is valid.
class ImageBuf {
 public:
  static constexpr int kChannels = 3;

  ImageBuf(int width, int height, std::vector<double> data);
  // Constant-color image.
  ImageBuf(int width, int height, double r, double g, double b);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  std::span<const double> data() const { return data_; }
  std::span<const double> plane(int c) const {
    return std::span<const double>(data_).subspan(c * pixel_count(),
                                                  pixel_count());
  }

  double at(int c, int y, int x) const {
    return data_[c * pixel_count() + static_cast<std::size_t>(y) * width_ + x];
  }

  bool same_shape(const ImageBuf& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImageBuf& a, const ImageBuf& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  int width_;
  int height_;
  std::vector<double> data_;
};

// Builds an ImageBuf from possibly out-of-range values by clamping to [0,1].
// Non-finite values are rejected.
ImageBuf ClampedImage(int width, int height, std::vector<double> data);

// BT.601 luma plane, row-major.
std::vector<double> Luma(const ImageBuf& img);

// Round-half-away-from-zero to the nearest 1/255 step.
std::uint8_t QuantizeSample(double v);
ImageBuf Quantize(const ImageBuf& img);

ImageBuf LoadImage(const std::filesystem::path& path);
void SaveImage(const ImageBuf& img, const std::filesystem::path& path);

// In-memory PNG codec used by the external tool protocol.
std::vector<std::uint8_t> EncodePng(const ImageBuf& img);
ImageBuf DecodePng(std::span<const std::uint8_t> bytes);

}  // namespace restoragent

#endif  // RESTORAGENT_IMAGE_H_
