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

#include "restoragent/image.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>

#include "restoragent/error.h"

namespace restoragent {
namespace {

void CheckShape(int width, int height, std::size_t size) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidImage, "image dimensions must be positive");
  }
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * ImageBuf::kChannels;
  if (size != expected) {
    throw Error(ErrorCode::kInvalidImage,
                "data length " + std::to_string(size) + " != w*h*3 = " +
                    std::to_string(expected));
  }
}

// png_image owns libpng state until png_image_free; this makes that RAII.
struct PngImage {
  png_image image{};
  PngImage() { image.version = PNG_IMAGE_VERSION; }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

ImageBuf FromInterleaved(const std::vector<png_byte>& pixels, int width,
                         int height, int stride_channels) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> data(n * ImageBuf::kChannels);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < ImageBuf::kChannels; ++c) {
      data[c * n + i] = pixels[i * stride_channels + c] / 255.0;
    }
  }
  return ImageBuf(width, height, std::move(data));
}

std::vector<png_byte> ToInterleaved(const ImageBuf& img) {
  const std::size_t n = img.pixel_count();
  std::vector<png_byte> out(n * ImageBuf::kChannels);
  for (int c = 0; c < ImageBuf::kChannels; ++c) {
    auto plane = img.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      out[i * ImageBuf::kChannels + c] = QuantizeSample(plane[i]);
    }
  }
  return out;
}

// Shared tail of file and memory decoding once the header has been read.
ImageBuf FinishRead(PngImage& png) {
  png_image& image = png.image;
  if ((image.format & PNG_FORMAT_FLAG_COLOR) == 0) {
    throw Error(ErrorCode::kFormat, "PNG is not RGB/RGBA");
  }
  if ((image.format & PNG_FORMAT_FLAG_LINEAR) != 0) {
    throw Error(ErrorCode::kFormat, "16-bit PNG is not supported");
  }
  const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  // Reading RGBA as RGB would composite against a background; keep alpha and
  // drop it ourselves so RGB samples stay raw.
  image.format = has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  const int stride_channels = has_alpha ? 4 : 3;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kFormat, image.message);
  }
  return FromInterleaved(pixels, static_cast<int>(image.width),
                         static_cast<int>(image.height), stride_channels);
}

}  // namespace

ImageBuf::ImageBuf(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  CheckShape(width_, height_, data_.size());
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::kInvalidImage,
                  "pixel value outside [0,1]: " + std::to_string(v));
    }
  }
}

ImageBuf::ImageBuf(int width, int height, double r, double g, double b)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidImage, "image dimensions must be positive");
  }
  const std::size_t n = pixel_count();
  data_.reserve(n * kChannels);
  for (double v : {r, g, b}) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::kInvalidImage, "pixel value outside [0,1]");
    }
    data_.insert(data_.end(), n, v);
  }
}

ImageBuf ClampedImage(int width, int height, std::vector<double> data) {
  for (double& v : data) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidImage, "non-finite pixel value");
    }
    v = std::clamp(v, 0.0, 1.0);
  }
  return ImageBuf(width, height, std::move(data));
}

std::vector<double> Luma(const ImageBuf& img) {
  const std::size_t n = img.pixel_count();
  auto r = img.plane(0);
  auto g = img.plane(1);
  auto b = img.plane(2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  }
  return y;
}

std::uint8_t QuantizeSample(double v) {
  // std::round rounds halfway cases away from zero.
  return static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
}

ImageBuf Quantize(const ImageBuf& img) {
  std::vector<double> data(img.data().begin(), img.data().end());
  for (double& v : data) v = QuantizeSample(v) / 255.0;
  return ImageBuf(img.width(), img.height(), std::move(data));
}

ImageBuf LoadImage(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kIo, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return DecodePng(bytes);
}

ImageBuf DecodePng(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSignature[8] = {0x89, 'P',  'N',  'G',
                                                 '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || !std::equal(kSignature, kSignature + 8, bytes.begin())) {
    throw Error(ErrorCode::kFormat, "not a PNG stream");
  }
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kFormat, png.image.message);
  }
  return FinishRead(png);
}

std::vector<std::uint8_t> EncodePng(const ImageBuf& img) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(img.width());
  png.image.height = static_cast<png_uint_32>(img.height());
  png.image.format = PNG_FORMAT_RGB;
  const std::vector<png_byte> pixels = ToInterleaved(img);
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png.image, size, 0, pixels.data(), 0,
                                       nullptr)) {
    throw Error(ErrorCode::kFormat, png.image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0,
                                 pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kFormat, png.image.message);
  }
  out.resize(size);
  return out;
}

void SaveImage(const ImageBuf& img, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = EncodePng(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace restoragent
