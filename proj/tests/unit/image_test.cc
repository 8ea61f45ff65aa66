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

#include <gtest/gtest.h>

#include <cmath>

#include "restoragent/error.h"
#include "restoragent/image.h"
#include "restoragent/types.h"
#include "test_util.h"

namespace restoragent {
namespace {

using testing::DataPath;
using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kConfig;
}

TEST(ImageBufTest, RejectsBadShapeAndRange) {
  EXPECT_EQ(CodeOf([] { ImageBuf(2, 2, std::vector<double>(11, 0.0)); }),
            ErrorCode::kInvalidImage);
  EXPECT_EQ(CodeOf([] { ImageBuf(0, 2, std::vector<double>{}); }),
            ErrorCode::kInvalidImage);
  EXPECT_EQ(CodeOf([] { ImageBuf(1, 1, {0.0, 1.5, 0.0}); }),
            ErrorCode::kInvalidImage);
  EXPECT_EQ(CodeOf([] { ImageBuf(1, 1, {0.0, std::nan(""), 0.0}); }),
            ErrorCode::kInvalidImage);
}

TEST(LoadImageTest, ZeroImage) {
  const ImageBuf img = LoadImage(DataPath("zeros_2x2.png"));
  EXPECT_EQ(img.width(), 2);
  EXPECT_EQ(img.height(), 2);
  for (double v : img.data()) EXPECT_EQ(v, 0.0);
}

TEST(LoadImageTest, WhitePixelIsOne) {
  const ImageBuf img = LoadImage(DataPath("white_1x1.png"));
  for (double v : img.data()) EXPECT_EQ(v, 1.0);
}

TEST(LoadImageTest, BytesDividedBy255) {
  const ImageBuf img = LoadImage(DataPath("pixel_128_64_32.png"));
  EXPECT_EQ(img.at(0, 0, 0), 128.0 / 255.0);
  EXPECT_EQ(img.at(1, 0, 0), 64.0 / 255.0);
  EXPECT_EQ(img.at(2, 0, 0), 32.0 / 255.0);
}

TEST(LoadImageTest, RgbaDropsAlphaWithoutCompositing) {
  // The fixture's alpha is 0; compositing would have zeroed the color.
  const ImageBuf img = LoadImage(DataPath("rgba_1x1.png"));
  EXPECT_EQ(img.at(0, 0, 0), 10.0 / 255.0);
  EXPECT_EQ(img.at(1, 0, 0), 20.0 / 255.0);
  EXPECT_EQ(img.at(2, 0, 0), 30.0 / 255.0);
}

TEST(LoadImageTest, Errors) {
  EXPECT_EQ(CodeOf([] { LoadImage(DataPath("does_not_exist.png")); }),
            ErrorCode::kIo);
  EXPECT_EQ(CodeOf([] { LoadImage(DataPath("not_a_png.png")); }),
            ErrorCode::kFormat);
  EXPECT_EQ(CodeOf([] { LoadImage(DataPath("gray_1x1.png")); }),
            ErrorCode::kFormat);
}

TEST(SaveImageTest, ZeroRoundTrip) {
  TempDir dir;
  const ImageBuf img(3, 2, 0.0, 0.0, 0.0);
  SaveImage(img, dir / "z.png");
  EXPECT_EQ(LoadImage(dir / "z.png"), img);
}

TEST(SaveImageTest, HalfRoundsAwayFromZero) {
  TempDir dir;
  SaveImage(ImageBuf(1, 1, 0.5, 0.5, 0.5), dir / "half.png");
  const ImageBuf back = LoadImage(dir / "half.png");
  for (double v : back.data()) EXPECT_EQ(v, 128.0 / 255.0);
}

TEST(SaveImageTest, UnwritablePath) {
  EXPECT_EQ(CodeOf([] {
              SaveImage(ImageBuf(1, 1, 0.0, 0.0, 0.0),
                        "/nonexistent_dir_for_test/x.png");
            }),
            ErrorCode::kIo);
}

TEST(SaveImageTest, RoundTripEqualsQuantizeOnRandomImages) {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int w = 1 + static_cast<int>(seed % 7);
    const int h = 1 + static_cast<int>((seed * 3) % 5);
    const ImageBuf img = testing::RandomImage(w, h, seed);
    SaveImage(img, dir / "r.png");
    ASSERT_EQ(LoadImage(dir / "r.png"), Quantize(img)) << "seed " << seed;
  }
}

TEST(QuantizeTest, ExactStepsAreFixedPoints) {
  for (int b = 0; b < 256; ++b) EXPECT_EQ(QuantizeSample(b / 255.0), b);
}

TEST(PngCodecTest, MemoryRoundTrip) {
  const ImageBuf img = Quantize(testing::RandomImage(9, 4, 7));
  EXPECT_EQ(DecodePng(EncodePng(img)), img);
}

TEST(TaskTest, CodesAndNamesRoundTrip) {
  ASSERT_EQ(kAllTasks.size(), 7u);
  for (int code = 0; code < kNumTasks; ++code) {
    const RestorationTask t = TaskFromCode(code);
    EXPECT_EQ(TaskCode(t), code);
    EXPECT_EQ(TaskFromName(TaskName(t)), t);
  }
  EXPECT_EQ(TaskName(RestorationTask::kLowLightEnhance), "LowLightEnhance");
  EXPECT_EQ(CodeOf([] { TaskFromCode(7); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([] { TaskFromName("Dehazing"); }), ErrorCode::kInvalidParam);
}

TEST(DegradationReportTest, NormalizeSortsAndClearsRecommendation) {
  DegradationReport r;
  r.detections = {{RestorationTask::kDeblur, 0.5, "global"},
                  {RestorationTask::kDehaze, 0.9, "global"},
                  {RestorationTask::kDenoise, 0.5, "global"}};
  r.recommended_next = RestorationTask::kDehaze;
  r.terminate = true;
  NormalizeReport(r);
  EXPECT_EQ(r.detections[0].task, RestorationTask::kDehaze);
  EXPECT_EQ(r.detections[1].task, RestorationTask::kDenoise);
  EXPECT_EQ(r.detections[2].task, RestorationTask::kDeblur);
  EXPECT_FALSE(r.recommended_next.has_value());
}

TEST(ToolDescriptorTest, Invariants) {
  ToolDescriptor d{"x", {}, ToolMode::kBuiltin, std::nullopt, {}};
  EXPECT_EQ(CodeOf([&] { ValidateDescriptor(d); }), ErrorCode::kInvalidParam);
  d.supported_tasks = {RestorationTask::kDehaze};
  EXPECT_NO_THROW(ValidateDescriptor(d));
  d.mode = ToolMode::kExternal;
  EXPECT_EQ(CodeOf([&] { ValidateDescriptor(d); }), ErrorCode::kInvalidParam);
  d.endpoint = "http://127.0.0.1:1/restore";
  EXPECT_NO_THROW(ValidateDescriptor(d));
}

}  // namespace
}  // namespace restoragent
