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
#include "restoragent/eval.h"
#include "test_util.h"

namespace restoragent::eval {
namespace {

using testing::MakeImage;
using testing::RandomImage;

TEST(PsnrTest, IdenticalImagesHitCap) {
  const ImageBuf x = RandomImage(8, 8, 1);
  EXPECT_EQ(Psnr(x, x), 99.0);
}

TEST(PsnrTest, BlackVsWhiteIsZero) {
  EXPECT_EQ(Psnr(ImageBuf(4, 4, 0.0, 0.0, 0.0), ImageBuf(4, 4, 1.0, 1.0, 1.0)),
            0.0);
}

TEST(PsnrTest, UniformOffsetClosedForm) {
  const ImageBuf x = MakeImage(16, 16, [](int c, int y, int x) {
    return ((c * 31 + y * 16 + x) % 240) / 255.0;
  });
  const ImageBuf y = MakeImage(16, 16, [&](int c, int yy, int xx) {
    return x.at(c, yy, xx) + 16.0 / 255.0;
  });
  // MSE = (16/255)^2, so PSNR = 10 log10(255^2 / 256).
  const double expected = 10.0 * std::log10(255.0 * 255.0 / 256.0);
  EXPECT_NEAR(expected, 24.0482, 1e-3);
  EXPECT_NEAR(Psnr(x, y), expected, 1e-9);
}

TEST(PsnrTest, ShapeMismatch) {
  try {
    Psnr(ImageBuf(4, 4, 0, 0, 0), ImageBuf(4, 5, 0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(SsimTest, IdentityIsOne) {
  const ImageBuf x = RandomImage(32, 24, 2);
  EXPECT_NEAR(Ssim(x, x), 1.0, 1e-9);
}

TEST(SsimTest, ConstantImagesClosedForm) {
  // Zero variance leaves only the luminance term (2 mx my + C1)/(mx^2+my^2+C1).
  const double c1 = 1e-4;
  const double expected = (2 * 0.2 * 0.8 + c1) / (0.04 + 0.64 + c1);
  EXPECT_NEAR(expected, 0.4706, 1e-4);
  EXPECT_NEAR(Ssim(ImageBuf(16, 16, 0.2, 0.2, 0.2), ImageBuf(16, 16, 0.8, 0.8, 0.8)),
              expected, 1e-6);
}

TEST(SsimTest, Symmetric) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ImageBuf a = RandomImage(20, 17, seed);
    const ImageBuf b = RandomImage(20, 17, seed + 100);
    EXPECT_NEAR(Ssim(a, b), Ssim(b, a), 1e-12);
  }
}

TEST(SsimTest, Errors) {
  try {
    Ssim(ImageBuf(10, 30, 0, 0, 0), ImageBuf(10, 30, 0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooSmall);
  }
  try {
    Ssim(ImageBuf(12, 12, 0, 0, 0), ImageBuf(13, 12, 0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(DegradationTest, DegenerateParametersAreIdentity) {
  const ImageBuf x = RandomImage(12, 9, 5);
  EXPECT_EQ(ApplyDegradation(x, {{Haze{1.0, 0.3}}, 0}), x);
  EXPECT_EQ(ApplyDegradation(x, {{GammaDark{1.0}}, 0}), x);
}

TEST(DegradationTest, HazeOnBlack) {
  const ImageBuf out =
      ApplyDegradation(ImageBuf(6, 6, 0.0, 0.0, 0.0), {{Haze{0.6, 1.0}}, 0});
  for (double v : out.data()) EXPECT_NEAR(v, 0.4, 1e-15);
}

TEST(DegradationTest, GammaAppliesPower) {
  const ImageBuf out =
      ApplyDegradation(ImageBuf(2, 2, 0.5, 0.5, 0.5), {{GammaDark{3.0}}, 0});
  for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 0.125);
}

TEST(DegradationTest, CompositeAppliedInOrder) {
  // Gamma then haze: 0.6 * 0.5^2 + 0.4 = 0.55; haze then gamma would give
  // (0.6*0.5 + 0.4)^2 = 0.49.
  const ImageBuf out = ApplyDegradation(ImageBuf(2, 2, 0.5, 0.5, 0.5),
                                        {{GammaDark{2.0}, Haze{0.6, 1.0}}, 0});
  for (double v : out.data()) EXPECT_NEAR(v, 0.55, 1e-15);
}

TEST(DegradationTest, SeededDeterminismShapeAndRange) {
  const ImageBuf x = RandomImage(40, 30, 9);
  const std::vector<DegradationSpec> specs = {
      {{GaussianNoise{0.1}}, 3},
      {{MotionBlur{7, 30.0}}, 3},
      {{RainStreaks{0.05, 9, 80.0}}, 3},
      {{SnowDots{0.1, 2}}, 3},
      {{GammaDark{2.5}, Haze{0.5, 0.9}, GaussianNoise{0.05}}, 11},
  };
  for (const auto& spec : specs) {
    const ImageBuf a = ApplyDegradation(x, spec);
    const ImageBuf b = ApplyDegradation(x, spec);
    EXPECT_EQ(a, b);
    EXPECT_TRUE(a.same_shape(x));
    for (double v : a.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    EXPECT_LT(Psnr(x, a), 99.0);
  }
}

TEST(DegradationTest, DifferentSeedsDiffer) {
  const ImageBuf x = RandomImage(20, 20, 9);
  EXPECT_NE(ApplyDegradation(x, {{GaussianNoise{0.1}}, 1}),
            ApplyDegradation(x, {{GaussianNoise{0.1}}, 2}));
}

TEST(DegradationTest, InvalidParameters) {
  const ImageBuf x(4, 4, 0.5, 0.5, 0.5);
  const std::vector<Degradation> bad = {GammaDark{0.5},      GammaDark{6.0},
                                        Haze{0.0, 1.0},      Haze{0.5, 1.2},
                                        GaussianNoise{0.31}, MotionBlur{0, 0.0},
                                        RainStreaks{1.5, 3, 0.0}, SnowDots{0.1, -1}};
  for (const auto& d : bad) {
    try {
      ApplyDegradation(x, {{d}, 0});
      ADD_FAILURE() << "variant " << d.index();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidParam);
    }
  }
}

}  // namespace
}  // namespace restoragent::eval
