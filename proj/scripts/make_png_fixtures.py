# Copyright 2026 The Restoragent Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the small PNG fixtures used by the image I/O tests.

The files are produced with Pillow so the C++ loader is checked against an
independent encoder.
"""
import pathlib

import numpy as np
from PIL import Image

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.zeros((2, 2, 3), np.uint8), "RGB").save(OUT / "zeros_2x2.png")
    Image.fromarray(np.full((1, 1, 3), 255, np.uint8), "RGB").save(OUT / "white_1x1.png")
    Image.fromarray(np.array([[[128, 64, 32]]], np.uint8), "RGB").save(OUT / "pixel_128_64_32.png")
    Image.fromarray(np.array([[[10, 20, 30, 0]]], np.uint8), "RGBA").save(OUT / "rgba_1x1.png")
    Image.fromarray(np.array([[7]], np.uint8), "L").save(OUT / "gray_1x1.png")
    (OUT / "not_a_png.png").write_text("definitely not a png\n")


if __name__ == "__main__":
    main()
