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

"""Writes tests/data/reference_scene.png, the clean scene used by the
end-to-end restoration fixtures.

A moonlit house: dark sky and ground, mid-to-bright objects, and a moon disk
wide enough to survive a 15-pixel minimum filter so that the airlight of a
hazed copy is estimated close to white. Shading is smooth and edges are hard,
so the image carries no pixel noise.
"""
import pathlib

import numpy as np
from PIL import Image

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
W, H = 160, 120
SKY_ROWS = 30
GROUND = 0.12
OBJECTS = 0.9
MOON_RADIUS = 13


def main():
    y, x = np.mgrid[0:H, 0:W].astype(np.float64)
    img = np.zeros((H, W, 3))

    sky = y < SKY_ROWS
    t = y / SKY_ROWS
    img[sky] = np.stack([0.04 + 0.04 * t, 0.05 + 0.05 * t, 0.12 + 0.08 * t], -1)[sky]

    shade = 0.8 + 0.2 * np.sin(x / 11.0) * np.cos(y / 7.0)
    ground = GROUND * np.stack([0.7 * shade, 1.0 * shade, 0.55 * shade], -1)
    img[~sky] = ground[~sky]

    def rect(x0, y0, x1, y1, color):
        img[y0:y1, x0:x1] = np.array(color) * OBJECTS

    def disk(cx, cy, r, color):
        img[(x - cx) ** 2 + (y - cy) ** 2 <= r * r] = np.array(color) * OBJECTS

    rect(18, 50, 62, 92, (0.95, 0.85, 0.62))    # wall
    rect(18, 38, 62, 50, (0.95, 0.35, 0.25))    # roof
    rect(34, 70, 46, 92, (0.45, 0.25, 0.12))    # door
    rect(22, 56, 32, 66, (0.55, 0.80, 1.0))     # windows
    rect(48, 56, 58, 66, (0.55, 0.80, 1.0))
    disk(110, 52, 18, (0.35, 0.85, 0.35))       # tree crown
    rect(106, 68, 114, 96, (0.55, 0.35, 0.2))   # trunk
    rect(72, 82, 96, 98, (1.0, 0.6, 0.8))       # flower bed
    rect(0, 104, W, H, (0.3, 0.55, 1.0))        # water
    img[(x - 138) ** 2 + (y - 14) ** 2 <= MOON_RADIUS ** 2] = (0.98, 0.97, 0.92)

    water = y >= 104
    ripple = 0.05 * np.sin(x / 3.0 + y / 2.0)
    img[water] = np.clip(img[water] + ripple[water][:, None], 0, 1)

    OUT.mkdir(parents=True, exist_ok=True)
    data = np.round(np.clip(img, 0, 1) * 255).astype(np.uint8)
    Image.fromarray(data, "RGB").save(OUT / "reference_scene.png")


if __name__ == "__main__":
    main()
