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

"""Smoke tests for the Python bindings."""
import base64
import json
import math
import pathlib

import numpy as np
import pytest

import restoragent as ra

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="module")
def reference():
    return ra.load_image(DATA / "reference_scene.png")


def test_load_and_metrics(reference):
    assert reference.shape == (120, 160, 3)
    assert ra.psnr(reference, reference) == 99.0
    assert ra.ssim(reference, reference) == pytest.approx(1.0, abs=1e-9)
    shifted = np.clip(reference + 16 / 255, 0, 1)
    assert ra.psnr(reference, shifted) < 99.0


def test_psnr_golden():
    x = np.full((8, 8, 3), 0.25)
    assert ra.psnr(x, x + 16 / 255) == pytest.approx(24.0482, abs=1e-3)


def test_errors_carry_code(reference):
    with pytest.raises(ra.RestoragentError) as info:
        ra.psnr(reference, np.zeros((2, 2, 3)))
    assert info.value.code == "ShapeMismatch"
    with pytest.raises(ra.RestoragentError):
        ra.apply_builtin("no_such_tool", reference)


def test_builtins_preserve_shape(reference):
    assert "gamma_llie" in ra.builtin_tools()
    for name in ra.builtin_tools():
        out = ra.apply_builtin(name, reference)
        assert out.shape == reference.shape
        assert out.min() >= 0.0 and out.max() <= 1.0
    flat = np.full((4, 4, 3), 0.25)
    out = ra.apply_builtin("gamma_llie", flat)
    assert out[0, 0, 0] == pytest.approx(0.25 ** (1 / 2.2), abs=1e-12)


def test_quality_keys(reference):
    q = ra.quality(reference)
    assert set(q) == {
        "aggregate", "colorfulness", "dark_channel_density", "entropy",
        "mean_luminance", "noise_sigma", "rms_contrast", "sharpness",
    }


def test_wire_request_round_trips(reference):
    req = ra.make_tool_request("Dehaze", reference, {"omega": "0.8"})
    assert req["task"] == "Dehaze"
    assert req["params"] == {"omega": "0.8"}
    png = base64.b64decode(req["image_png_b64"])
    assert png.startswith(b"\x89PNG")
    assert ra.base64_decode(req["image_png_b64"]) == png
    assert ra.base64_encode(b"foobar") == "Zm9vYmFy"


def test_restore_clean_is_identity(reference):
    out, trace = ra.restore(reference)
    assert np.array_equal(out, reference)
    assert trace["committed_steps"] == 0


def test_restore_composite_improves(reference, tmp_path):
    dark = reference ** 3
    hazy = ra.quantize(dark * 0.6 + 0.4)
    out, trace = ra.restore(hazy, evolve=True, bank_path=tmp_path / "bank.jsonl")
    json.dumps(trace)
    assert trace["committed_steps"] >= 1
    assert ra.psnr(out, reference) > ra.psnr(hazy, reference)
    lines = (tmp_path / "bank.jsonl").read_text().splitlines()
    attempts = [e for e in trace["events"] if e["type"] == "attempt"]
    assert len(lines) == len(attempts)


def test_grpo_math():
    g = ra.grpo
    assert g.advantages([1, 0, 1, 0]) == pytest.approx([1, -1, 1, -1], abs=1e-6)
    assert g.advantages([1, 1, 1]) == [0.0, 0.0, 0.0]
    assert g.clipped_term(1.5, 1.0) == 1.2
    assert g.clipped_term(0.5, -1.0) == -0.8
    assert g.l_clip([1.5, 0.5], [1.0, -1.0]) == pytest.approx(0.2)
    assert g.kl_estimate(0.4, 0.2) == pytest.approx(2 - math.log(2) - 1, abs=1e-12)
    assert g.final_loss(0.0, 0.306853) == pytest.approx(0.0122741, abs=1e-7)
    with pytest.raises(ra.RestoragentError) as info:
        g.ratio(0.5, 0.0)
    assert info.value.code == "DegeneratePolicy"


def test_train_toy(reference):
    hazy = ra.quantize(reference * 0.6 + 0.4)
    result = ra.grpo.train_toy(hazy, seed=0, iterations=200)
    assert result["rewards"] == [0, 1, 0, 0, 0, 0, 0]
    assert result["policy"][1] > 0.9
    assert len(result["mean_reward"]) == 200
