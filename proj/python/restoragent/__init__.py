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

"""Python surface of the restoragent C++ core.

Images are float arrays of shape (height, width, 3) with values in [0, 1].
"""
from ._core import (
    RestoragentError,
    apply_builtin,
    base64_decode,
    base64_encode,
    builtin_tools,
    grpo,
    load_image,
    make_tool_request,
    psnr,
    quality,
    quantize,
    restore,
    save_image,
    ssim,
    task_names,
)

__all__ = [
    "RestoragentError",
    "apply_builtin",
    "base64_decode",
    "base64_encode",
    "builtin_tools",
    "grpo",
    "load_image",
    "make_tool_request",
    "psnr",
    "quality",
    "quantize",
    "restore",
    "save_image",
    "ssim",
    "task_names",
]
