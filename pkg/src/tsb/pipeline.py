"""One-shot inference orchestration.

Given a scene photo, a word box, and a new string: localize a 256x256
context crop preserving the word aspect, encode style and content,
generate a variable-width patch + mask, and optionally blend the patch
back into the scene.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import torch

from . import blend as blend_mod
from . import errors
from .content import natural_width, render_content
from .trainer import TSBModels

CONTEXT_SIZE = 256


@dataclasses.dataclass
class TransferResult:
    patch: np.ndarray                 # [64, W, 3] in [0, 1]
    mask: np.ndarray | None = None    # [64, W] in (0, 1)
    blended_scene: np.ndarray | None = None


def localize_context(scene: np.ndarray, box: tuple[int, int, int, int]
                     ) -> tuple[np.ndarray, tuple[float, float, float, float]]:
    """Square context crop around the word box, resized to 256x256.

    Returns the crop and the box coordinates inside it. Aspect ratio of
    the word is preserved because the crop is square. Regions falling
    outside the photo are edge-padded.
    """
    h, w = scene.shape[:2]
    x0, y0, x1, y1 = box
    if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
        raise errors.BoxOutOfBounds(f"box {box} outside {w}x{h} scene")
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    side = max(x1 - x0, y1 - y0) * 2
    side = max(side, 32)
    sx0, sy0 = int(round(cx - side / 2)), int(round(cy - side / 2))
    sx1, sy1 = sx0 + int(side), sy0 + int(side)
    pad_l, pad_t = max(0, -sx0), max(0, -sy0)
    pad_r, pad_b = max(0, sx1 - w), max(0, sy1 - h)
    crop = scene[max(0, sy0):min(h, sy1), max(0, sx0):min(w, sx1)]
    if any((pad_l, pad_t, pad_r, pad_b)):
        crop = np.pad(crop, ((pad_t, pad_b), (pad_l, pad_r), (0, 0)), mode="edge")
    scale = CONTEXT_SIZE / crop.shape[0]
    crop = blend_mod._resize(crop, CONTEXT_SIZE, CONTEXT_SIZE)
    bx0 = (x0 - sx0) * scale
    by0 = (y0 - sy0) * scale
    bx1 = (x1 - sx0) * scale
    by1 = (y1 - sy0) * scale
    return np.clip(crop, 0, 1), (bx0, by0, bx1, by1)


@torch.no_grad()
def transfer(models: TSBModels, scene: np.ndarray,
             box: tuple[int, int, int, int], new_content: str,
             charset: str, max_len: int,
             return_mask: bool = False, do_blend: bool = False,
             blend_mode: str = "poisson") -> TransferResult:
    from .config import validate_text

    validate_text(new_content, charset, max_len)
    models.eval()
    ctx, ctx_box = localize_context(scene, box)
    ctx_t = torch.from_numpy(ctx.astype(np.float32)).permute(2, 0, 1)[None]
    box_t = torch.tensor([ctx_box], dtype=torch.float32)

    e_s = models.style_enc(ctx_t, box_t)
    w = models.mapper(e_s)
    width = natural_width(new_content)
    content_img = torch.from_numpy(render_content(new_content, width))[None, None]
    e_c = models.content_enc(content_img)
    out = models.generator(e_c, w)

    patch = out.clamped()[0].permute(1, 2, 0).numpy()
    mask = out.mask[0, 0].numpy()
    result = TransferResult(patch=patch)
    if return_mask:
        result.mask = mask
    if do_blend:
        result.blended_scene = blend_mod.blend(
            scene, patch, box, mask=mask, mode=blend_mode)
    return result
