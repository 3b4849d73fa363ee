"""Canonical content rendering.

A content string is rasterized in a fixed-advance font on a white
background at height 64. The same image feeds the content encoder and
the synthetic-data pipeline.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from . import config, errors

HEIGHT = 64
WIDTH_STEP = 16
_FONT_SIZE = 44
_MARGIN = 6

_font_cache: dict[tuple[str, int], ImageFont.FreeTypeFont] = {}


def _load_font(path: str, size: int = _FONT_SIZE) -> ImageFont.FreeTypeFont:
    key = (str(path), size)
    if key not in _font_cache:
        _font_cache[key] = ImageFont.truetype(str(path), size)
    return _font_cache[key]


def natural_width(text: str, font_path: str | None = None) -> int:
    """Smallest multiple of 16 covering the advance width plus margins."""
    font = _load_font(font_path or config.CONTENT_FONT)
    adv = int(np.ceil(font.getlength(text))) + 2 * _MARGIN
    return max(WIDTH_STEP, int(np.ceil(adv / WIDTH_STEP)) * WIDTH_STEP)


def render_content(text: str, target_width: int | None = None,
                   font_path: str | None = None,
                   charset: str = config.DEFAULT_CHARSET) -> np.ndarray:
    """Render ``text`` as a 64xW grayscale array in [0, 1].

    When ``target_width`` is given the natural rendering is scaled
    (preserving aspect) and right-padded with white to exactly that width.
    """
    config.validate_text(text, charset)
    if target_width is not None:
        if target_width < WIDTH_STEP:
            raise errors.WidthTooSmall(f"target_width {target_width} < {WIDTH_STEP}")
        if target_width % WIDTH_STEP != 0:
            raise errors.WidthTooSmall(
                f"target_width {target_width} not divisible by {WIDTH_STEP}")

    font = _load_font(font_path or config.CONTENT_FONT)
    width = natural_width(text, font_path)
    img = Image.new("L", (width, HEIGHT), 255)
    draw = ImageDraw.Draw(img)
    ascent, descent = font.getmetrics()
    y = (HEIGHT - (ascent + descent)) // 2
    draw.text((_MARGIN, y), text, font=font, fill=0)

    if target_width is not None and width != target_width:
        if width < target_width:
            canvas = Image.new("L", (target_width, HEIGHT), 255)
            canvas.paste(img, (0, 0))
            img = canvas
        else:
            scale = target_width / width
            new_h = max(1, int(round(HEIGHT * scale)))
            img = img.resize((target_width, new_h), Image.BILINEAR)
            canvas = Image.new("L", (target_width, HEIGHT), 255)
            canvas.paste(img, (0, (HEIGHT - new_h) // 2))
            img = canvas

    return np.asarray(img, dtype=np.float32) / 255.0
